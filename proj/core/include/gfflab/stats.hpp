#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace gfflab::stats {

// Kahan-compensated accumulator for first and second moments. Merging is
// associative; callers merge chunk partials in index order so results do not
// depend on the worker count.
class MomentAcc {
public:
    void add(double x) {
        add_comp(s1_, c1_, x);
        add_comp(s2_, c2_, x * x);
        ++n_;
    }
    void merge(const MomentAcc& other) {
        add_comp(s1_, c1_, other.s1_ + other.c1_);
        add_comp(s2_, c2_, other.s2_ + other.c2_);
        n_ += other.n_;
    }
    long count() const { return n_; }
    double mean() const { return (s1_ + c1_) / static_cast<double>(n_); }
    double variance() const {
        double m = mean();
        return ((s2_ + c2_) - static_cast<double>(n_) * m * m) / static_cast<double>(n_ - 1);
    }
    double stderr_mean() const { return std::sqrt(variance() / static_cast<double>(n_)); }

private:
    static void add_comp(double& sum, double& comp, double x) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double s1_ = 0, c1_ = 0, s2_ = 0, c2_ = 0;
    long n_ = 0;
};

// Covariance accumulator for a pair of observables.
class CovAcc {
public:
    void add(double x, double y) {
        a_.add(x);
        b_.add(y);
        sxy_ += x * y;
        ++n_;
    }
    void merge(const CovAcc& o) {
        a_.merge(o.a_);
        b_.merge(o.b_);
        sxy_ += o.sxy_;
        n_ += o.n_;
    }
    long count() const { return n_; }
    double covariance() const {
        return (sxy_ - static_cast<double>(n_) * a_.mean() * b_.mean()) /
               static_cast<double>(n_ - 1);
    }
    const MomentAcc& x() const { return a_; }
    const MomentAcc& y() const { return b_; }

private:
    MomentAcc a_, b_;
    double sxy_ = 0;
    long n_ = 0;
};

inline double normal_cdf(double x, double mean = 0.0, double stddev = 1.0) {
    return 0.5 * std::erfc(-(x - mean) / (stddev * std::sqrt(2.0)));
}

// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);

inline double gamma_cdf(double x, double shape, double rate) {
    if (x <= 0) return 0.0;
    return reg_lower_gamma(shape, rate * x);
}

inline double chi_squared_sf(double stat, int dof) {
    return 1.0 - reg_lower_gamma(0.5 * dof, 0.5 * stat);
}

// Asymptotic Kolmogorov distribution survival function:
// Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

// One-sample KS test against a given CDF; returns the asymptotic p-value.
// Samples are sorted in place.
double ks_test(std::vector<double>& samples, const std::function<double(double)>& cdf);

// Two-sample KS test p-value. Both sample vectors are sorted in place.
double ks_two_sample(std::vector<double>& a, std::vector<double>& b);

// Chi-squared goodness-of-fit p-value for observed integer counts against
// Poisson(mean); bins with expected count below 5 are pooled into the tail.
double poisson_chi2_pvalue(const std::vector<long>& counts, double mean);

}  // namespace gfflab::stats
