#include "gfflab/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace gfflab::stats {

namespace {

// Series expansion of P(a,x), valid for x < a+1.
double lower_gamma_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x), valid for x >= a+1 (Lentz).
double upper_gamma_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double reg_lower_gamma(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("reg_lower_gamma: bad arguments");
    if (x == 0) return 0.0;
    if (x < a + 1.0) return lower_gamma_series(a, x);
    return 1.0 - upper_gamma_cf(a, x);
}

double kolmogorov_sf(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_test(std::vector<double>& samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return kolmogorov_sf(std::sqrt(n) * d);
}

double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i; else ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    double ne = std::sqrt(na * nb / (na + nb));
    return kolmogorov_sf(ne * d);
}

double poisson_chi2_pvalue(const std::vector<long>& counts, double mean) {
    const double n = static_cast<double>(counts.size());
    long max_count = 0;
    for (long c : counts) max_count = std::max(max_count, c);

    std::vector<double> expected;
    double pmf = std::exp(-mean);
    double cum = 0.0;
    for (long k = 0; k <= max_count; ++k) {
        expected.push_back(n * pmf);
        cum += pmf;
        pmf *= mean / static_cast<double>(k + 1);
    }
    expected.push_back(n * (1.0 - cum));  // tail bin

    std::vector<double> observed(expected.size(), 0.0);
    for (long c : counts) observed[static_cast<size_t>(c)] += 1.0;

    // Pool sparse bins from the right until every bin expects at least 5.
    while (expected.size() > 2 && expected.back() < 5.0) {
        expected[expected.size() - 2] += expected.back();
        observed[observed.size() - 2] += observed.back();
        expected.pop_back();
        observed.pop_back();
    }
    double stat = 0.0;
    for (size_t k = 0; k < expected.size(); ++k) {
        if (expected[k] <= 0) continue;
        double diff = observed[k] - expected[k];
        stat += diff * diff / expected[k];
    }
    int dof = static_cast<int>(expected.size()) - 1;
    return chi_squared_sf(stat, std::max(dof, 1));
}

}  // namespace gfflab::stats
