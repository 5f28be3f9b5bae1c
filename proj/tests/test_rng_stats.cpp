#include <doctest.h>

#include <cmath>
#include <vector>

#include "gfflab/rng.hpp"
#include "gfflab/stats.hpp"

using namespace gfflab;

TEST_CASE("streams are reproducible and key-separated") {
    RngStream a(7, 3, 11), b(7, 3, 11), c(7, 4, 11);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    bool any_diff = false;
    RngStream a2(7, 3, 11);
    for (int i = 0; i < 100; ++i) any_diff = any_diff || (a2.next_u64() != c.next_u64());
    CHECK(any_diff);
}

TEST_CASE("forked streams do not depend on parent consumption") {
    RngStream a(1, 2, 3), b(1, 2, 3);
    for (int i = 0; i < 17; ++i) a.next_u64();  // consume a only
    RngStream fa = a.fork(99), fb = b.fork(99);
    for (int i = 0; i < 50; ++i) CHECK(fa.next_u64() == fb.next_u64());
}

TEST_CASE("pick_cumulative never selects zero-weight plateaus") {
    RngStream rng(5, 0, 0);
    // weights {0, 2, 0, 0, 1, 0} as cumulative sums.
    double cum[] = {0.0, 2.0, 2.0, 2.0, 3.0, 3.0};
    for (int i = 0; i < 2000; ++i) {
        int k = rng.pick_cumulative(cum, 6);
        CHECK((k == 1 || k == 4));
    }
}

TEST_CASE("distribution samplers match their moments") {
    RngStream rng(42, 0, 0);
    const int n = 200000;

    stats::MomentAcc nrm, expo, gam, poi;
    for (int i = 0; i < n; ++i) nrm.add(rng.normal());
    CHECK(std::fabs(nrm.mean()) < 5 * nrm.stderr_mean());
    CHECK(nrm.variance() == doctest::Approx(1.0).epsilon(0.02));

    for (int i = 0; i < n; ++i) expo.add(rng.exponential(2.5));
    CHECK(expo.mean() == doctest::Approx(0.4).epsilon(0.02));

    for (int i = 0; i < n; ++i) gam.add(rng.gamma(0.5, 2.0));
    CHECK(gam.mean() == doctest::Approx(0.25).epsilon(0.03));
    CHECK(gam.variance() == doctest::Approx(0.125).epsilon(0.05));

    for (int i = 0; i < n; ++i) poi.add(static_cast<double>(rng.poisson(3.7)));
    CHECK(poi.mean() == doctest::Approx(3.7).epsilon(0.02));
    CHECK(poi.variance() == doctest::Approx(3.7).epsilon(0.03));
}

TEST_CASE("logarithmic distribution") {
    RngStream rng(9, 0, 0);
    const double r = 0.25;
    const int n = 200000;
    stats::MomentAcc acc;
    long ones = 0;
    for (int i = 0; i < n; ++i) {
        long k = rng.logarithmic(r);
        CHECK(k >= 1);
        if (k == 1) ++ones;
        acc.add(static_cast<double>(k));
    }
    const double norm = -std::log1p(-r);
    CHECK(static_cast<double>(ones) / n == doctest::Approx(r / norm).epsilon(0.01));
    CHECK(acc.mean() == doctest::Approx(r / ((1 - r) * norm)).epsilon(0.01));
}

TEST_CASE("moment accumulator merging is exact") {
    RngStream rng(3, 0, 0);
    stats::MomentAcc whole, left, right;
    for (int i = 0; i < 1000; ++i) {
        double x = rng.normal();
        whole.add(x);
        (i < 500 ? left : right).add(x);
    }
    left.merge(right);
    CHECK(left.count() == whole.count());
    CHECK(left.mean() == doctest::Approx(whole.mean()).epsilon(1e-13));
    CHECK(left.variance() == doctest::Approx(whole.variance()).epsilon(1e-12));
}

TEST_CASE("ks test calibrates on true and false hypotheses") {
    RngStream rng(11, 0, 0);
    std::vector<double> u(20000);
    for (auto& x : u) x = rng.uniform01();
    double p_true = stats::ks_test(u, [](double x) { return std::min(std::max(x, 0.0), 1.0); });
    CHECK(p_true > 0.01);
    double p_false = stats::ks_test(u, [](double x) { return stats::normal_cdf(x); });
    CHECK(p_false < 1e-6);
}

TEST_CASE("poisson chi-squared goodness of fit") {
    RngStream rng(13, 0, 0);
    std::vector<long> counts(50000);
    for (auto& c : counts) c = rng.poisson(2.0);
    CHECK(stats::poisson_chi2_pvalue(counts, 2.0) > 0.01);
    CHECK(stats::poisson_chi2_pvalue(counts, 2.5) < 1e-6);
}
