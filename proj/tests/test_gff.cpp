#include <doctest.h>

#include <cmath>
#include <map>

#include "gfflab/gff.hpp"
#include "gfflab/parallel.hpp"
#include "gfflab/stats.hpp"
#include "nets.hpp"
#include "oracles.hpp"

using namespace gfflab;

TEST_CASE("field sampler reproduces the green covariance") {
    Network net = nets::diamond();
    BoundaryFunction u = harmonic_extension(net, {1.0, 2.0});
    GreenTable g = green_function(net);

    const long n = 200000;
    stats::MomentAcc m1, m2;
    stats::CovAcc cov;
    for (long r = 0; r < n; ++r) {
        RngStream rng(77, static_cast<uint64_t>(r), 1);
        FieldSample f = sample_discrete_gff(net, u, rng);
        CHECK(f.values[0] == 1.0);  // boundary pinned exactly
        CHECK(f.values[3] == 2.0);
        double a = f.values[1] - u.extension[1];
        double b = f.values[2] - u.extension[2];
        m1.add(a);
        m2.add(b);
        cov.add(a, b);
    }
    CHECK(std::fabs(m1.mean()) < 4 * m1.stderr_mean());
    CHECK(std::fabs(m2.mean()) < 4 * m2.stderr_mean());
    CHECK(m1.variance() == doctest::Approx(g.at(net, 1, 1)).epsilon(0.02));
    CHECK(m2.variance() == doctest::Approx(g.at(net, 2, 2)).epsilon(0.02));
    CHECK(cov.covariance() == doctest::Approx(g.at(net, 1, 2)).epsilon(0.05));
}

TEST_CASE("bridge minimum formula closed values") {
    CHECK(bridge_min_above(1.0, 1.0, 1.0, 0.0) == doctest::Approx(1.0 - std::exp(-2.0)));
    CHECK(bridge_min_above(0.5, 0.25, 2.0, 0.0) ==
          doctest::Approx(1.0 - std::exp(-2.0 * 0.5 * 0.25 / 2.0)));
    CHECK(bridge_min_above(0.0, 1.0, 1.0, 0.0) == 0.0);  // touches the level at an endpoint
    CHECK(bridge_min_above(1.0, 1.0, 1.0, 2.0) == 0.0);  // level above both endpoints
    CHECK_THROWS_AS(bridge_min_above(1.0, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("bridge minimum formula matches a discretized-bridge monte carlo") {
    auto mc = oracles::bridge_min_mc(1.0, 1.0, 1.0, 200000, 1024, 99, default_workers());
    double target = bridge_min_above(1.0, 1.0, 1.0, 0.0);
    CHECK(std::fabs(mc.estimate - target) <= 3.5 * mc.stderror);
}

TEST_CASE("midpoint variance equals the refined green increment") {
    Network base = nets::p3();
    for (int level : {1, 2}) {
        RefinedNetwork ref = refine(base, level);
        GreenTable gb = green_function(base);
        GreenTable gf = green_function(ref.net());
        for (int e = 0; e < base.edge_count(); ++e) {
            const auto& chain = ref.chain(e);
            int a = chain.front(), b = chain.back();
            int mid = chain[chain.size() / 2];
            double gaa = base.is_boundary(a) ? 0.0 : gb.at(base, a, a);
            double gbb = base.is_boundary(b) ? 0.0 : gb.at(base, b, b);
            double gab = (base.is_boundary(a) || base.is_boundary(b)) ? 0.0 : gb.at(base, a, b);
            double resistance = 1.0 / base.conductance(e);
            // Total variance at the midpoint: bridge part R/4 plus the
            // variance of the endpoint average.
            double expected = resistance / 4.0 + 0.25 * (gaa + gbb + 2.0 * gab);
            CHECK(std::fabs(gf.at(ref.net(), mid, mid) - expected) <= 1e-10);
        }
    }
}

TEST_CASE("bridge interpolation is coupled across refinement levels") {
    Network base = nets::diamond();
    BoundaryFunction u = harmonic_extension(base, {0.5, 1.5});
    RefinedNetwork r1 = refine(base, 1);
    RefinedNetwork r2 = refine(base, 2);

    RngStream rng(123, 0, 7);
    FieldSample f0 = sample_discrete_gff(base, u, rng);
    RngStream b1(123, 0, 8), b2(123, 0, 8);
    FieldSample f1 = interpolate_field(r1, f0, b1);
    FieldSample f2 = interpolate_field(r2, f0, b2);

    // Base vertices keep their values at every level.
    for (int v = 0; v < base.vertex_count(); ++v) {
        CHECK(f1.values[static_cast<size_t>(v)] == doctest::Approx(f0.values[static_cast<size_t>(v)]).epsilon(1e-13));
        CHECK(f2.values[static_cast<size_t>(v)] == doctest::Approx(f0.values[static_cast<size_t>(v)]).epsilon(1e-13));
    }
    // Level-1 midpoints reappear unchanged inside the level-2 chains.
    for (int e = 0; e < base.edge_count(); ++e) {
        int m1 = r1.chain(e)[1];
        int m2 = r2.chain(e)[2];
        CHECK(f1.values[static_cast<size_t>(m1)] ==
              doctest::Approx(f2.values[static_cast<size_t>(m2)]).epsilon(1e-13));
    }
}

TEST_CASE("interpolated field has the refined-network law") {
    Network base = nets::p3();
    BoundaryFunction u = BoundaryFunction::constant(base, 0.0);
    RefinedNetwork ref = refine(base, 1);
    GreenTable gf = green_function(ref.net());
    BoundaryFunction uf = BoundaryFunction::constant(ref.net(), 0.0);

    const long n = 200000;
    std::vector<stats::MomentAcc> acc(static_cast<size_t>(ref.net().interior_count()));
    for (long r = 0; r < n; ++r) {
        RngStream rng(55, static_cast<uint64_t>(r), 1);
        FieldSample f0 = sample_discrete_gff(base, u, rng);
        RngStream br(55, static_cast<uint64_t>(r), 2);
        FieldSample f = interpolate_field(ref, f0, br);
        for (int i = 0; i < ref.net().interior_count(); ++i)
            acc[static_cast<size_t>(i)].add(
                f.values[static_cast<size_t>(ref.net().interior()[static_cast<size_t>(i)])]);
    }
    for (int i = 0; i < ref.net().interior_count(); ++i) {
        int v = ref.net().interior()[static_cast<size_t>(i)];
        CHECK(acc[static_cast<size_t>(i)].variance() ==
              doctest::Approx(gf.at(ref.net(), v, v)).epsilon(0.03));
    }
}

TEST_CASE("markov decomposition splits the field across a separating set") {
    Network net = grid_network(5, 5);
    BoundaryFunction u = BoundaryFunction::constant(net, 1.0);
    RngStream rng(31, 0, 0);
    FieldSample f = sample_discrete_gff(net, u, rng);

    std::vector<char> in_a(static_cast<size_t>(net.vertex_count()), 0);
    for (int b : net.boundary()) in_a[static_cast<size_t>(b)] = 1;
    in_a[12] = 1;  // center vertex
    MarkovParts parts = markov_decompose(net, f, in_a);

    for (int v = 0; v < net.vertex_count(); ++v) {
        CHECK(parts.harmonic[static_cast<size_t>(v)] + parts.residual[static_cast<size_t>(v)] ==
              doctest::Approx(f.values[static_cast<size_t>(v)]).epsilon(1e-10));
        if (in_a[static_cast<size_t>(v)])
            CHECK(parts.residual[static_cast<size_t>(v)] == doctest::Approx(0.0).epsilon(1e-12));
    }
    // Harmonic part is discretely harmonic off A.
    for (int v : net.interior()) {
        if (in_a[static_cast<size_t>(v)]) continue;
        double acc = 0;
        for (auto [w, ei] : net.neighbors(v))
            acc += net.conductance(ei) * parts.harmonic[static_cast<size_t>(w)];
        CHECK(parts.harmonic[static_cast<size_t>(v)] ==
              doctest::Approx(acc / net.total_conductance(v)).epsilon(1e-9));
    }
}
