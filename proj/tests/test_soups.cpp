#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "gfflab/soups.hpp"
#include "gfflab/stats.hpp"
#include "nets.hpp"
#include "oracles.hpp"

using namespace gfflab;

TEST_CASE("loop measure weights on the triangle") {
    Network tri = nets::triangle();
    // One unrooted class per even length: (1,2)^k.
    CHECK(loop_measure_weight(tri, {1, 2, 1}) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(loop_measure_weight(tri, {1, 2, 1, 2, 1}) ==
          doctest::Approx(0.25 * 0.25 / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(loop_measure_weight(tri, {1, 2}), std::invalid_argument);
    CHECK_THROWS_WITH_AS(loop_measure_weight(tri, {0, 1, 0}), doctest::Contains("boundary"),
                         std::invalid_argument);
}

TEST_CASE("total loop mass determinant identity") {
    Network tri = nets::triangle();
    CHECK(total_loop_mass(tri) == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-10));
    // P3 has no nontrivial interior loop.
    CHECK(total_loop_mass(nets::p3()) == doctest::Approx(0.0).epsilon(1e-12));

    // Truncated exhaustive enumeration approaches the determinant value from
    // below, within a computed geometric tail bound: the mass of loops longer
    // than L is at most tr(P^{L+1} (I - P)^{-1}) / (L + 1).
    const int max_len = 12;
    for (const Network& net : nets::small_zoo()) {
        auto classes = oracles::enumerate_loop_classes(net, max_len);
        double partial = 0;
        for (const auto& [skel, w] : classes) partial += w;
        double total = total_loop_mass(net);

        const int k = net.interior_count();
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            int v = net.interior()[static_cast<size_t>(i)];
            for (auto [w, ei] : net.neighbors(v)) {
                int j = net.interior_index(w);
                if (j >= 0) p(i, j) += net.conductance(ei) / net.total_conductance(v);
            }
        }
        Eigen::MatrixXd tail_mat =
            (Eigen::MatrixXd::Identity(k, k) - p).inverse();
        for (int m = 0; m <= max_len; ++m) tail_mat = p * tail_mat;
        double tail = tail_mat.trace() / (max_len + 1);

        CHECK(partial <= total + 1e-9);
        CHECK(total - partial <= tail + 1e-9);
        CHECK(tail < 0.05);  // truncation is informative on every zoo network
    }
}

TEST_CASE("stage masses sum to the total loop mass") {
    for (const Network& net : nets::small_zoo()) {
        LoopSoupSampler sampler(net);
        double acc = 0;
        for (double m : sampler.stage_log_masses()) acc += m;
        CHECK(acc == doctest::Approx(total_loop_mass(net)).epsilon(1e-9));
    }
}

TEST_CASE("loop soup counts and skeleton frequencies match the measure") {
    Network net = nets::wheel();
    LoopSoupSampler sampler(net);
    const double alpha = 0.5;
    const long n = 100000;

    auto classes = oracles::enumerate_loop_classes(net, 8);
    std::map<std::vector<int>, long> hits;
    stats::MomentAcc count_acc;
    std::vector<long> counts;
    for (long r = 0; r < n; ++r) {
        RngStream rng(2024, static_cast<uint64_t>(r), 3);
        SoupSample soup = sampler.sample(alpha, rng);
        count_acc.add(static_cast<double>(soup.trajectories.size()));
        counts.push_back(static_cast<long>(soup.trajectories.size()));
        for (const auto& traj : soup.trajectories) {
            REQUIRE(traj.vertices.front() == traj.vertices.back());
            REQUIRE(traj.holding.back() == 0.0);
            std::vector<int> skel(traj.vertices.begin(), traj.vertices.end() - 1);
            if (static_cast<int>(skel.size()) <= 8) ++hits[oracles::canonical_loop(skel)];
        }
    }

    double mass = total_loop_mass(net);
    CHECK(std::fabs(count_acc.mean() - alpha * mass) <= 4 * count_acc.stderr_mean());
    // The count is Poisson with mean alpha * mass.
    CHECK(stats::poisson_chi2_pvalue(counts, alpha * mass) > 0.01);

    for (const auto& [skel, w] : classes) {
        double expected = alpha * w;
        double got = static_cast<double>(hits[skel]) / static_cast<double>(n);
        double se = std::sqrt(expected / static_cast<double>(n));  // Poisson counts
        CHECK(std::fabs(got - expected) <= 4 * se + 1e-12);
    }
    // No sampled short skeleton falls outside the enumeration.
    for (const auto& [skel, c] : hits) CHECK(classes.count(skel) == 1);
}

TEST_CASE("loop occupation reproduces the green diagonal") {
    Network net = nets::triangle();
    GreenTable g = green_function(net);
    LoopSoupSampler sampler(net);
    const double alpha = 0.7;
    const long n = 200000;
    stats::MomentAcc occ1;
    for (long r = 0; r < n; ++r) {
        RngStream rng(77, static_cast<uint64_t>(r), 4);
        SoupSample soup = sampler.sample(alpha, rng);
        occ1.add(occupation_field(soup, true).values[1]);
    }
    CHECK(std::fabs(occ1.mean() - alpha * g.at(net, 1, 1)) <= 4 * occ1.stderr_mean());
}

TEST_CASE("excursion process matches its intensity") {
    Network net = nets::diamond();
    ExcursionSampler sampler(net);
    BoundaryFunction u = harmonic_extension(net, {1.0, 0.5});
    Eigen::MatrixXd h = boundary_poisson_kernel(net);

    double mean = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            mean += 0.5 * u.boundary_values[static_cast<size_t>(i)] *
                    u.boundary_values[static_cast<size_t>(j)] * h(i, j);

    const long n = 100000;
    std::vector<long> counts;
    Eigen::MatrixXd pair_hits = Eigen::MatrixXd::Zero(2, 2);
    stats::MomentAcc occ1;
    for (long r = 0; r < n; ++r) {
        RngStream rng(5150, static_cast<uint64_t>(r), 5);
        SoupSample exc = sampler.sample(u, rng);
        counts.push_back(static_cast<long>(exc.trajectories.size()));
        for (const auto& traj : exc.trajectories) {
            REQUIRE(traj.vertices.size() >= 3);
            CHECK(net.is_boundary(traj.vertices.front()));
            CHECK(net.is_boundary(traj.vertices.back()));
            CHECK(traj.holding.front() == 0.0);
            CHECK(traj.holding.back() == 0.0);
            for (size_t i = 1; i + 1 < traj.vertices.size(); ++i)
                CHECK(!net.is_boundary(traj.vertices[i]));
            int bi = traj.vertices.front() == 0 ? 0 : 1;
            int bj = traj.vertices.back() == 0 ? 0 : 1;
            pair_hits(bi, bj) += 1.0;
        }
        occ1.add(occupation_field(exc, false).values[1]);
    }
    CHECK(stats::poisson_chi2_pvalue(counts, mean) > 0.01);

    // Ordered endpoint pair frequencies are proportional to u u H / 2.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double expected = 0.5 * u.boundary_values[static_cast<size_t>(i)] *
                              u.boundary_values[static_cast<size_t>(j)] * h(i, j);
            double got = pair_hits(i, j) / static_cast<double>(n);
            double se = std::sqrt(expected / static_cast<double>(n));
            CHECK(std::fabs(got - expected) <= 4 * se);
        }

    // Occupation mean: E[L_exc(x)] = u_ext(x)^2 / 2 at every interior vertex
    // (first moment of half the squared shifted field minus the loop part).
    double target = 0.5 * u.extension[1] * u.extension[1];
    CHECK(std::fabs(occ1.mean() - target) <= 4 * occ1.stderr_mean());
}

TEST_CASE("excursion skeleton law telescopes to the excursion measure") {
    // On P3 the only excursions through the single interior vertex are
    // x -> 1 -> y; with intensity u = (1, 1) each ordered pair carries mass
    // H(x,y)/2 = 1/4, and every skeleton has conditional probability 1.
    Network net = nets::p3();
    ExcursionSampler sampler(net);
    BoundaryFunction u = BoundaryFunction::constant(net, 1.0);
    const long n = 50000;
    long three_step = 0, total = 0;
    for (long r = 0; r < n; ++r) {
        RngStream rng(8, static_cast<uint64_t>(r), 6);
        SoupSample exc = sampler.sample(u, rng);
        for (const auto& traj : exc.trajectories) {
            ++total;
            if (traj.vertices.size() == 3 && traj.vertices[1] == 1) ++three_step;
        }
    }
    CHECK(total > 0);
    CHECK(three_step == total);
}

TEST_CASE("weighted excursion sampling validates and thins correctly") {
    Network net = nets::diamond();
    ExcursionSampler sampler(net);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(0, 0) = 1.0;  // only excursions from boundary 0 back to boundary 0
    RngStream rng(3, 0, 0);
    for (int r = 0; r < 2000; ++r) {
        SoupSample s = sampler.sample_weighted(w, rng);
        for (const auto& traj : s.trajectories) {
            CHECK(traj.vertices.front() == 0);
            CHECK(traj.vertices.back() == 0);
        }
    }
    Eigen::MatrixXd bad = Eigen::MatrixXd::Constant(2, 2, -1.0);
    CHECK_THROWS_AS(sampler.sample_weighted(bad, rng), std::invalid_argument);
    CHECK_THROWS_AS(sampler.sample_weighted(Eigen::MatrixXd::Zero(3, 3), rng),
                    std::invalid_argument);
}

TEST_CASE("projection of a refined soup is a base-network soup") {
    Network base = nets::triangle();
    RefinedNetwork ref = refine(base, 2);
    LoopSoupSampler sampler(ref.net());
    GreenTable g = green_function(base);
    const double alpha = 0.5;

    const long n = 50000;
    stats::MomentAcc occ1;
    for (long r = 0; r < n; ++r) {
        RngStream rng(66, static_cast<uint64_t>(r), 7);
        SoupSample fine = sampler.sample(alpha, rng);
        SoupSample coarse = project_to_network(ref, fine);

        // Occupation at base vertices is preserved by the time change.
        OccupationField of = occupation_field(fine, true);
        OccupationField oc = occupation_field(coarse, true);
        for (int v = 0; v < base.vertex_count(); ++v)
            CHECK(oc.values[static_cast<size_t>(v)] ==
                  doctest::Approx(of.values[static_cast<size_t>(v)]).epsilon(1e-9));

        for (const auto& traj : coarse.trajectories) {
            CHECK(traj.vertices.front() == traj.vertices.back());
            for (int v : traj.vertices) CHECK(v < base.vertex_count());
        }
        occ1.add(oc.values[1]);
    }
    // First moment matches the base-network green diagonal, so the projected
    // occupation has the base-soup law where it is measurable.
    CHECK(std::fabs(occ1.mean() - alpha * g.at(base, 1, 1)) <= 4 * occ1.stderr_mean());
}

TEST_CASE("hitting mass validation and exactness") {
    Network net = nets::chorded_path();
    BoundaryFunction u = BoundaryFunction::constant(net, 0.5);
    BoundaryFunction us = BoundaryFunction::constant(net, 1.5);

    CHECK_THROWS_WITH_AS(excursion_hitting_mass(net, us, u, {}, {}),
                         doctest::Contains("u <= u_star"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(excursion_hitting_mass(net, u, us, {0}, {}),
                         doctest::Contains("interior"), std::invalid_argument);

    // Empty cut has zero mass; cutting everything leaves the full difference
    // intensity.
    CHECK(excursion_hitting_mass(net, u, us, {}, {}) == doctest::Approx(0.0).epsilon(1e-12));
    Eigen::MatrixXd h = boundary_poisson_kernel(net);
    double full = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            full += 0.5 * (1.5 * 1.5 - 0.5 * 0.5) * h(i, j);
    CHECK(excursion_hitting_mass(net, u, us, {1, 2, 3}, {}) ==
          doctest::Approx(full).epsilon(1e-10));

    // Monte Carlo check of the void probability against the exact mass.
    std::vector<int> cut_edges = {net.edge_between(1, 2), net.edge_between(1, 3)};
    double mass = excursion_hitting_mass(net, u, us, {}, cut_edges);
    ExcursionSampler sampler(net);
    Eigen::MatrixXd w(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) w(i, j) = 1.5 * 1.5 - 0.5 * 0.5;
    std::set<int> cut(cut_edges.begin(), cut_edges.end());
    const long n = 200000;
    long misses = 0;
    for (long r = 0; r < n; ++r) {
        RngStream rng(404, static_cast<uint64_t>(r), 8);
        SoupSample s = sampler.sample_weighted(w, rng);
        bool hit = false;
        for (const auto& traj : s.trajectories)
            for (size_t i = 0; i + 1 < traj.vertices.size() && !hit; ++i)
                hit = cut.count(net.edge_between(traj.vertices[i], traj.vertices[i + 1])) > 0;
        if (!hit) ++misses;
    }
    double p = static_cast<double>(misses) / n;
    double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::fabs(p - std::exp(-mass)) <= 4 * se);
}
