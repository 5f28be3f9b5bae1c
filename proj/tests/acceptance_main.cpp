// End-to-end acceptance suite: one line per criterion, nonzero exit when any
// hard criterion fails. Soft criteria (stability studies) are reported only.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gfflab/clusters.hpp"
#include "gfflab/fps.hpp"
#include "gfflab/gff.hpp"
#include "gfflab/network.hpp"
#include "gfflab/parallel.hpp"
#include "gfflab/rng.hpp"
#include "gfflab/soups.hpp"
#include "gfflab/stats.hpp"
#include "gfflab/verify.hpp"
#include "nets.hpp"
#include "oracles.hpp"

using namespace gfflab;

namespace {

int g_failures = 0;

void line(const char* id, bool ok, const char* what, bool soft = false) {
    if (!ok && !soft) ++g_failures;
    std::printf("%-5s %-4s %s%s\n", id, ok ? "pass" : "FAIL", what, soft ? " [soft]" : "");
    std::fflush(stdout);
}

RunParams params(long replicas, uint64_t seed) {
    RunParams p;
    p.replicas = replicas;
    p.seed = seed;
    return p;
}

BoundaryFunction arc_boundary(const Network& net, double b1_value, double b2_value) {
    const auto* b1 = net.arc("B1");
    std::vector<char> in_b1(static_cast<size_t>(net.vertex_count()), 0);
    if (b1)
        for (int v : *b1) in_b1[static_cast<size_t>(v)] = 1;
    std::vector<double> vals;
    for (int v : net.boundary()) vals.push_back(in_b1[static_cast<size_t>(v)] ? b1_value : b2_value);
    return harmonic_extension(net, vals);
}

// A-1: with zero boundary data the assembled signed field at the single
// interior vertex of the 3-path is a centered Gaussian of variance G(1,1)=1/2.
void a1() {
    Network net = nets::p3();
    BoundaryFunction u0 = BoundaryFunction::constant(net, 0.0);
    const long n = 100000;
    struct Part {
        std::vector<double> vals;
    };
    LoopSoupSampler ls(net);
    ExcursionSampler es(net);
    auto parts = run_chunked<Part>(n, default_workers(), 512, [&](long lo, long hi, Part& part) {
        for (long r = lo; r < hi; ++r) {
            RngStream rng(101, static_cast<uint64_t>(r), 0xAC01);
            SoupSample soup = ls.sample(0.5, rng);
            SoupSample exc = es.sample(u0, rng);
            FieldSample f = assemble_field(soup, exc, rng);
            part.vals.push_back(f.values[1]);
        }
    });
    std::vector<double> vals;
    vals.reserve(static_cast<size_t>(n));
    for (auto& part : parts) vals.insert(vals.end(), part.vals.begin(), part.vals.end());
    double p = stats::ks_test(vals, [](double x) { return stats::normal_cdf(x / std::sqrt(0.5)); });
    line("A-1", p > 0.001, "assembled signed field has the Gaussian free field law");
}

void a2() {
    Network net = grid_network(5, 5);
    TestReport rep =
        test_isomorphism_discrete(net, BoundaryFunction::constant(net, 1.0), params(100000, 102));
    line("A-2", rep.passed(), "soup occupation matches half the squared shifted field");
}

void a3() {
    Network p3 = nets::p3();
    bool ok = test_cluster_fps_identity(p3, BoundaryFunction::constant(p3, 1.0), 0,
                                        params(10000, 103))
                  .passed();
    Network grid = grid_network(9, 9);
    ok = ok && test_cluster_fps_identity(grid, BoundaryFunction::constant(grid, 0.5), 1,
                                         params(1000, 104))
                   .passed();
    line("A-3", ok, "level-0 flood equals the excursion cluster union, per sample");
}

// A-4: loop-soup statistics on the one-interior-pair triangle against the
// exhaustive loop-class enumeration.
void a4() {
    Network net = nets::triangle();
    const double alpha = 0.5;
    const long n = 100000;
    auto classes = oracles::enumerate_loop_classes(net, 8);

    stats::MomentAcc count_acc;
    std::map<std::vector<int>, long> hits;
    for (long r = 0; r < n; ++r) {
        RngStream rng(105, static_cast<uint64_t>(r), 0xAC04);
        SoupSample soup = sample_loop_soup(net, alpha, rng);
        count_acc.add(static_cast<double>(soup.trajectories.size()));
        for (const auto& t : soup.trajectories) {
            std::vector<int> skel(t.vertices.begin(), t.vertices.end() - 1);
            if (static_cast<int>(skel.size()) <= 8) ++hits[oracles::canonical_loop(skel)];
        }
    }
    double target = alpha * std::log(4.0 / 3.0);
    bool ok = std::fabs(count_acc.mean() - target) <= 4 * count_acc.stderr_mean();
    for (const auto& [key, mu] : classes) {
        double lam = alpha * mu * n;  // Poisson counts: SE = sqrt(lambda)
        double got = static_cast<double>(hits.count(key) ? hits.at(key) : 0);
        ok = ok && std::fabs(got - lam) <= 4.0 * std::sqrt(lam) + 4.0;
    }
    // No sampled short class outside the enumerated list.
    for (const auto& [key, got] : hits) ok = ok && classes.count(key) > 0;
    line("A-4", ok, "loop soup reproduces the exact loop-measure class weights");
}

void a5() {
    bool ok = true;
    for (const Network& net : nets::small_zoo()) {
        Eigen::MatrixXd h = boundary_poisson_kernel(net);
        for (int x = 0; x < net.boundary_count(); ++x)
            for (int y = 0; y < net.boundary_count(); ++y) {
                auto ref = oracles::h_path_enumeration(net, x, y);
                ok = ok && std::fabs(h(x, y) - ref.value) <= ref.bound + 1e-12;
            }
    }
    line("A-5", ok, "boundary kernel matches path enumeration within rigorous bounds");
}

void a6() {
    Network net = grid_network(5, 5);
    RngStream rng(106, 0, 0xAC06);
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> bvals;
        for (int b = 0; b < net.boundary_count(); ++b) bvals.push_back(0.2 + rng.uniform01());
        BoundaryFunction u = harmonic_extension(net, bvals);
        Network scaled = rescale_conductances(net, u);
        std::vector<double> f(static_cast<size_t>(net.vertex_count()));
        for (auto& x : f) x = rng.normal();
        for (int b : net.boundary()) f[static_cast<size_t>(b)] = 0.0;
        std::vector<double> uf = f;
        for (int v = 0; v < net.vertex_count(); ++v)
            uf[static_cast<size_t>(v)] *= u.extension[static_cast<size_t>(v)];
        double lhs = dirichlet_energy(scaled, f);
        double rhs = dirichlet_energy(net, uf);
        ok = ok && std::fabs(lhs - rhs) <= 1e-10 * std::max(1.0, std::fabs(rhs));
    }
    line("A-6", ok, "conductance rescaling preserves the weighted Dirichlet energy");
}

void a7() {
    Network p3 = nets::p3();
    TestReport r1 = test_wick_moments(p3, BoundaryFunction::constant(p3, 0.0), {{0.0, 1.0, 0.0}},
                                      params(200000, 107));
    bool ok = r1.passed();
    for (const auto& c : r1.checks)
        if (c.statistic.rfind("variance", 0) == 0) ok = ok && std::fabs(c.target - 0.125) < 1e-12;

    Network grid = grid_network(8, 8);
    RngStream frng(107, 0, 0x53);
    std::vector<std::vector<double>> fns;
    for (int q = 0; q < 3; ++q) {
        std::vector<double> f(static_cast<size_t>(grid.vertex_count()), 0.0);
        for (int v : grid.interior()) f[static_cast<size_t>(v)] = frng.uniform01();
        fns.push_back(std::move(f));
    }
    ok = ok &&
         test_wick_moments(grid, BoundaryFunction::constant(grid, 1.0), fns, params(30000, 108))
             .passed();
    line("A-7", ok, "occupation mean and variance match the exact Green formulas");
}

void a8() {
    Network net = nets::p3();
    TestReport rep = test_massive_reweighting(net, {1.0}, params(200000, 109));
    bool ok = rep.passed();
    for (const auto& c : rep.checks)
        if (c.statistic.rfind("cov", 0) == 0) ok = ok && std::fabs(c.target - 1.0 / 3.0) < 1e-12;
    line("A-8", ok, "importance reweighting recovers the massive covariance");
}

void a9() {
    Network net = grid_network(5, 5);
    BoundaryFunction u0 = BoundaryFunction::constant(net, 0.0);
    const std::vector<double> grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
    const long n = 10000;
    struct Part {
        long bad = 0;
    };
    auto parts = run_chunked<Part>(n, default_workers(), 256, [&](long lo, long hi, Part& part) {
        for (long r = lo; r < hi; ++r) {
            RngStream rng(110, static_cast<uint64_t>(r), 0xAC09);
            FieldSample f = sample_discrete_gff(net, u0, rng);
            MetricSubset prev;
            bool have = false;
            for (double a : grid) {
                MetricSubset cur = first_passage_set(f, a, true);
                if (have) {
                    for (size_t v = 0; v < prev.vertices.size(); ++v)
                        if (prev.vertices[v] && !cur.vertices[v]) ++part.bad;
                    for (size_t e = 0; e < prev.edges.size(); ++e)
                        if (prev.edges[e] && !cur.edges[e]) ++part.bad;
                }
                prev = std::move(cur);
                have = true;
            }
        }
    });
    long bad = 0;
    for (auto& part : parts) bad += part.bad;
    line("A-9", bad == 0, "coupled floods are nested across levels in every sample");
}

void a10() {
    auto mc = oracles::bridge_min_mc(1.0, 1.0, 1.0, 300000, 1024, 111, default_workers());
    double target = bridge_min_above(1.0, 1.0, 1.0, 0.0);
    bool ok = std::fabs(mc.estimate - target) <= 3.5 * mc.stderror;

    Network base = nets::p3();
    RefinedNetwork ref = refine(base, 1);
    GreenTable gb = green_function(base);
    GreenTable gf = green_function(ref.net());
    for (int e = 0; e < base.edge_count(); ++e) {
        const auto& chain = ref.chain(e);
        int a = chain.front(), b = chain.back(), mid = chain[chain.size() / 2];
        double gaa = base.is_boundary(a) ? 0.0 : gb.at(base, a, a);
        double gbb = base.is_boundary(b) ? 0.0 : gb.at(base, b, b);
        double gab = (base.is_boundary(a) || base.is_boundary(b)) ? 0.0 : gb.at(base, a, b);
        double expected = 1.0 / (4.0 * base.conductance(e)) + 0.25 * (gaa + gbb + 2.0 * gab);
        ok = ok && std::fabs(gf.at(ref.net(), mid, mid) - expected) <= 1e-10;
    }
    line("A-10", ok, "edge-bridge law matches the crossing formula and refined variance");
}

void a11() {
    Network net = grid_network(12, 12, 'x');
    BoundaryFunction u = arc_boundary(net, kLambda, -kLambda);
    BoundaryFunction us = arc_boundary(net, 2.0 * kLambda, -kLambda);
    TestReport rep = level_line_coupling(net, u, us, 200, 500, params(200, 112));
    line("A-11", rep.passed(), "interface miss probability matches the exact excursion mass");
}

void a12() {
    auto [prows, prep] =
        percolation_curve({8, 16, 32}, 0.5,
                          {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}, params(400, 113));
    DomainSpec d;
    d.kind = DomainSpec::Kind::square;
    d.size = 1.0;
    d.split_axis = 'x';
    auto [irows, irep] = interface_refinement_study(d, {3, 4, 5}, params(60, 114));
    bool ok = prep.passed() && irep.passed();
    for (const auto& rep : {prep, irep})
        for (const auto& c : rep.checks)
            if (c.soft)
                std::printf("      study %-40s value %.6g target %.6g\n", c.statistic.c_str(),
                            c.value, c.target);
    line("A-12", ok, "crossing-curve and interface scaling studies completed", /*soft=*/true);
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    a1();
    a2();
    a3();
    a4();
    a5();
    a6();
    a7();
    a8();
    a9();
    a10();
    a11();
    a12();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("acceptance: %s (%d hard failure%s, %.1fs)\n", g_failures == 0 ? "PASS" : "FAIL",
                g_failures, g_failures == 1 ? "" : "s", secs);
    return g_failures == 0 ? 0 : 1;
}
