#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gfflab/clusters.hpp"
#include "gfflab/stats.hpp"
#include "nets.hpp"

using namespace gfflab;

namespace {

Trajectory loop_at(std::vector<int> verts, double hold = 0.5) {
    Trajectory t;
    t.kind = TrajKind::loop;
    t.vertices = std::move(verts);
    t.holding.assign(t.vertices.size(), hold);
    t.holding.back() = 0.0;
    return t;
}

Trajectory excursion_through(std::vector<int> verts, double hold = 0.5) {
    Trajectory t;
    t.kind = TrajKind::excursion;
    t.vertices = std::move(verts);
    t.holding.assign(t.vertices.size(), hold);
    t.holding.front() = 0.0;
    t.holding.back() = 0.0;
    return t;
}

}  // namespace

TEST_CASE("clusters form by shared vertices") {
    Network net = grid_network(5, 5);
    auto vid = [&](int x, int y) {
        for (int v = 0; v < net.vertex_count(); ++v)
            if (net.lattice_coord(v)[0] == x && net.lattice_coord(v)[1] == y) return v;
        FAIL("no such vertex");
        return -1;
    };

    SoupSample soup;
    soup.net = &net;
    soup.alpha = 0.5;
    soup.trivial_field.assign(static_cast<size_t>(net.vertex_count()), 0.0);
    int a = vid(1, 1), b = vid(2, 1), c = vid(3, 3), d = vid(3, 2), e = vid(2, 2);
    soup.trajectories.push_back(loop_at({a, b, a}));  // cluster with the excursion via b
    soup.trajectories.push_back(loop_at({c, d, c}));  // separate loop-only cluster

    SoupSample exc;
    exc.net = &net;
    exc.u = BoundaryFunction::constant(net, 1.0);
    exc.trivial_field.assign(static_cast<size_t>(net.vertex_count()), 0.0);
    exc.trajectories.push_back(excursion_through({vid(2, 0), b, e, vid(2, 3), vid(2, 4)}));

    ClusterPartition parts = build_clusters(soup, exc);
    CHECK(parts.cluster_count == 2);
    CHECK(parts.traj_cluster[0] == parts.traj_cluster[2]);  // loop 0 joins the excursion
    CHECK(parts.traj_cluster[1] != parts.traj_cluster[0]);
    CHECK(parts.has_excursion[static_cast<size_t>(parts.traj_cluster[0])] == 1);
    CHECK(parts.has_excursion[static_cast<size_t>(parts.traj_cluster[1])] == 0);
    CHECK(parts.vertex_cluster[static_cast<size_t>(e)] == parts.traj_cluster[2]);
    CHECK(parts.vertex_cluster[static_cast<size_t>(c)] == parts.traj_cluster[1]);

    MetricSubset un = excursion_cluster_union(parts);
    CHECK(un.vertices[static_cast<size_t>(a)] == 1);
    CHECK(un.vertices[static_cast<size_t>(e)] == 1);
    CHECK(un.vertices[static_cast<size_t>(c)] == 0);  // excursion-free cluster
    for (int bd : net.boundary()) CHECK(un.vertices[static_cast<size_t>(bd)] == 1);
    CHECK(un.edges[static_cast<size_t>(net.edge_between(a, b))] == 1);
    CHECK(un.edges[static_cast<size_t>(net.edge_between(c, d))] == 0);
}

TEST_CASE("assembled field is the signed square root of the occupation") {
    Network net = nets::triangle();
    LoopSoupSampler ls(net);
    ExcursionSampler es(net);
    BoundaryFunction u = BoundaryFunction::constant(net, 1.0);

    for (long r = 0; r < 2000; ++r) {
        RngStream rng(808, static_cast<uint64_t>(r), 1);
        SoupSample soup = ls.sample(0.5, rng);
        SoupSample exc = es.sample(u, rng);
        FieldSample f = assemble_field(soup, exc, rng);

        OccupationField occ = occupation_field(soup, true);
        OccupationField eo = occupation_field(exc, false);
        CHECK(f.values[0] == doctest::Approx(1.0));  // boundary pinned to u
        for (int v : net.interior()) {
            double total = occ.values[static_cast<size_t>(v)] + eo.values[static_cast<size_t>(v)];
            CHECK(std::fabs(f.values[static_cast<size_t>(v)]) ==
                  doctest::Approx(std::sqrt(2.0 * total)).epsilon(1e-12));
        }
        // Vertices of excursion clusters carry the positive sign.
        ClusterPartition parts = build_clusters(soup, exc);
        for (int v : net.interior()) {
            int c = parts.vertex_cluster[static_cast<size_t>(v)];
            if (c >= 0 && parts.has_excursion[static_cast<size_t>(c)])
                CHECK(f.values[static_cast<size_t>(v)] >= 0.0);
        }
        // Traversed edges are exactly the supported ones.
        REQUIRE(f.edge_support.size() == static_cast<size_t>(net.edge_count()));
        for (int e = 0; e < net.edge_count(); ++e)
            CHECK((f.edge_support[static_cast<size_t>(e)] == 1) ==
                  (parts.edge_cluster[static_cast<size_t>(e)] >= 0));
    }
}

TEST_CASE("assembly is restricted to intensity one half") {
    Network net = nets::triangle();
    RngStream rng(1, 0, 0);
    SoupSample soup = sample_loop_soup(net, 0.7, rng);
    SoupSample exc = sample_excursion_ppp(net, BoundaryFunction::constant(net, 1.0), rng);
    CHECK_THROWS_WITH_AS(assemble_field(soup, exc, rng),
                         doctest::Contains("alpha = 1/2"), std::invalid_argument);
}

TEST_CASE("sign coins are fair on loop-only clusters") {
    Network net = nets::triangle();
    LoopSoupSampler ls(net);
    ExcursionSampler es(net);
    BoundaryFunction u0 = BoundaryFunction::constant(net, 0.0);

    stats::MomentAcc sign1;
    for (long r = 0; r < 50000; ++r) {
        RngStream rng(909, static_cast<uint64_t>(r), 2);
        SoupSample soup = ls.sample(0.5, rng);
        SoupSample exc = es.sample(u0, rng);  // empty: every cluster gets a coin
        FieldSample f = assemble_field(soup, exc, rng);
        if (f.values[1] != 0.0) sign1.add(f.values[1] > 0 ? 1.0 : 0.0);
    }
    CHECK(std::fabs(sign1.mean() - 0.5) <= 4 * sign1.stderr_mean());
}

TEST_CASE("cluster csv dump") {
    Network net = nets::triangle();
    RngStream rng(3, 1, 1);
    SoupSample soup = sample_loop_soup(net, 0.5, rng);
    SoupSample exc = sample_excursion_ppp(net, BoundaryFunction::constant(net, 1.0), rng);
    ClusterPartition parts = build_clusters(soup, exc);
    std::ostringstream os;
    write_clusters_csv(os, parts);
    CHECK(os.str().rfind("cluster_id,trajectory_id\n", 0) == 0);
}
