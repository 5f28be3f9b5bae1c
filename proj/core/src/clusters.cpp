#include "gfflab/clusters.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gfflab {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] =
                parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
    }
};

}  // namespace

ClusterPartition build_clusters(const SoupSample& soup, const SoupSample& exc) {
    if (soup.net != exc.net)
        throw std::invalid_argument("soups live on different networks");
    const Network& net = *soup.net;
    const int nloops = static_cast<int>(soup.trajectories.size());
    const int ntraj = nloops + static_cast<int>(exc.trajectories.size());

    auto traj_at = [&](int t) -> const Trajectory& {
        return t < nloops ? soup.trajectories[static_cast<size_t>(t)]
                          : exc.trajectories[static_cast<size_t>(t - nloops)];
    };

    UnionFind uf(ntraj);
    std::vector<int> vertex_owner(static_cast<size_t>(net.vertex_count()), -1);
    for (int t = 0; t < ntraj; ++t)
        for (int v : traj_at(t).vertices) {
            int& owner = vertex_owner[static_cast<size_t>(v)];
            if (owner < 0)
                owner = t;
            else
                uf.unite(owner, t);
        }

    ClusterPartition out;
    out.net = &net;
    out.traj_cluster.assign(static_cast<size_t>(ntraj), -1);
    out.vertex_cluster.assign(static_cast<size_t>(net.vertex_count()), -1);
    out.edge_cluster.assign(static_cast<size_t>(net.edge_count()), -1);

    // Compact cluster ids in order of the smallest member trajectory.
    std::vector<int> root_to_cluster(static_cast<size_t>(ntraj), -1);
    for (int t = 0; t < ntraj; ++t) {
        int r = uf.find(t);
        if (root_to_cluster[static_cast<size_t>(r)] < 0) {
            root_to_cluster[static_cast<size_t>(r)] = out.cluster_count++;
            out.has_excursion.push_back(0);
        }
        int c = root_to_cluster[static_cast<size_t>(r)];
        out.traj_cluster[static_cast<size_t>(t)] = c;
        if (traj_at(t).kind == TrajKind::excursion) out.has_excursion[static_cast<size_t>(c)] = 1;
    }

    for (int t = 0; t < ntraj; ++t) {
        int c = out.traj_cluster[static_cast<size_t>(t)];
        const Trajectory& traj = traj_at(t);
        for (size_t i = 0; i < traj.vertices.size(); ++i) {
            out.vertex_cluster[static_cast<size_t>(traj.vertices[i])] = c;
            if (i + 1 < traj.vertices.size()) {
                int ei = net.edge_between(traj.vertices[i], traj.vertices[i + 1]);
                if (ei < 0) throw std::logic_error("trajectory steps between non-adjacent vertices");
                out.edge_cluster[static_cast<size_t>(ei)] = c;
            }
        }
    }
    return out;
}

MetricSubset excursion_cluster_union(const ClusterPartition& partition) {
    const Network& net = *partition.net;
    MetricSubset out;
    out.net = &net;
    out.vertices.assign(static_cast<size_t>(net.vertex_count()), 0);
    out.edges.assign(static_cast<size_t>(net.edge_count()), 0);
    for (int v = 0; v < net.vertex_count(); ++v) {
        int c = partition.vertex_cluster[static_cast<size_t>(v)];
        if (c >= 0 && partition.has_excursion[static_cast<size_t>(c)])
            out.vertices[static_cast<size_t>(v)] = 1;
    }
    for (int b : net.boundary()) out.vertices[static_cast<size_t>(b)] = 1;
    for (int e = 0; e < net.edge_count(); ++e) {
        int c = partition.edge_cluster[static_cast<size_t>(e)];
        if (c >= 0 && partition.has_excursion[static_cast<size_t>(c)])
            out.edges[static_cast<size_t>(e)] = 1;
    }
    return out;
}

FieldSample assemble_field(const SoupSample& soup, const SoupSample& exc, RngStream& rng) {
    if (std::fabs(soup.alpha - 0.5) > 1e-12)
        throw std::invalid_argument("signed isomorphism stated only at alpha = 1/2");
    for (double v : exc.u.boundary_values)
        if (v < 0) throw std::invalid_argument("assembly requires nonnegative boundary values");

    const Network& net = *soup.net;
    ClusterPartition partition = build_clusters(soup, exc);

    OccupationField occ = occupation_field(soup, /*include_trivial=*/true);
    OccupationField eocc = occupation_field(exc, /*include_trivial=*/false);
    for (size_t i = 0; i < occ.values.size(); ++i) occ.values[i] += eocc.values[i];

    std::vector<double> sign(static_cast<size_t>(partition.cluster_count), 1.0);
    for (int c = 0; c < partition.cluster_count; ++c)
        if (!partition.has_excursion[static_cast<size_t>(c)])
            sign[static_cast<size_t>(c)] = rng.uniform01() < 0.5 ? 1.0 : -1.0;

    FieldSample out;
    out.net = &net;
    out.u = exc.u;
    out.stream_key = rng.key();
    out.values.assign(static_cast<size_t>(net.vertex_count()), 0.0);
    out.edge_support.assign(static_cast<size_t>(net.edge_count()), 0);
    for (int e = 0; e < net.edge_count(); ++e)
        if (partition.edge_cluster[static_cast<size_t>(e)] >= 0)
            out.edge_support[static_cast<size_t>(e)] = 1;

    for (int v = 0; v < net.vertex_count(); ++v) {
        if (net.is_boundary(v)) {
            out.values[static_cast<size_t>(v)] = exc.u.extension.empty()
                                                     ? 0.0
                                                     : exc.u.extension[static_cast<size_t>(v)];
            continue;
        }
        double occ_v = occ.values[static_cast<size_t>(v)];
        int c = partition.vertex_cluster[static_cast<size_t>(v)];
        double s;
        if (c >= 0)
            s = sign[static_cast<size_t>(c)];
        else if (occ_v > 0)
            s = rng.uniform01() < 0.5 ? 1.0 : -1.0;  // trivial occupation only
        else {
            out.values[static_cast<size_t>(v)] = 0.0;
            continue;
        }
        out.values[static_cast<size_t>(v)] = s * std::sqrt(2.0 * occ_v);
    }
    return out;
}

void write_clusters_csv(std::ostream& os, const ClusterPartition& partition) {
    os << "cluster_id,trajectory_id\n";
    for (size_t t = 0; t < partition.traj_cluster.size(); ++t)
        os << partition.traj_cluster[t] << ',' << t << '\n';
}

}  // namespace gfflab
