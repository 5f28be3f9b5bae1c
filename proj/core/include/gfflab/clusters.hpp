#pragma once

#include <ostream>
#include <vector>

#include "gfflab/fps.hpp"
#include "gfflab/soups.hpp"

namespace gfflab {

// Partition of a trajectory collection into intersection clusters. Two
// trajectories are clustered together when linked by a chain of pairwise
// vertex-sharing trajectories; footprints of distinct clusters are therefore
// vertex-disjoint, which lets the footprint live in flat per-vertex and
// per-edge tables.
struct ClusterPartition {
    const Network* net = nullptr;
    int cluster_count = 0;
    std::vector<int> traj_cluster;    // loop-soup trajectories first, then excursions
    std::vector<int> vertex_cluster;  // per vertex id, -1 when unvisited
    std::vector<int> edge_cluster;    // per edge id, -1 when untraversed
    std::vector<char> has_excursion;  // per cluster
};

ClusterPartition build_clusters(const SoupSample& soup, const SoupSample& exc);

// Union of footprints of clusters containing at least one excursion, plus all
// boundary vertices.
MetricSubset excursion_cluster_union(const ClusterPartition& partition);

// The signed square-root field of the occupation: value sigma(x) sqrt(2 L(x))
// with sigma = +1 on excursion clusters and an independent fair sign on every
// other cluster and on each vertex carrying only trivial-loop occupation.
// Requires intensity 1/2. The returned sample carries an edge_support mask
// marking traversed edges.
FieldSample assemble_field(const SoupSample& soup, const SoupSample& exc, RngStream& rng);

// CSV dump: cluster_id,trajectory_id.
void write_clusters_csv(std::ostream& os, const ClusterPartition& partition);

}  // namespace gfflab
