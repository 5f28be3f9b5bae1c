#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "gfflab/gff.hpp"
#include "gfflab/network.hpp"
#include "gfflab/rng.hpp"

namespace gfflab {

// Compact subset of a (refined) metric graph at working resolution: included
// vertices plus fully-included edge segments.
struct MetricSubset {
    const Network* net = nullptr;
    std::vector<char> vertices;  // size vertex_count
    std::vector<char> edges;     // size edge_count

    bool operator==(const MetricSubset& o) const {
        return vertices == o.vertices && edges == o.edges;
    }
    long vertex_size() const;
    long edge_size() const;
};

// One cached uniform per edge, derived from the field's stream key. Queries
// at different levels a reuse the same uniform, so edge passability is
// monotone in a by construction.
class BridgeGate {
public:
    explicit BridgeGate(uint64_t field_key);
    double uniform_for(int edge_index) const;

private:
    uint64_t base_key_;
};

// Flood of the sub-level-set complement from the boundary: every point
// connected to the boundary by a path on which the field stays >= -a.
// With exact_edges, an edge with both endpoints above the level passes only
// if its gate uniform is below the bridge-minimum probability; otherwise the
// endpoint test alone decides. Fields carrying an edge_support mask treat
// unsupported edges as having an interior zero.
MetricSubset first_passage_set(const FieldSample& field, double a, bool exact_edges = false,
                               const BridgeGate* gate = nullptr);

// Points connected to the boundary with the field staying <= b; implemented
// as the flood of the negated field at the same level with an independent
// gate.
MetricSubset upper_fps(const FieldSample& field, double b, bool exact_edges = false);

// Dirichlet solve off the set: -a - u(x) on non-boundary frontier vertices of
// the set, 0 on boundary vertices; harmonic elsewhere.
std::vector<double> complement_harmonic(const Network& net, const MetricSubset& fps,
                                        const BoundaryFunction& u, double a);

// Dual-lattice path separating the two named boundary arcs. Faces are lattice
// cells identified by their lower-left corner coordinate.
struct InterfaceCurve {
    std::vector<std::array<int, 2>> faces;  // ordered, endpoints = marked faces

    // Primal edge crossed between consecutive faces k and k+1, as a vertex
    // coordinate pair.
    static std::pair<std::array<int, 2>, std::array<int, 2>> crossed_primal(
        const std::array<int, 2>& f1, const std::array<int, 2>& f2);
};

// Trace the separating dual path of a first-passage set on a lattice network
// with two named arcs B1 (wet side) and B2: cut edges are adjacencies between
// the B1-connected part of the set and the B2-connected part of the
// complement; the returned path runs between the two marked faces.
InterfaceCurve extract_interface(const Network& net, const MetricSubset& fps);

// Indices of primal edges crossed by the curve (edges of `net`).
std::vector<int> crossed_edges(const Network& net, const InterfaceCurve& curve);

void write_subset_json(std::ostream& os, const MetricSubset& s);
void write_interface_csv(std::ostream& os, const InterfaceCurve& curve);
void render_svg(std::ostream& os, const Network& net, const MetricSubset* fps,
                const InterfaceCurve* curve, bool deterministic);

}  // namespace gfflab
