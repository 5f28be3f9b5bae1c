#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <vector>

#include "gfflab/network.hpp"
#include "gfflab/rng.hpp"

namespace gfflab {

// Height of the level-line boundary condition, sqrt(pi/8) ~ 0.6266570687.
inline const double kLambda = std::sqrt(std::numbers::pi / 8.0);

// One realization of a field on a (possibly refined) network.
struct FieldSample {
    const Network* net = nullptr;
    std::vector<double> values;  // every vertex; boundary entries equal u exactly
    BoundaryFunction u;
    uint64_t stream_key = 0;

    // Optional per-edge support mask used by the first-passage flood: when
    // nonempty, an edge with support=false is treated as having an interior
    // zero (its minimum over the edge-line is 0 rather than the endpoint
    // interpolation). Fields assembled from trajectory collections mark
    // untraversed edges this way; fields sampled directly leave it empty.
    std::vector<char> edge_support;
};

// Zero-boundary-condition Gaussian field plus the harmonic extension of u.
FieldSample sample_discrete_gff(const Network& net, const BoundaryFunction& u, RngStream& rng);

// P(min of a Brownian bridge from alpha to beta over duration R stays > m).
double bridge_min_above(double alpha, double beta, double resistance, double level);

// Conditionally-independent bridge interpolation of a base-network field onto
// a dyadic refinement. Base-vertex values are unchanged; midpoints are drawn
// recursively with variance R/4 for a segment of resistance R. Sub-draws are
// keyed by (edge, dyadic position), so interpolations at levels m and m+1 of
// the same base field agree on shared points.
FieldSample interpolate_field(const RefinedNetwork& refined, const FieldSample& base_field,
                              RngStream& rng);

struct MarkovParts {
    std::vector<double> harmonic;  // equals field on A, harmonic off A
    std::vector<double> residual;  // field - harmonic; vanishes on A
};

// Decomposition of a field across a vertex set A containing the boundary.
MarkovParts markov_decompose(const Network& net, const FieldSample& field,
                             const std::vector<char>& in_A);

// CSV dump: vertex_id,x,y,value (x,y blank when the network has no positions).
void write_field_csv(std::ostream& os, const FieldSample& field);

}  // namespace gfflab
