#include "gfflab/gff.hpp"

#include <cmath>
#include <stdexcept>

namespace gfflab {

namespace {
constexpr uint64_t kSaltEdge = 0xEDBE5A17u;
}

FieldSample sample_discrete_gff(const Network& net, const BoundaryFunction& u, RngStream& rng) {
    if (u.extension.size() != static_cast<size_t>(net.vertex_count()))
        throw std::invalid_argument("boundary function does not match network");
    const int k = net.interior_count();
    Eigen::VectorXd z(k);
    for (int i = 0; i < k; ++i) z(i) = rng.normal();
    Eigen::VectorXd phi = net.colored_sample(z);

    FieldSample out;
    out.net = &net;
    out.u = u;
    out.stream_key = rng.key();
    out.values = u.extension;
    for (int i = 0; i < k; ++i)
        out.values[static_cast<size_t>(net.interior()[static_cast<size_t>(i)])] += phi(i);
    return out;
}

double bridge_min_above(double alpha, double beta, double resistance, double level) {
    if (!(resistance > 0)) throw std::invalid_argument("bridge needs positive duration");
    if (alpha <= level || beta <= level) return 0.0;
    return 1.0 - std::exp(-2.0 * (alpha - level) * (beta - level) / resistance);
}

namespace {

// Recursive midpoint fill over chain positions [lo, hi] (values at lo and hi
// already set). Positions are indexed along the sub-vertex chain of one base
// edge; the substream for a midpoint depends only on its dyadic position, so
// coarser interpolations are restrictions of finer ones.
void fill_bridge(std::vector<double>& vals, const std::vector<int>& chain, int lo, int hi,
                 double seg_resistance, const RngStream& edge_stream) {
    if (hi - lo < 2) return;
    int mid = (lo + hi) / 2;
    double a = vals[static_cast<size_t>(chain[static_cast<size_t>(lo)])];
    double b = vals[static_cast<size_t>(chain[static_cast<size_t>(hi)])];
    // Salt by the reduced dyadic position mid/(chain length - 1), not the raw
    // chain index, so the same point gets the same draw at every level.
    uint64_t num = static_cast<uint64_t>(mid);
    uint64_t den = static_cast<uint64_t>(chain.size()) - 1;
    while ((num & 1) == 0 && den > 1) {
        num >>= 1;
        den >>= 1;
    }
    RngStream s = edge_stream.fork(RngStream::mix(num, den));
    vals[static_cast<size_t>(chain[static_cast<size_t>(mid)])] =
        s.normal(0.5 * (a + b), std::sqrt(seg_resistance / 4.0));
    fill_bridge(vals, chain, lo, mid, seg_resistance / 2.0, edge_stream);
    fill_bridge(vals, chain, mid, hi, seg_resistance / 2.0, edge_stream);
}

}  // namespace

FieldSample interpolate_field(const RefinedNetwork& refined, const FieldSample& base_field,
                              RngStream& rng) {
    const Network& base = refined.base();
    if (base_field.values.size() != static_cast<size_t>(base.vertex_count()))
        throw std::invalid_argument("field does not live on the refinement's base network");

    FieldSample out;
    out.net = &refined.net();
    out.stream_key = rng.key();
    out.u = base_field.u;  // same boundary vertices, same indexing
    out.values.assign(static_cast<size_t>(refined.net().vertex_count()), 0.0);
    for (int v = 0; v < base.vertex_count(); ++v)
        out.values[static_cast<size_t>(v)] = base_field.values[static_cast<size_t>(v)];

    for (int ei = 0; ei < base.edge_count(); ++ei) {
        const auto& chain = refined.chain(ei);
        double resistance = 1.0 / base.conductance(ei);
        RngStream es = rng.fork(RngStream::mix(kSaltEdge, static_cast<uint64_t>(ei)));
        fill_bridge(out.values, chain, 0, static_cast<int>(chain.size()) - 1, resistance, es);
    }
    return out;
}

MarkovParts markov_decompose(const Network& net, const FieldSample& field,
                             const std::vector<char>& in_A) {
    if (in_A.size() != static_cast<size_t>(net.vertex_count()))
        throw std::invalid_argument("vertex mask size mismatch");
    for (int b : net.boundary())
        if (!in_A[static_cast<size_t>(b)])
            throw std::invalid_argument("decomposition set must contain every boundary vertex");

    MarkovParts parts;
    parts.harmonic = solve_dirichlet(net, in_A, field.values);
    parts.residual.resize(field.values.size());
    for (size_t i = 0; i < field.values.size(); ++i)
        parts.residual[i] = field.values[i] - parts.harmonic[i];
    return parts;
}

void write_field_csv(std::ostream& os, const FieldSample& field) {
    os << "vertex_id,x,y,value\n";
    const Network& net = *field.net;
    for (int v = 0; v < net.vertex_count(); ++v) {
        os << v << ',';
        if (net.has_positions())
            os << net.position(v)[0] << ',' << net.position(v)[1];
        else
            os << ',';
        os << ',' << field.values[static_cast<size_t>(v)] << '\n';
    }
}

}  // namespace gfflab
