#include "gfflab/fps.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <map>
#include <queue>
#include <stdexcept>

#include <json.hpp>

namespace gfflab {

long MetricSubset::vertex_size() const {
    return std::count(vertices.begin(), vertices.end(), char(1));
}
long MetricSubset::edge_size() const { return std::count(edges.begin(), edges.end(), char(1)); }

namespace {
constexpr uint64_t kSaltGate = 0xB71D6E55u;
constexpr uint64_t kSaltUpper = 0x5EC04D00u;
}  // namespace

BridgeGate::BridgeGate(uint64_t field_key) : base_key_(RngStream::mix(field_key, kSaltGate)) {}

double BridgeGate::uniform_for(int edge_index) const {
    RngStream s(RngStream::mix(base_key_, static_cast<uint64_t>(edge_index)));
    return s.uniform01();
}

MetricSubset first_passage_set(const FieldSample& field, double a, bool exact_edges,
                               const BridgeGate* gate) {
    const Network& net = *field.net;
    BridgeGate own_gate(field.stream_key);
    if (exact_edges && gate == nullptr) gate = &own_gate;

    const double level = -a;
    auto passable = [&](int ei) {
        const EdgeSpec& e = net.edges()[static_cast<size_t>(ei)];
        double va = field.values[static_cast<size_t>(e.a)];
        double vb = field.values[static_cast<size_t>(e.b)];
        if (va < level || vb < level) return false;
        if (!field.edge_support.empty() && !field.edge_support[static_cast<size_t>(ei)]) {
            // No trajectory support inside this edge: the interpolating field
            // has an interior minimum at (effectively just below) zero.
            return level < 0.0;
        }
        if (exact_edges) {
            double p = bridge_min_above(va, vb, 1.0 / e.conductance, level);
            return gate->uniform_for(ei) < p;
        }
        return true;
    };

    MetricSubset out;
    out.net = &net;
    out.vertices.assign(static_cast<size_t>(net.vertex_count()), 0);
    out.edges.assign(static_cast<size_t>(net.edge_count()), 0);

    std::vector<char> reached(static_cast<size_t>(net.vertex_count()), 0);
    std::queue<int> bfs;
    for (int b : net.boundary()) {
        out.vertices[static_cast<size_t>(b)] = 1;  // boundary always included
        if (field.values[static_cast<size_t>(b)] >= level && !reached[static_cast<size_t>(b)]) {
            reached[static_cast<size_t>(b)] = 1;
            bfs.push(b);
        }
    }
    while (!bfs.empty()) {
        int v = bfs.front();
        bfs.pop();
        for (auto [w, ei] : net.neighbors(v)) {
            if (reached[static_cast<size_t>(w)] || !passable(ei)) continue;
            reached[static_cast<size_t>(w)] = 1;
            bfs.push(w);
        }
    }
    for (int v = 0; v < net.vertex_count(); ++v)
        if (reached[static_cast<size_t>(v)]) out.vertices[static_cast<size_t>(v)] = 1;
    for (int ei = 0; ei < net.edge_count(); ++ei) {
        const EdgeSpec& e = net.edges()[static_cast<size_t>(ei)];
        if (reached[static_cast<size_t>(e.a)] && reached[static_cast<size_t>(e.b)] && passable(ei))
            out.edges[static_cast<size_t>(ei)] = 1;
    }
    return out;
}

MetricSubset upper_fps(const FieldSample& field, double b, bool exact_edges) {
    FieldSample neg;
    neg.net = field.net;
    neg.stream_key = RngStream::mix(field.stream_key, kSaltUpper);
    neg.edge_support = field.edge_support;
    neg.values.resize(field.values.size());
    for (size_t i = 0; i < field.values.size(); ++i) neg.values[i] = -field.values[i];
    neg.u.boundary_values.resize(field.u.boundary_values.size());
    for (size_t i = 0; i < field.u.boundary_values.size(); ++i)
        neg.u.boundary_values[i] = -field.u.boundary_values[i];
    neg.u.extension.resize(field.u.extension.size());
    for (size_t i = 0; i < field.u.extension.size(); ++i)
        neg.u.extension[i] = -field.u.extension[i];
    return first_passage_set(neg, b, exact_edges);
}

std::vector<double> complement_harmonic(const Network& net, const MetricSubset& fps,
                                        const BoundaryFunction& u, double a) {
    for (int b : net.boundary())
        if (!fps.vertices[static_cast<size_t>(b)])
            throw std::invalid_argument("first-passage set must contain the boundary");
    std::vector<double> fixed_values(static_cast<size_t>(net.vertex_count()), 0.0);
    for (int v = 0; v < net.vertex_count(); ++v)
        if (fps.vertices[static_cast<size_t>(v)] && !net.is_boundary(v))
            fixed_values[static_cast<size_t>(v)] = -a - u.extension[static_cast<size_t>(v)];
    return solve_dirichlet(net, fps.vertices, fixed_values);
}

// -- interface --------------------------------------------------------------

std::pair<std::array<int, 2>, std::array<int, 2>> InterfaceCurve::crossed_primal(
    const std::array<int, 2>& f1, const std::array<int, 2>& f2) {
    int dx = f2[0] - f1[0], dy = f2[1] - f1[1];
    if (dx == 1 && dy == 0)  // shared wall x = f1.x+1: a vertical primal edge
        return {{f1[0] + 1, f1[1]}, {f1[0] + 1, f1[1] + 1}};
    if (dx == -1 && dy == 0)
        return {{f1[0], f1[1]}, {f1[0], f1[1] + 1}};
    if (dx == 0 && dy == 1)  // shared wall y = f1.y+1: a horizontal primal edge
        return {{f1[0], f1[1] + 1}, {f1[0] + 1, f1[1] + 1}};
    if (dx == 0 && dy == -1)
        return {{f1[0], f1[1]}, {f1[0] + 1, f1[1]}};
    throw std::invalid_argument("faces are not adjacent");
}

InterfaceCurve extract_interface(const Network& net, const MetricSubset& fps) {
    if (!net.is_lattice() || net.marked_faces().size() != 2)
        throw std::invalid_argument("interface extraction needs a lattice with two named arcs");
    const auto* b1 = net.arc("B1");
    const auto* b2 = net.arc("B2");
    if (!b1 || !b2) throw std::invalid_argument("interface extraction needs arcs B1 and B2");

    const int n = net.vertex_count();
    // Wet side: vertices connected to B1 through included edges.
    std::vector<char> wet(static_cast<size_t>(n), 0);
    {
        std::queue<int> bfs;
        for (int v : *b1)
            if (fps.vertices[static_cast<size_t>(v)]) {
                wet[static_cast<size_t>(v)] = 1;
                bfs.push(v);
            }
        while (!bfs.empty()) {
            int v = bfs.front();
            bfs.pop();
            for (auto [w, ei] : net.neighbors(v))
                if (fps.edges[static_cast<size_t>(ei)] && !wet[static_cast<size_t>(w)]) {
                    wet[static_cast<size_t>(w)] = 1;
                    bfs.push(w);
                }
        }
    }
    // Dry side: complement territory (excluded edges and their non-set
    // endpoints) connected to B2.
    std::vector<char> dry_edge(static_cast<size_t>(net.edge_count()), 0);
    std::vector<char> dry_vertex(static_cast<size_t>(n), 0);
    {
        std::queue<int> edge_bfs;
        for (int v : *b2)
            for (auto [w, ei] : net.neighbors(v))
                if (!fps.edges[static_cast<size_t>(ei)] && !dry_edge[static_cast<size_t>(ei)]) {
                    dry_edge[static_cast<size_t>(ei)] = 1;
                    edge_bfs.push(ei);
                }
        while (!edge_bfs.empty()) {
            int ei = edge_bfs.front();
            edge_bfs.pop();
            const EdgeSpec& e = net.edges()[static_cast<size_t>(ei)];
            for (int v : {e.a, e.b}) {
                if (fps.vertices[static_cast<size_t>(v)] || dry_vertex[static_cast<size_t>(v)])
                    continue;
                dry_vertex[static_cast<size_t>(v)] = 1;
                for (auto [w, ej] : net.neighbors(v))
                    if (!fps.edges[static_cast<size_t>(ej)] && !dry_edge[static_cast<size_t>(ej)]) {
                        dry_edge[static_cast<size_t>(ej)] = 1;
                        edge_bfs.push(ej);
                    }
            }
        }
    }

    // Cut edges: complement-reachable excluded edges with a wet endpoint.
    // Each maps to one dual edge between the two faces it separates.
    std::map<std::array<int, 2>, std::vector<std::array<int, 2>>> dual_adj;
    for (int ei = 0; ei < net.edge_count(); ++ei) {
        if (!dry_edge[static_cast<size_t>(ei)]) continue;
        const EdgeSpec& e = net.edges()[static_cast<size_t>(ei)];
        if (!wet[static_cast<size_t>(e.a)] && !wet[static_cast<size_t>(e.b)]) continue;
        auto ca = net.lattice_coord(e.a);
        auto cb = net.lattice_coord(e.b);
        std::array<int, 2> f1, f2;
        if (ca[1] == cb[1]) {  // horizontal primal edge
            int x = std::min(ca[0], cb[0]);
            f1 = {x, ca[1]};
            f2 = {x, ca[1] - 1};
        } else {  // vertical primal edge
            int y = std::min(ca[1], cb[1]);
            f1 = {ca[0], y};
            f2 = {ca[0] - 1, y};
        }
        dual_adj[f1].push_back(f2);
        dual_adj[f2].push_back(f1);
    }

    const auto src = net.marked_faces()[0];
    const auto dst = net.marked_faces()[1];
    std::map<std::array<int, 2>, std::array<int, 2>> parent;
    std::queue<std::array<int, 2>> bfs;
    parent[src] = src;
    bfs.push(src);
    bool found = false;
    while (!bfs.empty() && !found) {
        auto f = bfs.front();
        bfs.pop();
        auto it = dual_adj.find(f);
        if (it == dual_adj.end()) continue;
        for (const auto& g : it->second) {
            if (parent.count(g)) continue;
            parent[g] = f;
            if (g == dst) {
                found = true;
                break;
            }
            bfs.push(g);
        }
    }
    if (!found)
        throw std::runtime_error("no separating dual path between the marked faces");

    InterfaceCurve curve;
    for (auto f = dst;; f = parent[f]) {
        curve.faces.push_back(f);
        if (f == src) break;
    }
    std::reverse(curve.faces.begin(), curve.faces.end());
    return curve;
}

std::vector<int> crossed_edges(const Network& net, const InterfaceCurve& curve) {
    std::map<std::array<int, 2>, int> coord_to_vertex;
    for (int v = 0; v < net.vertex_count(); ++v) coord_to_vertex[net.lattice_coord(v)] = v;
    std::vector<int> out;
    for (size_t i = 0; i + 1 < curve.faces.size(); ++i) {
        auto [pa, pb] = InterfaceCurve::crossed_primal(curve.faces[i], curve.faces[i + 1]);
        auto ia = coord_to_vertex.find(pa);
        auto ib = coord_to_vertex.find(pb);
        if (ia == coord_to_vertex.end() || ib == coord_to_vertex.end())
            throw std::runtime_error("interface crosses a non-existent primal edge");
        int ei = net.edge_between(ia->second, ib->second);
        if (ei < 0) throw std::runtime_error("interface crosses a non-existent primal edge");
        out.push_back(ei);
    }
    return out;
}

// -- dumps -------------------------------------------------------------------

void write_subset_json(std::ostream& os, const MetricSubset& s) {
    nlohmann::json j;
    j["vertices"] = nlohmann::json::array();
    for (size_t v = 0; v < s.vertices.size(); ++v)
        if (s.vertices[v]) j["vertices"].push_back(v);
    j["edges"] = nlohmann::json::array();
    for (size_t e = 0; e < s.edges.size(); ++e)
        if (s.edges[e])
            j["edges"].push_back({{"edge_id", e}, {"intervals", {{0.0, 1.0}}}});
    os << j.dump(2) << '\n';
}

void write_interface_csv(std::ostream& os, const InterfaceCurve& curve) {
    os << "step,face1_x,face1_y,face2_x,face2_y\n";
    for (size_t i = 0; i + 1 < curve.faces.size(); ++i)
        os << i << ',' << curve.faces[i][0] << ',' << curve.faces[i][1] << ','
           << curve.faces[i + 1][0] << ',' << curve.faces[i + 1][1] << '\n';
}

void render_svg(std::ostream& os, const Network& net, const MetricSubset* fps,
                const InterfaceCurve* curve, bool deterministic) {
    if (!net.has_positions()) throw std::invalid_argument("svg rendering needs vertex positions");
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (int v = 0; v < net.vertex_count(); ++v) {
        xmin = std::min(xmin, net.position(v)[0]);
        xmax = std::max(xmax, net.position(v)[0]);
        ymin = std::min(ymin, net.position(v)[1]);
        ymax = std::max(ymax, net.position(v)[1]);
    }
    double span = std::max(xmax - xmin, ymax - ymin);
    if (span <= 0) span = 1.0;
    double pad = 0.05 * span;
    auto sx = [&](double x) { return (x - xmin + pad) / (span + 2 * pad) * 800.0; };
    auto sy = [&](double y) { return 800.0 - (y - ymin + pad) / (span + 2 * pad) * 800.0; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\">\n";
    if (!deterministic) os << "<!-- generated " << time(nullptr) << " -->\n";
    for (int ei = 0; ei < net.edge_count(); ++ei) {
        const EdgeSpec& e = net.edges()[static_cast<size_t>(ei)];
        bool in = fps && fps->edges[static_cast<size_t>(ei)];
        os << "<line x1=\"" << sx(net.position(e.a)[0]) << "\" y1=\"" << sy(net.position(e.a)[1])
           << "\" x2=\"" << sx(net.position(e.b)[0]) << "\" y2=\"" << sy(net.position(e.b)[1])
           << "\" stroke=\"" << (in ? "#2266cc" : "#cccccc") << "\" stroke-width=\""
           << (in ? 3 : 1) << "\"/>\n";
    }
    for (int v = 0; v < net.vertex_count(); ++v) {
        bool in = fps && fps->vertices[static_cast<size_t>(v)];
        os << "<circle cx=\"" << sx(net.position(v)[0]) << "\" cy=\"" << sy(net.position(v)[1])
           << "\" r=\"" << (net.is_boundary(v) ? 4 : 2.5) << "\" fill=\""
           << (in ? "#2266cc" : "#999999") << "\"/>\n";
    }
    if (curve && net.is_lattice() && !curve->faces.empty()) {
        // Face centers in position units; the lattice origin is recovered
        // from vertex 0.
        double s = net.lattice_spacing();
        double ox = net.position(0)[0] - s * net.lattice_coord(0)[0];
        double oy = net.position(0)[1] - s * net.lattice_coord(0)[1];
        os << "<polyline fill=\"none\" stroke=\"#cc2222\" stroke-width=\"2.5\" points=\"";
        for (const auto& f : curve->faces)
            os << sx(ox + s * (f[0] + 0.5)) << ',' << sy(oy + s * (f[1] + 0.5)) << ' ';
        os << "\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace gfflab
