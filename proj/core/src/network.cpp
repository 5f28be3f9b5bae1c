#include "gfflab/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

namespace gfflab {

Network::Network(NetworkSpec spec) : n_(spec.vertex_count), edges_(std::move(spec.edges)) {
    if (n_ <= 1) throw std::invalid_argument("network needs at least two vertices");

    adj_.resize(static_cast<size_t>(n_));
    ctot_.assign(static_cast<size_t>(n_), 0.0);
    std::set<std::pair<int, int>> seen;
    for (size_t i = 0; i < edges_.size(); ++i) {
        auto& e = edges_[i];
        if (e.a < 0 || e.a >= n_ || e.b < 0 || e.b >= n_)
            throw std::invalid_argument("edge endpoint out of range");
        if (e.a == e.b)
            throw std::invalid_argument("self-loop on vertex " + std::to_string(e.a));
        if (!(e.conductance > 0) || !std::isfinite(e.conductance))
            throw std::invalid_argument("nonpositive conductance on edge (" +
                                        std::to_string(e.a) + "," + std::to_string(e.b) + ")");
        auto key = std::minmax(e.a, e.b);
        if (!seen.insert(key).second)
            throw std::invalid_argument("duplicate edge (" + std::to_string(e.a) + "," +
                                        std::to_string(e.b) + ")");
        adj_[static_cast<size_t>(e.a)].emplace_back(e.b, static_cast<int>(i));
        adj_[static_cast<size_t>(e.b)].emplace_back(e.a, static_cast<int>(i));
        ctot_[static_cast<size_t>(e.a)] += e.conductance;
        ctot_[static_cast<size_t>(e.b)] += e.conductance;
    }

    is_boundary_.assign(static_cast<size_t>(n_), false);
    for (int b : spec.boundary) {
        if (b < 0 || b >= n_) throw std::invalid_argument("boundary vertex out of range");
        is_boundary_[static_cast<size_t>(b)] = true;
    }
    for (int v = 0; v < n_; ++v)
        (is_boundary_[static_cast<size_t>(v)] ? boundary_ : interior_).push_back(v);
    if (boundary_.empty()) throw std::invalid_argument("boundary is empty");
    if (interior_.empty()) throw std::invalid_argument("interior is empty");

    interior_index_.assign(static_cast<size_t>(n_), -1);
    for (size_t i = 0; i < interior_.size(); ++i)
        interior_index_[static_cast<size_t>(interior_[i])] = static_cast<int>(i);

    // Connectivity.
    std::vector<char> reached(static_cast<size_t>(n_), 0);
    std::queue<int> bfs;
    bfs.push(0);
    reached[0] = 1;
    int count = 1;
    while (!bfs.empty()) {
        int v = bfs.front();
        bfs.pop();
        for (auto [w, ei] : adj_[static_cast<size_t>(v)]) {
            if (!reached[static_cast<size_t>(w)]) {
                reached[static_cast<size_t>(w)] = 1;
                ++count;
                bfs.push(w);
            }
        }
    }
    if (count != n_) throw std::invalid_argument("graph is disconnected");

    positions_ = std::move(spec.positions);
    if (!positions_.empty() && positions_.size() != static_cast<size_t>(n_))
        throw std::invalid_argument("positions size mismatch");

    arcs_ = std::move(spec.arcs);
    for (auto& [name, verts] : arcs_)
        for (int v : verts)
            if (v < 0 || v >= n_ || !is_boundary_[static_cast<size_t>(v)])
                throw std::invalid_argument("arc '" + name + "' contains a non-boundary vertex");
}

int Network::edge_between(int u, int v) const {
    for (auto [w, ei] : adj_[static_cast<size_t>(u)])
        if (w == v) return ei;
    return -1;
}

const std::vector<int>* Network::arc(const std::string& name) const {
    auto it = arcs_.find(name);
    return it == arcs_.end() ? nullptr : &it->second;
}

void Network::set_lattice_metadata(double spacing, std::vector<std::array<int, 2>> coords,
                                   std::vector<std::array<int, 2>> marked) {
    lattice_spacing_ = spacing;
    lattice_coords_ = std::move(coords);
    marked_faces_ = std::move(marked);
}

const Eigen::SparseMatrix<double>& Network::interior_matrix() const {
    interior_factor();
    return cache_->kmat;
}

const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>& Network::interior_factor() const {
    std::call_once(cache_->once, [this] {
        const int k = interior_count();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(k) * 5);
        for (int i = 0; i < k; ++i) {
            int v = interior_[static_cast<size_t>(i)];
            trip.emplace_back(i, i, ctot_[static_cast<size_t>(v)]);
            for (auto [w, ei] : adj_[static_cast<size_t>(v)]) {
                int j = interior_index_[static_cast<size_t>(w)];
                if (j >= 0) trip.emplace_back(i, j, -edges_[static_cast<size_t>(ei)].conductance);
            }
        }
        cache_->kmat.resize(k, k);
        cache_->kmat.setFromTriplets(trip.begin(), trip.end());
        cache_->llt = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
        cache_->llt->compute(cache_->kmat);
        if (cache_->llt->info() != Eigen::Success)
            throw std::runtime_error("interior Laplacian factorization failed");
    });
    return *cache_->llt;
}

Eigen::VectorXd Network::solve_interior(const Eigen::VectorXd& rhs) const {
    return interior_factor().solve(rhs);
}

Eigen::VectorXd Network::colored_sample(const Eigen::VectorXd& z) const {
    const auto& f = interior_factor();
    Eigen::VectorXd y = f.matrixU().solve(z);
    return f.permutationPinv() * y;
}

Network build_network(NetworkSpec spec) { return Network(std::move(spec)); }

GreenTable green_function(const Network& net) {
    const int k = net.interior_count();
    GreenTable g;
    g.values.resize(k, k);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < k; ++i) {
        rhs.setZero();
        rhs(i) = 1.0;
        g.values.col(i) = net.solve_interior(rhs);
    }
    // Symmetrize away factorization round-off.
    g.values = 0.5 * (g.values + g.values.transpose()).eval();
    return g;
}

BoundaryFunction BoundaryFunction::constant(const Network& net, double c) {
    BoundaryFunction u;
    u.boundary_values.assign(static_cast<size_t>(net.boundary_count()), c);
    u.extension.assign(static_cast<size_t>(net.vertex_count()), c);
    return u;
}

BoundaryFunction harmonic_extension(const Network& net, const std::vector<double>& boundary_values) {
    if (boundary_values.size() != static_cast<size_t>(net.boundary_count()))
        throw std::invalid_argument("boundary values size mismatch");
    BoundaryFunction out;
    out.boundary_values = boundary_values;
    out.extension.assign(static_cast<size_t>(net.vertex_count()), 0.0);
    for (size_t i = 0; i < boundary_values.size(); ++i)
        out.extension[static_cast<size_t>(net.boundary()[i])] = boundary_values[i];

    const int k = net.interior_count();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < k; ++i) {
        int v = net.interior()[static_cast<size_t>(i)];
        for (auto [w, ei] : net.neighbors(v))
            if (net.is_boundary(w))
                rhs(i) += net.conductance(ei) * out.extension[static_cast<size_t>(w)];
    }
    Eigen::VectorXd sol = net.solve_interior(rhs);
    for (int i = 0; i < k; ++i)
        out.extension[static_cast<size_t>(net.interior()[static_cast<size_t>(i)])] = sol(i);
    return out;
}

double dirichlet_energy(const Network& net, const std::vector<double>& f) {
    if (f.size() != static_cast<size_t>(net.vertex_count()))
        throw std::invalid_argument("vertex function size mismatch");
    double e = 0.0;
    for (const auto& edge : net.edges()) {
        double d = f[static_cast<size_t>(edge.b)] - f[static_cast<size_t>(edge.a)];
        e += edge.conductance * d * d;
    }
    return e;
}

Eigen::MatrixXd boundary_poisson_kernel(const Network& net) {
    const int nb = net.boundary_count();
    const int k = net.interior_count();
    // C_BI: boundary x interior conductances.
    Eigen::MatrixXd cbi = Eigen::MatrixXd::Zero(nb, k);
    for (int bi = 0; bi < nb; ++bi) {
        int b = net.boundary()[static_cast<size_t>(bi)];
        for (auto [w, ei] : net.neighbors(b)) {
            int j = net.interior_index(w);
            if (j >= 0) cbi(bi, j) += net.conductance(ei);
        }
    }
    Eigen::MatrixXd g = green_function(net).values;
    Eigen::MatrixXd h = cbi * g * cbi.transpose();
    return 0.5 * (h + h.transpose()).eval();
}

Network rescale_conductances(const Network& net, const BoundaryFunction& u) {
    for (double v : u.extension)
        if (!(v > 0))
            throw std::invalid_argument("rescaling requires strictly positive u");
    NetworkSpec spec;
    spec.vertex_count = net.vertex_count();
    spec.boundary = net.boundary();
    spec.positions = net.positions();
    spec.arcs = net.arcs();
    for (const auto& e : net.edges())
        spec.edges.push_back({e.a, e.b,
                              e.conductance * u.extension[static_cast<size_t>(e.a)] *
                                  u.extension[static_cast<size_t>(e.b)]});
    return Network(std::move(spec));
}

std::vector<double> solve_dirichlet(const Network& net, const std::vector<char>& fixed,
                                    const std::vector<double>& fixed_values) {
    const int n = net.vertex_count();
    if (fixed.size() != static_cast<size_t>(n) || fixed_values.size() != static_cast<size_t>(n))
        throw std::invalid_argument("solve_dirichlet: size mismatch");

    std::vector<int> free_index(static_cast<size_t>(n), -1);
    std::vector<int> free_vertices;
    for (int v = 0; v < n; ++v)
        if (!fixed[static_cast<size_t>(v)]) {
            free_index[static_cast<size_t>(v)] = static_cast<int>(free_vertices.size());
            free_vertices.push_back(v);
        }

    std::vector<double> out(static_cast<size_t>(n), 0.0);
    for (int v = 0; v < n; ++v)
        if (fixed[static_cast<size_t>(v)]) out[static_cast<size_t>(v)] = fixed_values[static_cast<size_t>(v)];
    if (free_vertices.empty()) return out;

    // Components of the free set disconnected from every fixed vertex stay 0;
    // solve only the reachable part to keep the system positive definite.
    std::vector<char> reachable(free_vertices.size(), 0);
    std::queue<int> bfs;
    for (size_t i = 0; i < free_vertices.size(); ++i) {
        int v = free_vertices[i];
        for (auto [w, ei] : net.neighbors(v))
            if (fixed[static_cast<size_t>(w)]) {
                reachable[i] = 1;
                bfs.push(static_cast<int>(i));
                break;
            }
    }
    while (!bfs.empty()) {
        int i = bfs.front();
        bfs.pop();
        for (auto [w, ei] : net.neighbors(free_vertices[static_cast<size_t>(i)])) {
            int j = free_index[static_cast<size_t>(w)];
            if (j >= 0 && !reachable[static_cast<size_t>(j)]) {
                reachable[static_cast<size_t>(j)] = 1;
                bfs.push(j);
            }
        }
    }

    std::vector<int> sys_index(free_vertices.size(), -1);
    std::vector<int> sys_vertices;
    for (size_t i = 0; i < free_vertices.size(); ++i)
        if (reachable[i]) {
            sys_index[i] = static_cast<int>(sys_vertices.size());
            sys_vertices.push_back(free_vertices[i]);
        }
    if (sys_vertices.empty()) return out;

    const int m = static_cast<int>(sys_vertices.size());
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
        int v = sys_vertices[static_cast<size_t>(i)];
        trip.emplace_back(i, i, net.total_conductance(v));
        for (auto [w, ei] : net.neighbors(v)) {
            double c = net.conductance(ei);
            if (fixed[static_cast<size_t>(w)]) {
                rhs(i) += c * fixed_values[static_cast<size_t>(w)];
            } else {
                int fj = free_index[static_cast<size_t>(w)];
                int sj = sys_index[static_cast<size_t>(fj)];
                if (sj >= 0) trip.emplace_back(i, sj, -c);
            }
        }
    }
    Eigen::SparseMatrix<double> kmat(m, m);
    kmat.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(kmat);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve_dirichlet: factorization failed");
    Eigen::VectorXd sol = llt.solve(rhs);
    for (int i = 0; i < m; ++i) out[static_cast<size_t>(sys_vertices[static_cast<size_t>(i)])] = sol(i);
    return out;
}

// -- lattice domains ----------------------------------------------------

namespace {

struct LatticeBuild {
    std::map<std::array<int, 2>, int> index;
    std::vector<std::array<int, 2>> coords;
    double spacing = 1.0;
    std::array<double, 2> origin{0.0, 0.0};

    std::array<double, 2> position(const std::array<int, 2>& c) const {
        return {origin[0] + spacing * c[0], origin[1] + spacing * c[1]};
    }
};

Network finish_lattice(LatticeBuild& lb, const std::vector<char>& frontier,
                       const std::optional<char>& split_axis, double center0, double center1) {
    const int n = static_cast<int>(lb.coords.size());
    NetworkSpec spec;
    spec.vertex_count = n;
    spec.positions.resize(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) spec.positions[static_cast<size_t>(v)] = lb.position(lb.coords[static_cast<size_t>(v)]);

    static const std::array<std::array<int, 2>, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    std::vector<char> is_bnd(static_cast<size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        const auto& c = lb.coords[static_cast<size_t>(v)];
        bool removed_neighbor = false;
        for (const auto& s : steps) {
            std::array<int, 2> d{c[0] + s[0], c[1] + s[1]};
            auto it = lb.index.find(d);
            if (it == lb.index.end()) {
                removed_neighbor = true;
            } else if (it->second > v) {
                spec.edges.push_back({v, it->second, 1.0});
            }
        }
        if (removed_neighbor || frontier[static_cast<size_t>(v)]) is_bnd[static_cast<size_t>(v)] = 1;
    }
    for (int v = 0; v < n; ++v)
        if (is_bnd[static_cast<size_t>(v)]) spec.boundary.push_back(v);

    bool has_interior = false;
    for (int v = 0; v < n; ++v)
        if (!is_bnd[static_cast<size_t>(v)]) { has_interior = true; break; }
    if (!has_interior)
        throw std::invalid_argument("region too small: no interior vertex at this level");

    std::vector<std::array<int, 2>> marked;
    if (split_axis) {
        int axis = (*split_axis == 'x') ? 0 : 1;
        auto arc_of = [&](int v) {
            auto p = lb.position(lb.coords[static_cast<size_t>(v)]);
            double rel = (axis == 0 ? p[0] - center0 : p[1] - center1);
            return rel >= -1e-12 ? std::string("B1") : std::string("B2");
        };
        for (int v : spec.boundary) spec.arcs[arc_of(v)].push_back(v);
        if (spec.arcs.size() != 2)
            throw std::invalid_argument("arc split leaves one arc empty");

        // Marked dual faces: the endpoints of any arc-separating dual path.
        // These are the lattice cells just outside the domain (at least one
        // missing corner) whose present corners include boundary vertices of
        // both arcs -- one per arc junction.
        std::set<std::array<int, 2>> faces;
        for (int v : spec.boundary) {
            const auto& c = lb.coords[static_cast<size_t>(v)];
            for (int dx = -1; dx <= 0; ++dx)
                for (int dy = -1; dy <= 0; ++dy) faces.insert({c[0] + dx, c[1] + dy});
        }
        for (const auto& f : faces) {
            bool b1 = false, b2 = false, outside = false;
            for (int dx = 0; dx <= 1; ++dx)
                for (int dy = 0; dy <= 1; ++dy) {
                    auto it = lb.index.find({f[0] + dx, f[1] + dy});
                    if (it == lb.index.end()) {
                        outside = true;
                        continue;
                    }
                    if (!is_bnd[static_cast<size_t>(it->second)]) continue;
                    (arc_of(it->second) == "B1" ? b1 : b2) = true;
                }
            if (b1 && b2 && outside) marked.push_back(f);
        }
        // Jagged rims can offer several junction cells; keep one per side of
        // the split axis (the one nearest the axis, ties broken
        // lexicographically; `marked` is already in lexicographic order).
        if (marked.size() > 2) {
            int perp = 1 - axis;
            double perp_center = (perp == 0 ? center0 : center1);
            std::vector<std::array<int, 2>> lo_side, hi_side;
            for (const auto& f : marked) {
                auto p = lb.position({f[0], f[1]});
                (p[perp] < perp_center ? lo_side : hi_side).push_back(f);
            }
            auto nearest = [&](const std::vector<std::array<int, 2>>& group) {
                std::array<int, 2> best{};
                double best_d = 1e300;
                for (const auto& f : group) {
                    auto p = lb.position({f[0], f[1]});
                    double d = std::fabs((axis == 0 ? p[0] - center0 : p[1] - center1));
                    if (d < best_d) {
                        best_d = d;
                        best = f;
                    }
                }
                return best;
            };
            if (!lo_side.empty() && !hi_side.empty())
                marked = {nearest(lo_side), nearest(hi_side)};
        }
        if (marked.size() != 2)
            throw std::invalid_argument("arc split does not yield exactly two separating squares (got " +
                                        std::to_string(marked.size()) + ")");
    }

    Network net(std::move(spec));
    net.set_lattice_metadata(lb.spacing, lb.coords, marked);
    return net;
}

}  // namespace

Network lattice_domain(const DomainSpec& domain, int level) {
    if (level < 0) throw std::invalid_argument("level must be nonnegative");
    LatticeBuild lb;
    std::vector<char> frontier;
    double cx = 0, cy = 0;

    auto add = [&](int i, int j, bool on_frontier) {
        std::array<int, 2> c{i, j};
        if (lb.index.count(c)) return;
        lb.index[c] = static_cast<int>(lb.coords.size());
        lb.coords.push_back(c);
        frontier.push_back(on_frontier ? 1 : 0);
    };

    switch (domain.kind) {
        case DomainSpec::Kind::square: {
            lb.spacing = 1.0 / static_cast<double>(1 << level);
            int side = (1 << level);
            double scale = domain.size;
            lb.spacing *= scale;
            for (int i = 0; i <= side; ++i)
                for (int j = 0; j <= side; ++j)
                    add(i, j, i == 0 || j == 0 || i == side || j == side);
            cx = scale / 2.0;
            cy = scale / 2.0;
            break;
        }
        case DomainSpec::Kind::disk: {
            lb.spacing = 1.0 / static_cast<double>(1 << level);
            double r = domain.size;
            int extent = static_cast<int>(std::ceil(r / lb.spacing)) + 1;
            double r2 = r * r;
            for (int i = -extent; i <= extent; ++i)
                for (int j = -extent; j <= extent; ++j) {
                    double x = lb.spacing * i, y = lb.spacing * j;
                    double d2 = x * x + y * y;
                    if (d2 <= r2 + 1e-12) add(i, j, std::fabs(d2 - r2) <= 1e-12);
                }
            cx = 0;
            cy = 0;
            break;
        }
        case DomainSpec::Kind::box: {
            lb.spacing = 1.0;
            int half = domain.box_half;
            for (int i = -half; i <= half; ++i)
                for (int j = -half; j <= half; ++j)
                    add(i, j, std::abs(i) == half || std::abs(j) == half);
            cx = 0;
            cy = 0;
            break;
        }
    }

    // Drop vertices outside the largest connected component (jagged disk rims
    // can shed isolated corners).
    {
        static const std::array<std::array<int, 2>, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
        const int n = static_cast<int>(lb.coords.size());
        std::vector<int> comp(static_cast<size_t>(n), -1);
        int ncomp = 0;
        for (int v = 0; v < n; ++v) {
            if (comp[static_cast<size_t>(v)] >= 0) continue;
            std::queue<int> bfs;
            bfs.push(v);
            comp[static_cast<size_t>(v)] = ncomp;
            while (!bfs.empty()) {
                int w = bfs.front();
                bfs.pop();
                for (const auto& s : steps) {
                    auto it = lb.index.find({lb.coords[static_cast<size_t>(w)][0] + s[0],
                                             lb.coords[static_cast<size_t>(w)][1] + s[1]});
                    if (it != lb.index.end() && comp[static_cast<size_t>(it->second)] < 0) {
                        comp[static_cast<size_t>(it->second)] = ncomp;
                        bfs.push(it->second);
                    }
                }
            }
            ++ncomp;
        }
        if (ncomp > 1) {
            std::vector<int> sizes(static_cast<size_t>(ncomp), 0);
            for (int v = 0; v < n; ++v) ++sizes[static_cast<size_t>(comp[static_cast<size_t>(v)])];
            int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
            LatticeBuild kept;
            kept.spacing = lb.spacing;
            kept.origin = lb.origin;
            std::vector<char> kept_frontier;
            for (int v = 0; v < n; ++v)
                if (comp[static_cast<size_t>(v)] == keep) {
                    kept.index[lb.coords[static_cast<size_t>(v)]] = static_cast<int>(kept.coords.size());
                    kept.coords.push_back(lb.coords[static_cast<size_t>(v)]);
                    kept_frontier.push_back(frontier[static_cast<size_t>(v)]);
                }
            lb = std::move(kept);
            frontier = std::move(kept_frontier);
        }
    }

    return finish_lattice(lb, frontier, domain.split_axis, cx, cy);
}

Network grid_network(int nx, int ny, std::optional<char> split_axis) {
    if (nx < 3 || ny < 3)
        throw std::invalid_argument("grid needs at least 3 vertices per side");
    LatticeBuild lb;
    std::vector<char> frontier;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            lb.index[{i, j}] = static_cast<int>(lb.coords.size());
            lb.coords.push_back({i, j});
            frontier.push_back(i == 0 || j == 0 || i == nx - 1 || j == ny - 1 ? 1 : 0);
        }
    return finish_lattice(lb, frontier, split_axis, (nx - 1) / 2.0, (ny - 1) / 2.0);
}

// -- refinement ---------------------------------------------------------

RefinedNetwork::RefinedNetwork(const Network& base, int level) : level_(level) {
    if (level < 0) throw std::invalid_argument("refinement level must be nonnegative");
    base_ = std::make_shared<Network>(base);

    const int n = base.vertex_count();
    const int parts = 1 << level;
    NetworkSpec spec;
    spec.boundary = base.boundary();
    spec.arcs = base.arcs();
    base_vertex_.assign(static_cast<size_t>(n), 0);
    for (int v = 0; v < n; ++v) base_vertex_[static_cast<size_t>(v)] = v;

    bool pos = base.has_positions();
    if (pos) spec.positions = base.positions();

    int next = n;
    chains_.resize(static_cast<size_t>(base.edge_count()));
    for (int ei = 0; ei < base.edge_count(); ++ei) {
        const auto& e = base.edges()[static_cast<size_t>(ei)];
        auto& chain = chains_[static_cast<size_t>(ei)];
        chain.push_back(e.a);
        for (int k = 1; k < parts; ++k) {
            chain.push_back(next++);
            base_vertex_.push_back(-1);
            if (pos) {
                double t = static_cast<double>(k) / parts;
                const auto& pa = base.position(e.a);
                const auto& pb = base.position(e.b);
                spec.positions.push_back({pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])});
            }
        }
        chain.push_back(e.b);
        double c = e.conductance * parts;
        for (int k = 0; k < parts; ++k) {
            refined_edge_base_.push_back(ei);
            refined_edge_slot_.push_back(k);
            spec.edges.push_back({chain[static_cast<size_t>(k)], chain[static_cast<size_t>(k + 1)], c});
        }
    }
    spec.vertex_count = next;
    auto net = std::make_shared<Network>(std::move(spec));
    if (base.is_lattice() && level == 0) {
        std::vector<std::array<int, 2>> coords;
        for (int v = 0; v < n; ++v) coords.push_back(base.lattice_coord(v));
        net->set_lattice_metadata(base.lattice_spacing(), std::move(coords),
                                  std::vector<std::array<int, 2>>(base.marked_faces()));
    }
    net_ = std::move(net);
}

RefinedNetwork refine(const Network& net, int level) { return RefinedNetwork(net, level); }

}  // namespace gfflab
