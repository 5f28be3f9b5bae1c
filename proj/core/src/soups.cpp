#include "gfflab/soups.hpp"

#include <cmath>
#include <stdexcept>

namespace gfflab {

double loop_measure_weight(const Network& net, const std::vector<int>& skeleton) {
    if (skeleton.size() < 3 || skeleton.front() != skeleton.back())
        throw std::invalid_argument("skeleton must be a closed path (first vertex repeated last)");
    const int n = static_cast<int>(skeleton.size()) - 1;
    double prod = 1.0;
    for (int i = 0; i < n; ++i) {
        int a = skeleton[static_cast<size_t>(i)];
        int b = skeleton[static_cast<size_t>(i + 1)];
        if (net.is_boundary(a))
            throw std::invalid_argument("loop skeleton touches the boundary");
        int ei = net.edge_between(a, b);
        if (ei < 0) throw std::invalid_argument("skeleton steps between non-adjacent vertices");
        prod *= net.conductance(ei) / net.total_conductance(a);
    }
    // Minimal period d: the unrooted class has d distinct rootings, each of
    // which the rooted measure weighs prod/n.
    int d = n;
    for (int p = 1; p < n; ++p) {
        if (n % p != 0) continue;
        bool periodic = true;
        for (int i = 0; i < n && periodic; ++i)
            periodic = skeleton[static_cast<size_t>(i)] == skeleton[static_cast<size_t>((i + p) % n)];
        if (periodic) {
            d = p;
            break;
        }
    }
    return static_cast<double>(d) * prod / static_cast<double>(n);
}

double total_loop_mass(const Network& net) {
    const auto& f = net.interior_factor();
    Eigen::SparseMatrix<double> lower = f.matrixL();
    double logdet = 0.0;
    for (int i = 0; i < lower.rows(); ++i) logdet += 2.0 * std::log(lower.coeff(i, i));
    double sum_log_ctot = 0.0;
    for (int v : net.interior()) sum_log_ctot += std::log(net.total_conductance(v));
    return sum_log_ctot - logdet;
}

// -- loop soup ------------------------------------------------------------

LoopSoupSampler::LoopSoupSampler(const Network& net) : net_(&net) {
    const int n = net.vertex_count();
    std::vector<char> killed(static_cast<size_t>(n), 0);
    std::vector<double> fixed_values(static_cast<size_t>(n), 0.0);
    for (int b : net.boundary()) killed[static_cast<size_t>(b)] = 1;

    stages_.reserve(static_cast<size_t>(net.interior_count()));
    for (int root : net.interior()) {
        killed[static_cast<size_t>(root)] = 1;
        fixed_values[static_cast<size_t>(root)] = 1.0;
        // h(y) = P_y(reach root before any killed vertex); h(root) = 1.
        std::vector<double> h = solve_dirichlet(net, killed, fixed_values);
        fixed_values[static_cast<size_t>(root)] = 0.0;

        Stage st;
        st.root = root;
        double rp = 0.0;
        for (auto [z, ei] : net.neighbors(root)) rp += net.conductance(ei) * h[static_cast<size_t>(z)];
        st.return_prob = rp / net.total_conductance(root);
        st.log_mass = st.return_prob > 0 ? -std::log1p(-st.return_prob) : 0.0;

        st.step_off.assign(static_cast<size_t>(n) + 1, 0);
        if (st.return_prob > 0) {
            // Conditioned step table for every vertex the excursion can stand
            // on (root or any vertex with h > 0).
            for (int y = 0; y < n; ++y) {
                bool standable = (y == root) || (!killed[static_cast<size_t>(y)] &&
                                                 h[static_cast<size_t>(y)] > 0);
                st.step_off[static_cast<size_t>(y)] = static_cast<int>(st.step_cum.size());
                if (!standable) continue;
                double cum = 0.0;
                for (auto [z, ei] : net.neighbors(y)) {
                    cum += net.conductance(ei) * h[static_cast<size_t>(z)];
                    st.step_cum.push_back(cum);
                }
            }
            st.step_off[static_cast<size_t>(n)] = static_cast<int>(st.step_cum.size());
        }
        stage_log_mass_.push_back(st.log_mass);
        stages_.push_back(std::move(st));
    }
}

SoupSample LoopSoupSampler::sample(double alpha, RngStream& rng) const {
    if (!(alpha > 0)) throw std::invalid_argument("intensity must be positive");
    const Network& net = *net_;
    SoupSample out;
    out.net = net_;
    out.alpha = alpha;
    out.stream_key = rng.key();
    out.trivial_field.assign(static_cast<size_t>(net.vertex_count()), 0.0);

    for (const Stage& st : stages_) {
        if (st.log_mass <= 0) continue;
        long nloops = rng.poisson(alpha * st.log_mass);
        for (long l = 0; l < nloops; ++l) {
            long k = rng.logarithmic(st.return_prob);
            Trajectory traj;
            traj.kind = TrajKind::loop;
            traj.vertices.push_back(st.root);
            for (long e = 0; e < k; ++e) {
                int cur = st.root;
                do {
                    int off = st.step_off[static_cast<size_t>(cur)];
                    int deg = st.step_off[static_cast<size_t>(cur) + 1] - off;
                    int pick = rng.pick_cumulative(st.step_cum.data() + off, deg);
                    cur = net.neighbors(cur)[static_cast<size_t>(pick)].first;
                    traj.vertices.push_back(cur);
                } while (cur != st.root);
            }
            traj.holding.resize(traj.vertices.size());
            for (size_t i = 0; i + 1 < traj.vertices.size(); ++i)
                traj.holding[i] =
                    rng.exponential(net.total_conductance(traj.vertices[i]));
            traj.holding.back() = 0.0;  // closing entry is the starting visit
            out.trajectories.push_back(std::move(traj));
        }
    }
    for (int v : net.interior())
        out.trivial_field[static_cast<size_t>(v)] = rng.gamma(alpha, net.total_conductance(v));
    return out;
}

SoupSample sample_loop_soup(const Network& net, double alpha, RngStream& rng) {
    return LoopSoupSampler(net).sample(alpha, rng);
}

// -- excursions -----------------------------------------------------------

ExcursionSampler::ExcursionSampler(const Network& net) : net_(&net) {
    const int nb = net.boundary_count();
    const int k = net.interior_count();
    Eigen::MatrixXd cib = Eigen::MatrixXd::Zero(k, nb);  // interior x boundary conductances
    for (int bi = 0; bi < nb; ++bi) {
        int b = net.boundary()[static_cast<size_t>(bi)];
        for (auto [w, ei] : net.neighbors(b)) {
            int j = net.interior_index(w);
            if (j >= 0) cib(j, bi) += net.conductance(ei);
        }
    }
    GreenTable g = green_function(net);
    q_ = g.values * cib;  // q(x', y) = P_{x'}(jump chain exits at y)
    h_ = cib.transpose() * q_;
    h_ = 0.5 * (h_ + Eigen::MatrixXd(h_.transpose()));
}

Trajectory ExcursionSampler::draw_excursion(int bx, int by, RngStream& rng) const {
    const Network& net = *net_;
    const int x = net.boundary()[static_cast<size_t>(bx)];
    const int y = net.boundary()[static_cast<size_t>(by)];

    Trajectory traj;
    traj.kind = TrajKind::excursion;
    traj.vertices.push_back(x);
    traj.holding.push_back(0.0);

    std::vector<double> cum;
    std::vector<int> dest;
    int cur = x;
    bool first = true;
    for (;;) {
        cum.clear();
        dest.clear();
        double total = 0.0;
        for (auto [z, ei] : net.neighbors(cur)) {
            double w = 0.0;
            int j = net.interior_index(z);
            if (j >= 0)
                w = net.conductance(ei) * q_(j, by);
            else if (!first && z == y)
                w = net.conductance(ei);  // exit step; q at the target is 1
            if (w > 0) {
                total += w;
                cum.push_back(total);
                dest.push_back(z);
            }
        }
        if (cum.empty()) throw std::logic_error("conditioned excursion walk is stuck");
        int pick = rng.pick_cumulative(cum.data(), static_cast<int>(cum.size()));
        cur = dest[static_cast<size_t>(pick)];
        first = false;
        traj.vertices.push_back(cur);
        if (cur == y && net.is_boundary(cur)) {
            traj.holding.push_back(0.0);
            break;
        }
        traj.holding.push_back(rng.exponential(net.total_conductance(cur)));
    }
    return traj;
}

SoupSample ExcursionSampler::sample(const BoundaryFunction& u, RngStream& rng) const {
    const int nb = net_->boundary_count();
    for (double v : u.boundary_values)
        if (v < 0) throw std::invalid_argument("excursion intensity needs nonnegative u");
    Eigen::MatrixXd w(nb, nb);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j)
            w(i, j) = u.boundary_values[static_cast<size_t>(i)] *
                      u.boundary_values[static_cast<size_t>(j)];
    SoupSample out = sample_weighted(w, rng);
    out.u = u;
    return out;
}

SoupSample ExcursionSampler::sample_weighted(const Eigen::MatrixXd& pair_weights,
                                             RngStream& rng) const {
    const int nb = net_->boundary_count();
    if (pair_weights.rows() != nb || pair_weights.cols() != nb)
        throw std::invalid_argument("pair weight matrix has wrong shape");

    std::vector<double> cum;
    cum.reserve(static_cast<size_t>(nb) * nb);
    double total = 0.0;
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
            double w = 0.5 * pair_weights(i, j) * h_(i, j);
            if (w < 0) throw std::invalid_argument("negative excursion pair weight");
            total += w;
            cum.push_back(total);
        }

    SoupSample out;
    out.net = net_;
    out.stream_key = rng.key();
    out.trivial_field.assign(static_cast<size_t>(net_->vertex_count()), 0.0);
    if (total <= 0) return out;

    long count = rng.poisson(total);
    for (long c = 0; c < count; ++c) {
        int flat = rng.pick_cumulative(cum.data(), nb * nb);
        out.trajectories.push_back(draw_excursion(flat / nb, flat % nb, rng));
    }
    return out;
}

SoupSample sample_excursion_ppp(const Network& net, const BoundaryFunction& u, RngStream& rng) {
    return ExcursionSampler(net).sample(u, rng);
}

// -- occupation and projection ---------------------------------------------

OccupationField occupation_field(const SoupSample& soup, bool include_trivial) {
    OccupationField f;
    f.values.assign(static_cast<size_t>(soup.net->vertex_count()), 0.0);
    for (const auto& traj : soup.trajectories)
        for (size_t i = 0; i < traj.vertices.size(); ++i)
            f.values[static_cast<size_t>(traj.vertices[i])] += traj.holding[i];
    if (include_trivial && !soup.trivial_field.empty())
        for (size_t v = 0; v < f.values.size(); ++v) f.values[v] += soup.trivial_field[v];
    return f;
}

SoupSample project_to_network(const RefinedNetwork& refined, const SoupSample& refined_soup) {
    const Network& base = refined.base();
    SoupSample out;
    out.net = &base;
    out.alpha = refined_soup.alpha;
    out.u = refined_soup.u;
    out.stream_key = refined_soup.stream_key;
    out.trivial_field.assign(static_cast<size_t>(base.vertex_count()), 0.0);
    if (!refined_soup.trivial_field.empty())
        for (int v = 0; v < base.vertex_count(); ++v)
            out.trivial_field[static_cast<size_t>(v)] =
                refined_soup.trivial_field[static_cast<size_t>(v)];

    for (const auto& traj : refined_soup.trajectories) {
        // Keep base-vertex visits only; time spent strictly inside edges is
        // excised by the time change.
        std::vector<int> verts;
        std::vector<double> hold;
        auto push = [&](int bv, double h) {
            if (!verts.empty() && verts.back() == bv)
                hold.back() += h;  // re-entry from inside an edge: same sojourn
            else {
                verts.push_back(bv);
                hold.push_back(h);
            }
        };

        if (traj.kind == TrajKind::excursion) {
            for (size_t i = 0; i < traj.vertices.size(); ++i) {
                int bv = refined.base_vertex(traj.vertices[i]);
                if (bv >= 0) push(bv, traj.holding[i]);
            }
            if (static_cast<int>(verts.size()) < 2) continue;
            Trajectory t;
            t.kind = TrajKind::excursion;
            t.vertices = std::move(verts);
            t.holding = std::move(hold);
            out.trajectories.push_back(std::move(t));
        } else {
            // Drop the closing duplicate, project cyclically, then re-close.
            size_t n = traj.vertices.size() - 1;
            for (size_t i = 0; i < n; ++i) {
                int bv = refined.base_vertex(traj.vertices[i]);
                if (bv >= 0) push(bv, traj.holding[i]);
            }
            if (verts.empty()) continue;  // never touches a base vertex
            if (verts.size() > 1 && verts.front() == verts.back()) {
                hold.front() += hold.back();
                verts.pop_back();
                hold.pop_back();
            }
            Trajectory t;
            t.kind = TrajKind::loop;
            t.vertices = std::move(verts);
            t.holding = std::move(hold);
            t.vertices.push_back(t.vertices.front());
            t.holding.push_back(0.0);
            out.trajectories.push_back(std::move(t));
        }
    }
    return out;
}

// -- hitting mass -----------------------------------------------------------

double excursion_hitting_mass(const Network& net, const BoundaryFunction& u,
                              const BoundaryFunction& u_star, const std::vector<int>& cut_vertices,
                              const std::vector<int>& cut_edges) {
    const int nb = net.boundary_count();
    for (int i = 0; i < nb; ++i)
        if (u.boundary_values[static_cast<size_t>(i)] >
            u_star.boundary_values[static_cast<size_t>(i)] + 1e-12)
            throw std::invalid_argument("hitting mass requires u <= u_star");

    std::vector<char> vertex_cut(static_cast<size_t>(net.vertex_count()), 0);
    for (int v : cut_vertices) {
        if (net.is_boundary(v))
            throw std::invalid_argument("cut vertices must be interior");
        vertex_cut[static_cast<size_t>(v)] = 1;
    }
    std::vector<char> edge_cut(static_cast<size_t>(net.edge_count()), 0);
    for (int e : cut_edges) edge_cut[static_cast<size_t>(e)] = 1;

    Eigen::MatrixXd h = boundary_poisson_kernel(net);

    // Kernel of excursions avoiding the cut: walk killed on cut vertices,
    // forbidden from crossing cut edges, but weighted with the original
    // C_tot (these are the original-measure weights of avoiding paths).
    std::vector<int> surv;           // surviving interior vertices
    std::vector<int> surv_index(static_cast<size_t>(net.vertex_count()), -1);
    for (int v : net.interior())
        if (!vertex_cut[static_cast<size_t>(v)]) {
            surv_index[static_cast<size_t>(v)] = static_cast<int>(surv.size());
            surv.push_back(v);
        }

    Eigen::MatrixXd h_avoid = Eigen::MatrixXd::Zero(nb, nb);
    if (!surv.empty()) {
        const int m = static_cast<int>(surv.size());
        std::vector<Eigen::Triplet<double>> trip;
        for (int i = 0; i < m; ++i) {
            int v = surv[static_cast<size_t>(i)];
            trip.emplace_back(i, i, net.total_conductance(v));
            for (auto [w, ei] : net.neighbors(v)) {
                if (edge_cut[static_cast<size_t>(ei)]) continue;
                int j = surv_index[static_cast<size_t>(w)];
                if (j >= 0) trip.emplace_back(i, j, -net.conductance(ei));
            }
        }
        Eigen::SparseMatrix<double> kmat(m, m);
        kmat.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(kmat);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("hitting-mass factorization failed");

        Eigen::MatrixXd cbi = Eigen::MatrixXd::Zero(nb, m);
        for (int bi = 0; bi < nb; ++bi) {
            int b = net.boundary()[static_cast<size_t>(bi)];
            for (auto [w, ei] : net.neighbors(b)) {
                if (edge_cut[static_cast<size_t>(ei)]) continue;
                int j = surv_index[static_cast<size_t>(w)];
                if (j >= 0) cbi(bi, j) += net.conductance(ei);
            }
        }
        h_avoid = cbi * llt.solve(Eigen::MatrixXd(cbi.transpose()));
    }

    double mass = 0.0;
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
            double w = u_star.boundary_values[static_cast<size_t>(i)] *
                           u_star.boundary_values[static_cast<size_t>(j)] -
                       u.boundary_values[static_cast<size_t>(i)] *
                           u.boundary_values[static_cast<size_t>(j)];
            mass += 0.5 * w * (h(i, j) - h_avoid(i, j));
        }
    return mass;
}

void write_trajectories_csv(std::ostream& os, const SoupSample& soup) {
    os << "traj_id,kind,step_index,vertex_id,holding_time\n";
    for (size_t t = 0; t < soup.trajectories.size(); ++t) {
        const auto& traj = soup.trajectories[t];
        const char* kind = traj.kind == TrajKind::loop ? "loop" : "excursion";
        for (size_t i = 0; i < traj.vertices.size(); ++i)
            os << t << ',' << kind << ',' << i << ',' << traj.vertices[i] << ','
               << traj.holding[i] << '\n';
    }
}

}  // namespace gfflab
