#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "gfflab/gff.hpp"
#include "gfflab/network.hpp"
#include "gfflab/rng.hpp"

namespace gfflab {

enum class TrajKind { loop, excursion };

// One loop or boundary-to-boundary excursion: nearest-neighbor vertex visits
// with a holding time per visit. Loops repeat the root as the final entry
// with holding 0 (the closing visit is the starting one). Excursions start
// and end on the boundary with holding 0 there.
struct Trajectory {
    TrajKind kind = TrajKind::loop;
    std::vector<int> vertices;
    std::vector<double> holding;
};

struct SoupSample {
    const Network* net = nullptr;
    std::vector<Trajectory> trajectories;
    // Occupation of loops that never leave one vertex, per vertex id
    // (Gamma(alpha, C_tot) at interior vertices, 0 at the boundary). These
    // carry infinite measure but finite occupation, so they are kept as a
    // field rather than as trajectories.
    std::vector<double> trivial_field;
    double alpha = 0.0;
    BoundaryFunction u;  // excursion soups: the boundary intensity used
    uint64_t stream_key = 0;
};

struct OccupationField {
    std::vector<double> values;  // per vertex id
};

// Mass assigned to the unrooted loop class of a closed interior skeleton
// (first vertex repeated last): (number of distinct rootings) / n times the
// product of jump probabilities.
double loop_measure_weight(const Network& net, const std::vector<int>& skeleton);

// Total mass of nontrivial interior loops, -log det(I - P_interior),
// evaluated as sum log C_tot - log det K. Oracle for the sampler tests.
double total_loop_mass(const Network& net);

// Loop-soup sampler. Precomputes, for each interior vertex in index order,
// the return probability and conditioned step tables of the walk killed on
// the boundary and on all earlier interior vertices; sampling is then a pure
// function of (alpha, stream).
class LoopSoupSampler {
public:
    explicit LoopSoupSampler(const Network& net);

    SoupSample sample(double alpha, RngStream& rng) const;

    // log(C_tot(v_i) G_i(v_i, v_i)) per stage; the sum is total_loop_mass.
    const std::vector<double>& stage_log_masses() const { return stage_log_mass_; }

private:
    struct Stage {
        int root;
        double return_prob;            // r_i
        double log_mass;               // -log(1 - r_i)
        std::vector<double> step_cum;  // flattened cumulative step weights
        std::vector<int> step_off;     // per-vertex offset into step_cum
    };
    const Network* net_;
    std::vector<Stage> stages_;
    std::vector<double> stage_log_mass_;
};

SoupSample sample_loop_soup(const Network& net, double alpha, RngStream& rng);

// Excursion sampler. The intensity of the point process is
// (1/2) sum over ordered boundary pairs of w(x,y) H(x,y) times the
// excursion bridge law; for the standard process w(x,y) = u(x)u(y).
class ExcursionSampler {
public:
    explicit ExcursionSampler(const Network& net);

    SoupSample sample(const BoundaryFunction& u, RngStream& rng) const;
    // General nonnegative symmetric pair weights over boundary() indices.
    SoupSample sample_weighted(const Eigen::MatrixXd& pair_weights, RngStream& rng) const;

    const Eigen::MatrixXd& poisson_kernel() const { return h_; }

private:
    Trajectory draw_excursion(int bx, int by, RngStream& rng) const;

    const Network* net_;
    Eigen::MatrixXd h_;  // boundary x boundary Poisson kernel
    Eigen::MatrixXd q_;  // interior x boundary: exit-at-y probability
};

SoupSample sample_excursion_ppp(const Network& net, const BoundaryFunction& u, RngStream& rng);

OccupationField occupation_field(const SoupSample& soup, bool include_trivial);

// Time change of a refined-network soup onto its base network: sub-vertex
// visits are dropped (holding accumulates at the enclosing base-vertex
// visits) and trajectories that never touch a base vertex are removed.
SoupSample project_to_network(const RefinedNetwork& refined, const SoupSample& refined_soup);

// Exact mass, under the difference of excursion intensities u_star vs u, of
// excursions that hit the cut (a vertex set and/or an edge set). Paths
// avoiding the cut keep their original measure weights (killing, not network
// surgery), so the value is
//   (1/2) sum (u*u* - uu)(x,y) [H(x,y) - H_avoid(x,y)].
double excursion_hitting_mass(const Network& net, const BoundaryFunction& u,
                              const BoundaryFunction& u_star, const std::vector<int>& cut_vertices,
                              const std::vector<int>& cut_edges);

// CSV dump: traj_id,kind,step_index,vertex_id,holding_time.
void write_trajectories_csv(std::ostream& os, const SoupSample& soup);

}  // namespace gfflab
