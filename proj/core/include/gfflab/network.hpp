#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace gfflab {

struct EdgeSpec {
    int a = -1;
    int b = -1;
    double conductance = 1.0;
};

struct NetworkSpec {
    int vertex_count = 0;
    std::vector<EdgeSpec> edges;
    std::vector<int> boundary;
    std::vector<std::array<double, 2>> positions;            // optional
    std::map<std::string, std::vector<int>> arcs;            // optional named boundary arcs
};

// Finite electrical network with a distinguished nonempty boundary.
// Immutable after construction; all cached factorizations are read-only
// shared state, so instances are safe to share across worker threads.
class Network {
public:
    explicit Network(NetworkSpec spec);

    int vertex_count() const { return n_; }
    int interior_count() const { return static_cast<int>(interior_.size()); }
    int boundary_count() const { return static_cast<int>(boundary_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    const std::vector<EdgeSpec>& edges() const { return edges_; }
    const std::vector<int>& interior() const { return interior_; }
    const std::vector<int>& boundary() const { return boundary_; }
    bool is_boundary(int v) const { return is_boundary_[static_cast<size_t>(v)]; }

    // Index of v within interior() (or -1 for boundary vertices).
    int interior_index(int v) const { return interior_index_[static_cast<size_t>(v)]; }

    double total_conductance(int v) const { return ctot_[static_cast<size_t>(v)]; }

    // Neighbors as (vertex, edge index) pairs.
    const std::vector<std::pair<int, int>>& neighbors(int v) const {
        return adj_[static_cast<size_t>(v)];
    }
    double conductance(int edge_index) const {
        return edges_[static_cast<size_t>(edge_index)].conductance;
    }
    // Edge index between u and v, or -1.
    int edge_between(int u, int v) const;

    bool has_positions() const { return !positions_.empty(); }
    const std::array<double, 2>& position(int v) const { return positions_[static_cast<size_t>(v)]; }
    const std::vector<std::array<double, 2>>& positions() const { return positions_; }

    const std::map<std::string, std::vector<int>>& arcs() const { return arcs_; }
    const std::vector<int>* arc(const std::string& name) const;
    // Marked dual faces (lower-left corner lattice coordinates), present for
    // lattice domains built with two named arcs.
    const std::vector<std::array<int, 2>>& marked_faces() const { return marked_faces_; }
    bool is_lattice() const { return lattice_spacing_ > 0; }
    double lattice_spacing() const { return lattice_spacing_; }
    const std::array<int, 2>& lattice_coord(int v) const {
        return lattice_coords_[static_cast<size_t>(v)];
    }

    // Interior Laplacian factor (sparse LLT of K = -Delta restricted to the
    // interior). Computed once, then shared.
    const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>& interior_factor() const;
    const Eigen::SparseMatrix<double>& interior_matrix() const;

    // Solve K x = rhs on interior indices.
    Eigen::VectorXd solve_interior(const Eigen::VectorXd& rhs) const;

    // Sample with covariance K^{-1}: x = P^T L^{-T} z for iid standard
    // normals z.
    Eigen::VectorXd colored_sample(const Eigen::VectorXd& z) const;

    // Attach square-lattice metadata (used by domain builders and by the
    // interface extraction in the first-passage module).
    void set_lattice_metadata(double spacing, std::vector<std::array<int, 2>> coords,
                              std::vector<std::array<int, 2>> marked);

private:
    int n_ = 0;
    std::vector<EdgeSpec> edges_;
    std::vector<std::vector<std::pair<int, int>>> adj_;
    std::vector<bool> is_boundary_;
    std::vector<int> boundary_;
    std::vector<int> interior_;
    std::vector<int> interior_index_;
    std::vector<double> ctot_;
    std::vector<std::array<double, 2>> positions_;
    std::map<std::string, std::vector<int>> arcs_;

    double lattice_spacing_ = 0;
    std::vector<std::array<int, 2>> lattice_coords_;
    std::vector<std::array<int, 2>> marked_faces_;

    // Lazily-built factorization, shared between copies (the network itself
    // is immutable, so sharing is safe).
    struct FactorCache {
        std::once_flag once;
        Eigen::SparseMatrix<double> kmat;
        std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt;
    };
    std::shared_ptr<FactorCache> cache_ = std::make_shared<FactorCache>();
};

// Green's function table of the interior Laplacian (symmetric positive
// definite; units of resistance).
struct GreenTable {
    Eigen::MatrixXd values;  // interior x interior, indexed by interior_index
    double at(const Network& net, int x, int y) const {
        return values(net.interior_index(x), net.interior_index(y));
    }
};

// Boundary values with their cached harmonic extension to every vertex.
struct BoundaryFunction {
    std::vector<double> boundary_values;  // indexed by position in net.boundary()
    std::vector<double> extension;        // all vertices

    static BoundaryFunction constant(const Network& net, double c);
};

struct DomainSpec {
    enum class Kind { square, disk, box } kind = Kind::square;
    double size = 1.0;     // square side / disk radius
    int box_half = 1;      // box: {-N..N}^2
    // Optional boundary split into two arcs B1/B2 by the sign of one
    // coordinate relative to the domain center; produces marked dual faces.
    std::optional<char> split_axis;  // 'x' or 'y'
};

// -- operations ---------------------------------------------------------

Network build_network(NetworkSpec spec);
Network lattice_domain(const DomainSpec& domain, int level);

// Full nx x ny rectangular grid with unit conductances, unit spacing and the
// perimeter as boundary; optional arc split as in DomainSpec.
Network grid_network(int nx, int ny, std::optional<char> split_axis = std::nullopt);

GreenTable green_function(const Network& net);

BoundaryFunction harmonic_extension(const Network& net, const std::vector<double>& boundary_values);

double dirichlet_energy(const Network& net, const std::vector<double>& f);

// Boundary Poisson kernel H(x,y) over boundary x boundary, in boundary()
// order. Closed form C_BI G C_IB; validated against the path-enumeration
// oracle in the acceptance suite.
Eigen::MatrixXd boundary_poisson_kernel(const Network& net);

Network rescale_conductances(const Network& net, const BoundaryFunction& u);

// General Dirichlet solve: values fixed on `fixed` vertices, discretely
// harmonic elsewhere. Vertices unreachable from the fixed set get 0.
std::vector<double> solve_dirichlet(const Network& net, const std::vector<char>& fixed,
                                    const std::vector<double>& fixed_values);

// Dyadic refinement: every base edge split into 2^level sub-edges of
// conductance 2^level * C(e).
class RefinedNetwork {
public:
    RefinedNetwork(const Network& base, int level);

    const Network& net() const { return *net_; }
    const Network& base() const { return *base_; }
    int level() const { return level_; }
    int subdivisions() const { return 1 << level_; }

    // Refined vertex -> base vertex id, or -1 for sub-vertices.
    int base_vertex(int refined_v) const { return base_vertex_[static_cast<size_t>(refined_v)]; }
    // Refined vertices along base edge e: chain[0] = e.a, chain.back() = e.b.
    const std::vector<int>& chain(int base_edge) const {
        return chains_[static_cast<size_t>(base_edge)];
    }
    // Base edge owning a refined edge, and the slot within the chain.
    int base_edge_of(int refined_edge) const {
        return refined_edge_base_[static_cast<size_t>(refined_edge)];
    }
    int slot_of(int refined_edge) const {
        return refined_edge_slot_[static_cast<size_t>(refined_edge)];
    }

private:
    std::shared_ptr<const Network> base_;
    std::shared_ptr<const Network> net_;
    int level_;
    std::vector<int> base_vertex_;
    std::vector<std::vector<int>> chains_;
    std::vector<int> refined_edge_base_;
    std::vector<int> refined_edge_slot_;
};

RefinedNetwork refine(const Network& net, int level);

}  // namespace gfflab
