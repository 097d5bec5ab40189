#ifndef PFR_DATA_HPP
#define PFR_DATA_HPP

#include "pfr/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace pfr {

/// m×n matrix of i.i.d. standard normals.
DenseMatrix gen_gaussian(Index m, Index n, std::uint64_t seed);

/// Gaussian draw whose singular values are remapped affinely onto
/// [σ_max/kappa, σ_max], so that σ_max/σ_min = kappa. Works for either shape.
DenseMatrix gen_conditioned(Index m, Index n, double kappa, std::uint64_t seed);

/// Sparse matrix with singular values spaced geometrically from 1 down to
/// 1/kappa (so the condition number is kappa when m, n ≥ 1) and about
/// density·m·n nonzeros. Starts from a permuted diagonal and applies random
/// plane rotations to pairs of rows and of columns until the fill is reached.
/// density = 1 returns the dense conditioned draw in sparse storage.
/// `warning` (optional) receives a note when the fill is too low to touch
/// every row and column.
SparseMatrix gen_sparse(Index m, Index n, double density, double kappa, std::uint64_t seed,
                        std::string* warning = nullptr);

enum class RhsMode { Consistent, Inconsistent };

struct RhsRecipe {
  RhsMode mode = RhsMode::Consistent;
  std::uint64_t x_star_seed = 0;
};

struct RightHandSide {
  Vector b;
  Vector x_star;
};

/// Consistent: b = A x*. Inconsistent: b = A x* + N z with N an orthonormal
/// basis of null(Aᵀ) and z drawn from `seed`.
RightHandSide make_rhs(const CoefficientMatrix& a, const RhsRecipe& recipe, std::uint64_t seed);
RightHandSide make_rhs(const DenseMatrix& a, const RhsRecipe& recipe, std::uint64_t seed);

RhsMode parse_rhs_mode(const std::string& text);
std::string to_string(RhsMode mode);

/// Coordinate files give sparse storage, array files dense storage.
CoefficientMatrix read_matrix_market(const std::string& path);
CoefficientMatrix read_matrix_market(std::istream& in);

/// Coordinate real general, values printed with 17 significant digits.
void write_matrix_market(const std::string& path, const CoefficientMatrix& a);
void write_matrix_market(std::ostream& out, const CoefficientMatrix& a);

enum class GraphKind { Cycle, Line, RGG };

struct GraphTopology {
  GraphKind kind = GraphKind::Cycle;
  Index n_nodes = 0;
  double radius = 0.0;  // RGG only; 0 selects default_rgg_radius(n_nodes)
};

GraphKind parse_graph_kind(const std::string& text);
std::string to_string(GraphKind kind);

/// √(log n / n).
double default_rgg_radius(Index n_nodes);

struct IncidenceSystem {
  LinearSystem system;                    // signed incidence matrix, b = 0
  double c_bar;                           // mean of the private values
  std::vector<std::pair<Index, Index>> edges;  // (u, v) with u < v, one per row
};

/// Each edge (u, v), u < v, becomes a row with +1 at u and −1 at v. RGG points
/// come from `seed`; a disconnected draw is regenerated up to 50 times.
IncidenceSystem incidence_system(const GraphTopology& topo, const Vector& c, std::uint64_t seed);

/// Private node values for the consensus experiment, standard normal.
Vector node_values(Index n_nodes, std::uint64_t seed);

}  // namespace pfr

#endif  // PFR_DATA_HPP
