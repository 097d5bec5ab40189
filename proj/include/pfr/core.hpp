#ifndef PFR_CORE_HPP
#define PFR_CORE_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pfr {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Real m×n matrix behind a single access contract, stored either densely
/// (column-major) or as compressed sparse rows. Immutable and cheap to copy:
/// copies share the underlying storage.
class CoefficientMatrix {
 public:
  explicit CoefficientMatrix(DenseMatrix dense);
  explicit CoefficientMatrix(SparseMatrix sparse);

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return sparse_ != nullptr; }
  Index nonzeros() const;

  const DenseMatrix* dense() const { return dense_.get(); }
  const SparseMatrix* sparse() const { return sparse_ ? &sparse_->by_row : nullptr; }

  Vector multiply(const Vector& x) const;            // A x
  Vector multiply_transpose(const Vector& y) const;  // Aᵀ y

  double row_dot(Index row, const Vector& x) const;                // ⟨a_row, x⟩
  void add_row(Index row, double scale, Vector& out) const;        // out += scale · a_row
  double column_dot(Index col, const Vector& y) const;             // ⟨A_col, y⟩
  void add_column(Index col, double scale, Vector& out) const;     // out += scale · A_col
  double coeff(Index row, Index col) const;

  Vector row_squared_norms() const;
  Vector column_squared_norms() const;
  double frobenius_squared() const;
  double trace() const;

  DenseMatrix to_dense() const;
  CoefficientMatrix transpose() const;

  /// Calls f(row, col, value) for every stored nonzero, row-major order.
  template <class F>
  void for_each_nonzero(F&& f) const {
    if (dense_) {
      for (Index i = 0; i < dense_->rows(); ++i)
        for (Index j = 0; j < dense_->cols(); ++j)
          if ((*dense_)(i, j) != 0.0) f(i, j, (*dense_)(i, j));
    } else {
      for (Index i = 0; i < sparse_->by_row.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(sparse_->by_row, i); it; ++it)
          if (it.value() != 0.0) f(i, it.col(), it.value());
    }
  }

 private:
  struct SparseStorage {
    SparseMatrix by_row;
    Eigen::SparseMatrix<double, Eigen::ColMajor> by_col;
  };

  std::shared_ptr<const DenseMatrix> dense_;
  std::shared_ptr<const SparseStorage> sparse_;
};

/// A x = b with finite entries and a nonzero coefficient matrix.
class LinearSystem {
 public:
  LinearSystem(CoefficientMatrix a, Vector b);
  LinearSystem(DenseMatrix a, Vector b) : LinearSystem(CoefficientMatrix(std::move(a)), std::move(b)) {}
  LinearSystem(SparseMatrix a, Vector b) : LinearSystem(CoefficientMatrix(std::move(a)), std::move(b)) {}

  const CoefficientMatrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  Index m() const { return a_.rows(); }
  Index n() const { return a_.cols(); }
  double frobenius_squared() const { return frob_sq_; }

  Vector residual(const Vector& x) const;  // A x − b

 private:
  CoefficientMatrix a_;
  Vector b_;
  double frob_sq_;
};

struct SpectralInfo {
  double sigma_min_nz = 0.0;
  double sigma_max = 0.0;
  double frob_sq = 0.0;
  Index rank = 0;
  Vector singular_values;  // the retained σ_1 ≥ … ≥ σ_r > 0
  std::optional<DenseMatrix> right_vectors;  // n×n, orthogonal
  std::optional<DenseMatrix> left_vectors;   // m×min(m,n), thin
  double rank_threshold = 0.0;

  /// σ_ℓ for 0 ≤ ℓ < n, zero past the rank.
  double singular_value(Index ell) const;
};

/// Full SVD of `a`. With `with_vectors` the singular vectors needed by
/// reference_solutions and the direction-decay tools are retained.
SpectralInfo compute_spectral_info(const CoefficientMatrix& a, bool with_vectors = true);
SpectralInfo compute_spectral_info(const DenseMatrix& a, bool with_vectors = true);

struct ReferenceSolutions {
  Vector x_ls;     // A†b
  Vector x0_star;  // A†b + (I − A†A) x0
  Vector r_star;   // A x_ls − b
};

ReferenceSolutions reference_solutions(const LinearSystem& system, const Vector& x0);
ReferenceSolutions reference_solutions(const LinearSystem& system, const Vector& x0,
                                       const SpectralInfo& info);

/// Orthogonal projection onto null(A) using the stored right singular vectors.
Vector null_space_component(const SpectralInfo& info, const Vector& v);

/// True when the least-squares residual vanishes relative to ‖b‖.
bool is_consistent(const LinearSystem& system, const ReferenceSolutions& refs,
                   double relative_tol = 1e-10);

enum class Metric { RSE, RRE };

std::string to_string(Metric metric);
Metric parse_metric(const std::string& text);

struct SolverConfig {
  double alpha = 1.0;
  double omega = 0.0;
  std::int64_t max_iter = 100000;
  double tol = 1e-6;
  Metric metric = Metric::RSE;
  std::uint64_t seed = 0;
  std::int64_t trace_every = 1;
  // Stopping-rule evaluation stride; 1 checks every iteration.
  std::int64_t check_every = 1;
  // Keep a copy of x at every traced iteration.
  bool record_iterates = false;
  // Wall-clock budget in seconds; 0 means none.
  double time_limit = 0.0;

  void validate() const;
};

struct TraceEntry {
  std::int64_t k;
  double metric_value;
  double wall_seconds;
};

struct IterationTrace {
  std::vector<TraceEntry> entries;
};

/// ‖x − x_ref‖² / ‖x0 − x_ref‖².
double rse(const Vector& x, const Vector& x_ref, const Vector& x0);
/// ‖r − r_star‖² / ‖r0 − r_star‖².
double rre(const Vector& r, const Vector& r_star, const Vector& r0);

}  // namespace pfr

#endif  // PFR_CORE_HPP
