#include "pfr/core.hpp"

#include "pfr/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pfr {

CoefficientMatrix::CoefficientMatrix(DenseMatrix dense)
    : dense_(std::make_shared<const DenseMatrix>(std::move(dense))) {}

CoefficientMatrix::CoefficientMatrix(SparseMatrix sparse) {
  sparse.makeCompressed();
  auto storage = std::make_shared<SparseStorage>();
  storage->by_col = sparse;
  storage->by_col.makeCompressed();
  storage->by_row = std::move(sparse);
  sparse_ = std::move(storage);
}

Index CoefficientMatrix::rows() const { return dense_ ? dense_->rows() : sparse_->by_row.rows(); }

Index CoefficientMatrix::cols() const { return dense_ ? dense_->cols() : sparse_->by_row.cols(); }

Index CoefficientMatrix::nonzeros() const {
  if (sparse_) return sparse_->by_row.nonZeros();
  return static_cast<Index>((dense_->array() != 0.0).count());
}

Vector CoefficientMatrix::multiply(const Vector& x) const {
  if (dense_) return (*dense_) * x;
  return sparse_->by_row * x;
}

Vector CoefficientMatrix::multiply_transpose(const Vector& y) const {
  if (dense_) return dense_->transpose() * y;
  return sparse_->by_col.transpose() * y;
}

double CoefficientMatrix::row_dot(Index row, const Vector& x) const {
  if (dense_) return dense_->row(row).dot(x);
  double s = 0.0;
  for (SparseMatrix::InnerIterator it(sparse_->by_row, row); it; ++it) s += it.value() * x[it.col()];
  return s;
}

void CoefficientMatrix::add_row(Index row, double scale, Vector& out) const {
  if (dense_) {
    out.noalias() += scale * dense_->row(row).transpose();
    return;
  }
  for (SparseMatrix::InnerIterator it(sparse_->by_row, row); it; ++it)
    out[it.col()] += scale * it.value();
}

double CoefficientMatrix::column_dot(Index col, const Vector& y) const {
  if (dense_) return dense_->col(col).dot(y);
  double s = 0.0;
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor>;
  for (ColMajor::InnerIterator it(sparse_->by_col, col); it; ++it) s += it.value() * y[it.row()];
  return s;
}

void CoefficientMatrix::add_column(Index col, double scale, Vector& out) const {
  if (dense_) {
    out.noalias() += scale * dense_->col(col);
    return;
  }
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor>;
  for (ColMajor::InnerIterator it(sparse_->by_col, col); it; ++it)
    out[it.row()] += scale * it.value();
}

double CoefficientMatrix::coeff(Index row, Index col) const {
  if (dense_) return (*dense_)(row, col);
  return sparse_->by_row.coeff(row, col);
}

Vector CoefficientMatrix::row_squared_norms() const {
  if (dense_) return dense_->rowwise().squaredNorm();
  Vector out = Vector::Zero(rows());
  for (Index i = 0; i < rows(); ++i)
    for (SparseMatrix::InnerIterator it(sparse_->by_row, i); it; ++it) out[i] += it.value() * it.value();
  return out;
}

Vector CoefficientMatrix::column_squared_norms() const {
  if (dense_) return dense_->colwise().squaredNorm().transpose();
  Vector out = Vector::Zero(cols());
  for (Index i = 0; i < rows(); ++i)
    for (SparseMatrix::InnerIterator it(sparse_->by_row, i); it; ++it)
      out[it.col()] += it.value() * it.value();
  return out;
}

double CoefficientMatrix::frobenius_squared() const {
  if (dense_) return dense_->squaredNorm();
  return sparse_->by_row.squaredNorm();
}

double CoefficientMatrix::trace() const {
  double t = 0.0;
  for (Index i = 0; i < std::min(rows(), cols()); ++i) t += coeff(i, i);
  return t;
}

DenseMatrix CoefficientMatrix::to_dense() const {
  if (dense_) return *dense_;
  return DenseMatrix(sparse_->by_row);
}

CoefficientMatrix CoefficientMatrix::transpose() const {
  if (dense_) return CoefficientMatrix(DenseMatrix(dense_->transpose()));
  return CoefficientMatrix(SparseMatrix(sparse_->by_row.transpose()));
}

LinearSystem::LinearSystem(CoefficientMatrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() < 1 || a_.cols() < 1) throw DomainError("coefficient matrix must be at least 1x1");
  if (b_.size() != a_.rows())
    throw DomainError("right-hand side has " + std::to_string(b_.size()) + " entries, expected " +
                      std::to_string(a_.rows()));
  if (!b_.allFinite()) throw DomainError("right-hand side has non-finite entries");
  bool finite = true;
  a_.for_each_nonzero([&](Index, Index, double v) { finite = finite && std::isfinite(v); });
  if (!finite) throw DomainError("coefficient matrix has non-finite entries");
  frob_sq_ = a_.frobenius_squared();
  if (!(frob_sq_ > 0.0)) throw DomainError("coefficient matrix is identically zero");
}

Vector LinearSystem::residual(const Vector& x) const {
  Vector r = a_.multiply(x);
  r -= b_;
  return r;
}

double SpectralInfo::singular_value(Index ell) const {
  if (ell < 0) throw DomainError("singular index must be nonnegative");
  if (right_vectors && ell >= right_vectors->cols())
    throw DomainError("singular index " + std::to_string(ell) + " out of range");
  return ell < rank ? singular_values[ell] : 0.0;
}

SpectralInfo compute_spectral_info(const DenseMatrix& a, bool with_vectors) {
  if (!a.allFinite()) throw DomainError("matrix has non-finite entries");
  const double frob_sq = a.squaredNorm();
  if (!(frob_sq > 0.0)) throw DomainError("matrix is identically zero");

  const unsigned options = with_vectors ? (Eigen::ComputeThinU | Eigen::ComputeFullV) : 0u;
  Eigen::BDCSVD<DenseMatrix> svd(a, options);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed to converge");

  SpectralInfo info;
  const Vector& sv = svd.singularValues();
  info.sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  info.rank_threshold = static_cast<double>(std::max(a.rows(), a.cols())) * info.sigma_max *
                        std::numeric_limits<double>::epsilon();
  Index rank = 0;
  while (rank < sv.size() && sv[rank] > info.rank_threshold) ++rank;
  info.rank = rank;
  info.singular_values = sv.head(rank);
  info.sigma_min_nz = sv[rank - 1];
  info.frob_sq = frob_sq;
  if (with_vectors) {
    info.right_vectors = svd.matrixV();
    info.left_vectors = svd.matrixU();
  }
  return info;
}

SpectralInfo compute_spectral_info(const CoefficientMatrix& a, bool with_vectors) {
  return compute_spectral_info(a.to_dense(), with_vectors);
}

ReferenceSolutions reference_solutions(const LinearSystem& system, const Vector& x0) {
  return reference_solutions(system, x0, compute_spectral_info(system.a(), true));
}

ReferenceSolutions reference_solutions(const LinearSystem& system, const Vector& x0,
                                       const SpectralInfo& info) {
  if (x0.size() != system.n())
    throw DomainError("initial point has " + std::to_string(x0.size()) + " entries, expected " +
                      std::to_string(system.n()));
  if (!info.right_vectors || !info.left_vectors)
    throw DomainError("reference solutions need singular vectors");
  const Index r = info.rank;
  const auto u = info.left_vectors->leftCols(r);
  const auto v = info.right_vectors->leftCols(r);

  ReferenceSolutions refs;
  Vector coeffs = u.transpose() * system.b();
  coeffs.array() /= info.singular_values.array();
  refs.x_ls = v * coeffs;
  refs.x0_star = refs.x_ls + null_space_component(info, x0);
  refs.r_star = system.residual(refs.x_ls);
  return refs;
}

Vector null_space_component(const SpectralInfo& info, const Vector& v) {
  if (!info.right_vectors) throw DomainError("null-space projection needs right singular vectors");
  const Index n = info.right_vectors->cols();
  const auto null_basis = info.right_vectors->rightCols(n - info.rank);
  return null_basis * (null_basis.transpose() * v);
}

bool is_consistent(const LinearSystem& system, const ReferenceSolutions& refs, double relative_tol) {
  const double scale = std::max(system.b().norm(), std::numeric_limits<double>::min());
  return refs.r_star.norm() <= relative_tol * scale;
}

std::string to_string(Metric metric) { return metric == Metric::RSE ? "RSE" : "RRE"; }

Metric parse_metric(const std::string& text) {
  if (text == "RSE" || text == "rse") return Metric::RSE;
  if (text == "RRE" || text == "rre") return Metric::RRE;
  throw DomainError("unknown metric '" + text + "'");
}

void SolverConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("stepsize alpha must be positive");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw DomainError("momentum omega must be nonnegative");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (max_iter < 1) throw DomainError("max_iter must be positive");
  if (trace_every < 1) throw DomainError("trace_every must be positive");
  if (check_every < 1) throw DomainError("check_every must be positive");
  if (!(time_limit >= 0.0)) throw DomainError("time_limit must be nonnegative");
}

namespace {

double relative_squared_error(const Vector& v, const Vector& ref, const Vector& start, const char* name) {
  if (v.size() != ref.size() || start.size() != ref.size())
    throw DomainError(std::string(name) + ": dimension mismatch");
  const double denom = (start - ref).squaredNorm();
  if (!(denom > 0.0)) throw DomainError(std::string(name) + ": initial point equals the reference");
  return (v - ref).squaredNorm() / denom;
}

}  // namespace

double rse(const Vector& x, const Vector& x_ref, const Vector& x0) {
  return relative_squared_error(x, x_ref, x0, "rse");
}

double rre(const Vector& r, const Vector& r_star, const Vector& r0) {
  return relative_squared_error(r, r_star, r0, "rre");
}

}  // namespace pfr
