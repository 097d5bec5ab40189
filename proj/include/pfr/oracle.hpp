#ifndef PFR_ORACLE_HPP
#define PFR_ORACLE_HPP

#include "pfr/core.hpp"
#include "pfr/rng.hpp"
#include "pfr/samplers.hpp"
#include "pfr/theory.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pfr {

/// Entrywise mean of a random matrix with per-entry standard errors.
/// Exact estimates come from enumeration and carry zero errors; with a single
/// Monte-Carlo sample the errors are NaN.
struct ExpectationEstimate {
  DenseMatrix mean;
  DenseMatrix stderr_matrix;
  std::int64_t n_samples = 0;
  bool exact = false;

  /// max |mean − target| / stderr over entries. Entries with zero error count
  /// as 0 when they agree to `zero_tol` and as +inf otherwise.
  double max_standardized_error(const DenseMatrix& target, double zero_tol = 1e-12) const;
  double max_abs_error(const DenseMatrix& target) const;
};

/// T1T2ᵀ (n×n) and S1S2ᵀ (m×m) of one realization, written out densely, so
/// that the update operator is column_side · Aᵀ · row_side.
struct SketchFactors {
  DenseMatrix column_side;
  DenseMatrix row_side;
};

SketchFactors materialize_factors(const Sampler& sampler, const SampleRealization& sample);

enum class EstimatePath { Auto, MonteCarlo };

/// E[T1T2ᵀAᵀS1S2ᵀ]. Auto enumerates finite supports and samples the Gaussian
/// methods; MonteCarlo samples in every case.
ExpectationEstimate estimate_update_operator(const Sampler& sampler, std::int64_t n_samples, RandomStream& rng,
                                             EstimatePath path = EstimatePath::Auto);
ExpectationEstimate estimate_update_operator(const SamplerSpec& spec, const LinearSystem& system,
                                             std::int64_t n_samples, RandomStream& rng,
                                             EstimatePath path = EstimatePath::Auto);

struct FourthMomentCheck {
  ExpectationEstimate estimate;  // mean of S Sᵀ A Aᵀ S Sᵀ
  DenseMatrix target;            // (p² + p) A Aᵀ + p ‖A‖_F² I
  double max_rel_err = 0.0;      // ‖estimate − target‖_F / ‖target‖_F
};

/// S is m×p standard Gaussian.
FourthMomentCheck check_gaussian_fourth_moment(const DenseMatrix& a, Index p, std::int64_t n_samples,
                                               RandomStream& rng);

struct BetaEstimate {
  double value = 0.0;
  double stderr_value = 0.0;  // delta method through the top eigenvector; 0 when exact
  ExpectationEstimate matrix;
  bool exact() const { return matrix.exact; }
};

/// Spectral norm of the expectation behind `kind`. ColumnSketch and RowSketch
/// need the opposite factor to be a multiple of the identity in every draw;
/// DomainError otherwise.
BetaEstimate estimate_beta(const Sampler& sampler, BetaKind kind, std::int64_t n_samples, RandomStream& rng,
                           EstimatePath path = EstimatePath::Auto);
BetaEstimate estimate_beta(const SamplerSpec& spec, const LinearSystem& system, BetaKind kind,
                           std::int64_t n_samples, RandomStream& rng, EstimatePath path = EstimatePath::Auto);

struct DecayPoint {
  std::int64_t k;
  double mean;
  double stderr_value;
};

/// Trial means of ⟨x^k − x⁰_*, v_ℓ⟩ for k = 0..k_max under PFR, ℓ 0-based.
/// Trial t draws from rng.split(t).
std::vector<DecayPoint> empirical_direction_decay(const LinearSystem& system, const SamplerSpec& spec,
                                                  const Vector& x0, double alpha, Index ell, std::int64_t k_max,
                                                  int n_trials, RandomStream& rng);

/// Per-step ratio from a least-squares fit of log|mean| against k, over the
/// leading points whose mean exceeds min_snr standard errors.
double fit_decay_ratio(const std::vector<DecayPoint>& points, double min_snr = 10.0);

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::int64_t operator_samples = 100000;
  std::int64_t fourth_moment_samples = 1000000;
  int decay_trials = 2000;
  // replaces RK's row weights by uniform ones; the identity check must then fail
  bool corrupt_sampler = false;
};

struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double bound = 0.0;
  std::string band;  // how statistic is compared with bound
  bool pass = false;
  bool exact = false;
  std::int64_t n_samples = 0;
};

std::vector<CheckResult> run_verification_suite(const VerifyOptions& options = {});
std::string format_verification_table(const std::vector<CheckResult>& results);

}  // namespace pfr

#endif  // PFR_ORACLE_HPP
