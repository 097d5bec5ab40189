#ifndef PFR_THEORY_HPP
#define PFR_THEORY_HPP

#include "pfr/core.hpp"
#include "pfr/samplers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pfr {

/// Which convergence result supplies the rate formulas. Each id fixes the
/// β-constant it needs, the admissible stepsize range, and the quantity its
/// envelope bounds.
enum class TheoremId {
  NoMomentum,                // residual rate η of plain PFR (ω = 0 only)
  General,                   // residual rate for any system, constant β
  FullColumnRank,            // ‖x − A†b‖² rate, constant β1
  FullColumnRankConsistent,  // same, consistent system, wider stepsize range
  ColumnSketchOnly,          // S1 = S2 = √ρ I, residual rate, constant β2
  RowSketchOnly,             // T1 = T2 = √ρ I, consistent, ‖x − x⁰_*‖² rate, constant β3
  AnnihilatedResidual,       // every draw maps r* to zero, residual rate, constant β
};

/// The four expectation constants.
///   General:      ‖E[YᵀAᵀA Y]‖,       Y = T1T2ᵀAᵀS1S2ᵀ
///   IterateGram:  ‖E[YᵀY]‖             (β1)
///   ColumnSketch: ‖E[T2T1ᵀAᵀA T1T2ᵀ]‖  (β2, S scalar)
///   RowSketch:    ‖E[S2S1ᵀA Aᵀ S1S2ᵀ]‖ (β3, T scalar)
enum class BetaKind { General, IterateGram, ColumnSketch, RowSketch };

enum class EnvelopeQuantity {
  ResidualError,          // E‖r − r*‖²
  LeastSquaresError,      // E‖x − A†b‖²
  ProjectedSolutionError  // E‖x − x⁰_*‖²
};

std::string to_string(TheoremId id);
TheoremId parse_theorem_id(const std::string& text);
std::string to_string(BetaKind kind);
BetaKind beta_kind_for(TheoremId id);
EnvelopeQuantity envelope_quantity(TheoremId id);

/// The constant each method is usually analysed with: β3 for the row-action
/// methods, β2 for the column-sketch methods, β for DSGS and SGC.
BetaKind primary_beta_kind(SamplerKind kind);

/// Closed-form β-constant. Throws DomainError when `kind` is not defined for
/// the method (β2 needs a scalar S, β3 a scalar T).
double beta_closed_form(const SamplerSpec& spec, const SpectralInfo& info, const LinearSystem& system,
                        BetaKind kind);
double beta_closed_form(const SamplerSpec& spec, const SpectralInfo& info, const LinearSystem& system);

/// ρ with T1T2ᵀ = ρI (row-action methods) or S1S2ᵀ = ρI (column-sketch methods).
double scalar_factor(const SamplerSpec& spec, const LinearSystem& system);

struct QTau {
  double q;
  double tau;
};

struct MomentumCoefficients {
  double gamma1;
  double gamma2;
};

/// Dominant root of t² = γ1 t + γ2. Throws InadmissibleError if γ1 + γ2 ≥ 1.
QTau rate_q(double gamma1, double gamma2);

/// Upper end of the open stepsize interval for the theorem.
double alpha_upper_bound(TheoremId id, const SpectralInfo& info, double beta, double rho = 1.0);

/// γ1, γ2 for the theorem; throws InadmissibleError when α leaves its range.
MomentumCoefficients momentum_rate(TheoremId id, const SpectralInfo& info, double beta, double alpha, double omega,
                                   double rho = 1.0);

/// η = 1 − 2ασ_min²/‖A‖_F² + 2α²β.
double no_momentum_rate(const SpectralInfo& info, double beta, double alpha);

/// Largest ω keeping γ1 + γ2 < 1 under the general residual theorem.
double momentum_upper_bound(const SpectralInfo& info, double beta, double alpha);
/// Same for any theorem; all share the ω-dependence of γ1 + γ2.
double momentum_upper_bound(TheoremId id, const SpectralInfo& info, double beta, double alpha, double rho = 1.0);

struct RateReport {
  TheoremId theorem = TheoremId::General;
  SamplerSpec spec;
  double alpha = 0.0;
  double omega = 0.0;
  double beta = 0.0;
  std::optional<double> beta1;
  std::optional<double> beta2;
  std::optional<double> beta3;
  double rho = 1.0;
  double theorem_beta = 0.0;  // the constant the theorem uses
  double eta = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double q = 0.0;
  double tau = 0.0;
  double alpha_max = 0.0;
  double omega_max = 0.0;
  double offset_coefficient = 0.0;  // ζ/‖r*‖²: 2α²β (General), 2α²β1 (FullColumnRank), else 0
  bool admissible = false;
  std::string inadmissible_reason;
  std::optional<double> accel_omega_lo;
  std::optional<double> accel_omega_recommended;

  /// Flat key=value lines, one per field.
  std::string to_key_values() const;
};

/// Fills every constant for the method and evaluates the theorem at (α, ω).
/// Inadmissible parameters are recorded in the report rather than thrown.
RateReport rate_report(TheoremId id, const SamplerSpec& spec, const SpectralInfo& info, const LinearSystem& system,
                       double alpha, double omega);

/// Bound after k updates (on the iterate x^{k+1} with x¹ = x⁰):
/// q^k(1+τ)·err0 + ζ(1 − q^k)/(1 − q), ζ = offset_coefficient·‖r*‖².
/// NoMomentum uses η^k·err0 + ζ(1 − η^k)/(1 − η).
double residual_envelope(TheoremId id, std::int64_t k, double err0_sq, double r_star_norm_sq,
                         const RateReport& report);

/// (1 − ασ_min²/‖A‖_F²)^{2k}, for 0 < α ≤ ‖A‖_F²/σ_max².
double expected_iterate_rate(const SpectralInfo& info, double alpha, std::int64_t k);

/// (1 − ασ_ℓ²/‖A‖_F²)^k with ℓ 0-based; σ_ℓ = 0 past the rank.
double direction_decay(const SpectralInfo& info, double alpha, Index ell, std::int64_t k);

struct OmegaRange {
  double lo;
  double hi;
  double recommended;
};

/// Momentum window with the accelerated ω^k rate for ‖E[x^k − x⁰_*]‖².
OmegaRange accelerated_omega_range(const SpectralInfo& info, double alpha);

double default_stepsize(const SamplerSpec& spec, const SpectralInfo& info, const LinearSystem& system);

/// Theorems whose hypotheses hold for this method and system, General first.
std::vector<TheoremId> applicable_theorems(const SamplerSpec& spec, const LinearSystem& system,
                                           const SpectralInfo& info, bool consistent);

}  // namespace pfr

#endif  // PFR_THEORY_HPP
