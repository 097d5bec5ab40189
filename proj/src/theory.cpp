#include "pfr/theory.hpp"

#include "pfr/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pfr {

namespace {

double lambda_max(const DenseMatrix& sym) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigensolve failed");
  return eig.eigenvalues().maxCoeff();
}

// E[P M P] for P the coordinate projector onto a uniform k-subset of [N]:
// c2·M + (c1 − c2)·diag(M), c1 = k/N, c2 = k(k−1)/(N(N−1)).
DenseMatrix subset_average(const DenseMatrix& mat, Index k, Index total) {
  const double nn = static_cast<double>(total);
  const double kk = static_cast<double>(k);
  const double c1 = kk / nn;
  const double c2 = total > 1 ? kk * (kk - 1.0) / (nn * (nn - 1.0)) : 0.0;
  DenseMatrix out = c2 * mat;
  out.diagonal() += (c1 - c2) * mat.diagonal();
  return out;
}

[[noreturn]] void undefined_beta(const SamplerSpec& spec, BetaKind kind) {
  std::string why;
  if (kind == BetaKind::ColumnSketch) why = " (needs S1 = S2 = scalar multiple of I)";
  if (kind == BetaKind::RowSketch) why = " (needs T1 = T2 = scalar multiple of I)";
  throw DomainError(to_string(kind) + " constant is not defined for " + to_string(spec.kind) + why);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// γ1, γ2 without the stepsize check.
MomentumCoefficients raw_rate(TheoremId id, const SpectralInfo& info, double beta, double alpha, double omega,
                              double rho) {
  const double frob = info.frob_sq;
  const double s_min = info.sigma_min_nz * info.sigma_min_nz / frob;
  const double s_max = info.sigma_max * info.sigma_max / frob;
  const double base = 1.0 + 3.0 * omega + 2.0 * omega * omega;
  MomentumCoefficients c{};
  c.gamma2 = 2.0 * omega * omega + omega + omega * alpha * s_max;
  switch (id) {
    case TheoremId::NoMomentum:
    case TheoremId::General:
      c.gamma1 = base - (2.0 * alpha + alpha * omega) * s_min + 2.0 * alpha * alpha * beta;
      break;
    case TheoremId::FullColumnRank:
      c.gamma1 = base - (2.0 * alpha + alpha * omega - 2.0 * alpha * alpha * beta * frob) * s_min;
      break;
    case TheoremId::FullColumnRankConsistent:
      c.gamma1 = base - (2.0 * alpha + alpha * omega - alpha * alpha * beta * frob) * s_min;
      break;
    case TheoremId::ColumnSketchOnly:
    case TheoremId::RowSketchOnly:
      c.gamma1 = base - (2.0 * alpha - alpha * alpha * rho * rho * beta * frob + alpha * omega) * s_min;
      break;
    case TheoremId::AnnihilatedResidual:
      c.gamma1 = base - (2.0 * alpha + alpha * omega) * s_min + alpha * alpha * beta;
      break;
  }
  return c;
}

void check_alpha(TheoremId id, const SpectralInfo& info, double beta, double alpha, double rho) {
  if (!(alpha > 0.0)) throw InadmissibleError("alpha > 0", alpha, 0.0);
  const double bound = alpha_upper_bound(id, info, beta, rho);
  if (!(alpha < bound)) throw InadmissibleError("alpha < " + to_string(id) + " stepsize bound", alpha, bound);
}

void check_iterate_alpha(const SpectralInfo& info, double alpha) {
  const double bound = info.frob_sq / (info.sigma_max * info.sigma_max);
  if (!(alpha > 0.0)) throw InadmissibleError("alpha > 0", alpha, 0.0);
  if (!(alpha <= bound)) throw InadmissibleError("alpha <= ||A||_F^2 / sigma_max^2", alpha, bound);
}

}  // namespace

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::NoMomentum: return "NoMomentum";
    case TheoremId::General: return "General";
    case TheoremId::FullColumnRank: return "FullColumnRank";
    case TheoremId::FullColumnRankConsistent: return "FullColumnRankConsistent";
    case TheoremId::ColumnSketchOnly: return "ColumnSketchOnly";
    case TheoremId::RowSketchOnly: return "RowSketchOnly";
    case TheoremId::AnnihilatedResidual: return "AnnihilatedResidual";
  }
  return "?";
}

TheoremId parse_theorem_id(const std::string& text) {
  for (TheoremId id : {TheoremId::NoMomentum, TheoremId::General, TheoremId::FullColumnRank,
                       TheoremId::FullColumnRankConsistent, TheoremId::ColumnSketchOnly, TheoremId::RowSketchOnly,
                       TheoremId::AnnihilatedResidual})
    if (to_string(id) == text) return id;
  throw DomainError("unknown theorem id '" + text + "'");
}

std::string to_string(BetaKind kind) {
  switch (kind) {
    case BetaKind::General: return "beta";
    case BetaKind::IterateGram: return "beta1";
    case BetaKind::ColumnSketch: return "beta2";
    case BetaKind::RowSketch: return "beta3";
  }
  return "?";
}

BetaKind beta_kind_for(TheoremId id) {
  switch (id) {
    case TheoremId::FullColumnRank:
    case TheoremId::FullColumnRankConsistent:
      return BetaKind::IterateGram;
    case TheoremId::ColumnSketchOnly:
      return BetaKind::ColumnSketch;
    case TheoremId::RowSketchOnly:
      return BetaKind::RowSketch;
    default:
      return BetaKind::General;
  }
}

EnvelopeQuantity envelope_quantity(TheoremId id) {
  switch (id) {
    case TheoremId::FullColumnRank:
    case TheoremId::FullColumnRankConsistent:
      return EnvelopeQuantity::LeastSquaresError;
    case TheoremId::RowSketchOnly:
      return EnvelopeQuantity::ProjectedSolutionError;
    default:
      return EnvelopeQuantity::ResidualError;
  }
}

BetaKind primary_beta_kind(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::RK:
    case SamplerKind::RBK:
    case SamplerKind::BGK:
      return BetaKind::RowSketch;
    case SamplerKind::RGS:
    case SamplerKind::RBCD:
    case SamplerKind::BGLS:
      return BetaKind::ColumnSketch;
    default:
      return BetaKind::General;
  }
}

double beta_closed_form(const SamplerSpec& spec, const SpectralInfo& info, const LinearSystem& system) {
  return beta_closed_form(spec, info, system, primary_beta_kind(spec.kind));
}

double beta_closed_form(const SamplerSpec& spec, const SpectralInfo& info, const LinearSystem& system,
                        BetaKind kind) {
  spec.validate(system);
  const CoefficientMatrix& a = system.a();
  const Index m = system.m();
  const Index n = system.n();
  const double frob = system.frobenius_squared();
  const double frob2 = frob * frob;
  const double s1 = info.sigma_max * info.sigma_max;

  switch (spec.kind) {
    case SamplerKind::RK: {
      if (kind == BetaKind::RowSketch || kind == BetaKind::IterateGram) return 1.0 / frob;
      if (kind == BetaKind::ColumnSketch) undefined_beta(spec, kind);
      const DenseMatrix ad = a.to_dense();
      const DenseMatrix k = ad * ad.transpose();
      double best = 0.0;
      for (Index j = 0; j < m; ++j) {
        const double rn = k(j, j);
        if (rn > 0.0) best = std::max(best, k.col(j).squaredNorm() / (rn * frob));
      }
      return best;
    }
    case SamplerKind::RGS: {
      if (kind == BetaKind::ColumnSketch) return 1.0 / frob;
      if (kind == BetaKind::RowSketch) undefined_beta(spec, kind);
      if (kind == BetaKind::General) return s1 / frob;
      DenseMatrix ad = a.to_dense();
      const Vector cn = a.column_squared_norms();
      for (Index i = 0; i < n; ++i) ad.col(i) *= cn[i] > 0.0 ? 1.0 / std::sqrt(cn[i]) : 0.0;
      return lambda_max(ad * ad.transpose()) / frob;
    }
    case SamplerKind::DSGS: {
      if (kind == BetaKind::ColumnSketch || kind == BetaKind::RowSketch) undefined_beta(spec, kind);
      const Vector cn = a.column_squared_norms();
      Vector per_row = Vector::Zero(m);
      a.for_each_nonzero([&](Index i, Index j, double) {
        per_row[i] += kind == BetaKind::General ? cn[j] : 1.0;
      });
      return per_row.maxCoeff() / frob;
    }
    case SamplerKind::RBK: {
      if (kind == BetaKind::ColumnSketch) undefined_beta(spec, kind);
      const double scale = static_cast<double>(m) / static_cast<double>(spec.block);
      const DenseMatrix ad = a.to_dense();
      const DenseMatrix k = ad * ad.transpose();
      if (kind == BetaKind::General) {
        const DenseMatrix k2 = k * k;
        return scale * scale * lambda_max(subset_average(k2, spec.block, m)) / frob2;
      }
      const double beta3 = scale * scale * lambda_max(subset_average(k, spec.block, m));
      return kind == BetaKind::RowSketch ? beta3 : beta3 / frob2;
    }
    case SamplerKind::RBCD: {
      if (kind == BetaKind::RowSketch) undefined_beta(spec, kind);
      const double scale = static_cast<double>(n) / static_cast<double>(spec.block);
      const DenseMatrix ad = a.to_dense();
      const DenseMatrix g = ad.transpose() * ad;
      if (kind == BetaKind::ColumnSketch) return scale * scale * lambda_max(subset_average(g, spec.block, n));
      if (kind == BetaKind::IterateGram) return scale * s1 / frob2;
      const DenseMatrix inner = ad * subset_average(g, spec.block, n) * ad.transpose();
      return scale * scale * lambda_max(inner) / frob2;
    }
    case SamplerKind::BGK: {
      if (kind == BetaKind::ColumnSketch) undefined_beta(spec, kind);
      const double p = static_cast<double>(spec.block);
      const double beta3 = (p * p + p) * s1 + p * frob;
      if (kind == BetaKind::RowSketch) return beta3;
      if (kind == BetaKind::IterateGram) return beta3 / (p * p * frob2);
      const double sum4 = info.singular_values.array().pow(4).sum();
      return ((p * p + p) * s1 * s1 + p * sum4) / (p * p * frob2);
    }
    case SamplerKind::BGLS: {
      if (kind == BetaKind::RowSketch) undefined_beta(spec, kind);
      const double s = static_cast<double>(spec.block);
      if (kind == BetaKind::ColumnSketch) return (s * s + s) * s1 + s * frob;
      if (kind == BetaKind::IterateGram)
        return (s * s + s + s * static_cast<double>(n)) * s1 / (s * s * frob2);
      return ((s * s + s) * s1 * s1 + s * frob * s1) / (s * s * frob2);
    }
    case SamplerKind::SGC: {
      if (kind == BetaKind::ColumnSketch || kind == BetaKind::RowSketch) undefined_beta(spec, kind);
      const double tr = a.trace();
      // E[(ηᵀAη)²] = Tr(A)² + 2‖A‖_F² for symmetric A
      const double moment = (tr * tr + 2.0 * frob) / (tr * tr);
      const Vector cn = a.column_squared_norms();  // G_ii
      Vector per_col = Vector::Zero(n);
      a.for_each_nonzero([&](Index i, Index j, double) {
        per_col[j] += kind == BetaKind::General ? cn[i] : 1.0;
      });
      return moment * per_col.maxCoeff() / frob;
    }
  }
  throw DomainError("unknown sampler kind");
}

double scalar_factor(const SamplerSpec& spec, const LinearSystem& system) {
  const double frob = system.frobenius_squared();
  switch (spec.kind) {
    case SamplerKind::RK:
    case SamplerKind::RGS:
      return 1.0;
    case SamplerKind::RBK:
    case SamplerKind::RBCD:
      return 1.0 / frob;
    case SamplerKind::BGK:
    case SamplerKind::BGLS:
      return 1.0 / (static_cast<double>(spec.block) * frob);
    default:
      throw DomainError(to_string(spec.kind) + " has no scalar sampling factor");
  }
}

QTau rate_q(double gamma1, double gamma2) {
  if (!(gamma2 >= 0.0)) throw DomainError("gamma2 must be nonnegative");
  if (!(gamma1 + gamma2 < 1.0)) throw InadmissibleError("gamma1 + gamma2 < 1", gamma1 + gamma2, 1.0);
  if (gamma2 == 0.0) return {gamma1, 0.0};
  const double q = 0.5 * (gamma1 + std::sqrt(gamma1 * gamma1 + 4.0 * gamma2));
  return {q, q - gamma1};
}

double alpha_upper_bound(TheoremId id, const SpectralInfo& info, double beta, double rho) {
  if (!(beta > 0.0)) throw DomainError("beta constant must be positive");
  const double frob = info.frob_sq;
  const double s_min = info.sigma_min_nz * info.sigma_min_nz;
  switch (id) {
    case TheoremId::NoMomentum:
    case TheoremId::General:
      return s_min / (beta * frob);
    case TheoremId::FullColumnRank:
      return 1.0 / (beta * frob);
    case TheoremId::FullColumnRankConsistent:
      return 2.0 / (beta * frob);
    case TheoremId::ColumnSketchOnly:
    case TheoremId::RowSketchOnly:
      return 2.0 / (rho * rho * beta * frob);
    case TheoremId::AnnihilatedResidual:
      return 2.0 * s_min / (beta * frob);
  }
  return 0.0;
}

MomentumCoefficients momentum_rate(TheoremId id, const SpectralInfo& info, double beta, double alpha, double omega,
                                   double rho) {
  if (!(omega >= 0.0)) throw DomainError("omega must be nonnegative");
  if (id == TheoremId::NoMomentum && omega != 0.0) throw DomainError("NoMomentum rate needs omega = 0");
  check_alpha(id, info, beta, alpha, rho);
  return raw_rate(id, info, beta, alpha, omega, rho);
}

double no_momentum_rate(const SpectralInfo& info, double beta, double alpha) {
  return raw_rate(TheoremId::NoMomentum, info, beta, alpha, 0.0, 1.0).gamma1;
}

double momentum_upper_bound(const SpectralInfo& info, double beta, double alpha) {
  return momentum_upper_bound(TheoremId::General, info, beta, alpha, 1.0);
}

double momentum_upper_bound(TheoremId id, const SpectralInfo& info, double beta, double alpha, double rho) {
  const double frob = info.frob_sq;
  const double tau1 =
      4.0 + alpha * (info.sigma_max * info.sigma_max - info.sigma_min_nz * info.sigma_min_nz) / frob;
  const double tau2 = 1.0 - raw_rate(id, info, beta, alpha, 0.0, rho).gamma1;
  if (!(tau2 > 0.0)) throw InadmissibleError("tau2 > 0", tau2, 0.0);
  return (std::sqrt(tau1 * tau1 + 16.0 * tau2) - tau1) / 8.0;
}

std::string RateReport::to_key_values() const {
  std::ostringstream out;
  auto line = [&](const std::string& key, const std::string& value) { out << key << '=' << value << '\n'; };
  auto opt = [&](const std::string& key, const std::optional<double>& v) { line(key, v ? fmt(*v) : "n/a"); };
  line("theorem", to_string(theorem));
  line("method", to_string(spec));
  line("alpha", fmt(alpha));
  line("omega", fmt(omega));
  line("beta", fmt(beta));
  opt("beta1", beta1);
  opt("beta2", beta2);
  opt("beta3", beta3);
  line("rho", fmt(rho));
  line("theorem_beta", fmt(theorem_beta));
  line("alpha_max", fmt(alpha_max));
  line("omega_max", fmt(omega_max));
  line("eta", fmt(eta));
  line("gamma1", fmt(gamma1));
  line("gamma2", fmt(gamma2));
  line("gamma1_plus_gamma2", fmt(gamma1 + gamma2));
  line("q", admissible ? fmt(q) : "n/a");
  line("tau", admissible ? fmt(tau) : "n/a");
  line("offset_coefficient", fmt(offset_coefficient));
  opt("accelerated_omega_lo", accel_omega_lo);
  opt("accelerated_omega_recommended", accel_omega_recommended);
  line("admissible", admissible ? "yes" : "no");
  if (!admissible) line("reason", inadmissible_reason);
  return out.str();
}

RateReport rate_report(TheoremId id, const SamplerSpec& spec, const SpectralInfo& info, const LinearSystem& system,
                       double alpha, double omega) {
  RateReport rep;
  rep.theorem = id;
  rep.spec = spec;
  rep.alpha = alpha;
  rep.omega = omega;
  rep.beta = beta_closed_form(spec, info, system, BetaKind::General);
  auto maybe = [&](BetaKind kind) -> std::optional<double> {
    try {
      return beta_closed_form(spec, info, system, kind);
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };
  rep.beta1 = maybe(BetaKind::IterateGram);
  rep.beta2 = maybe(BetaKind::ColumnSketch);
  rep.beta3 = maybe(BetaKind::RowSketch);

  const BetaKind kind = beta_kind_for(id);
  if (kind == BetaKind::ColumnSketch || kind == BetaKind::RowSketch) rep.rho = scalar_factor(spec, system);
  const std::optional<double> tb = kind == BetaKind::General        ? std::optional<double>(rep.beta)
                                   : kind == BetaKind::IterateGram  ? rep.beta1
                                   : kind == BetaKind::ColumnSketch ? rep.beta2
                                                                    : rep.beta3;
  if (!tb) throw DomainError(to_string(id) + " needs " + to_string(kind) + ", which " + to_string(spec.kind) +
                             " does not define");
  rep.theorem_beta = *tb;

  rep.eta = no_momentum_rate(info, rep.beta, alpha);
  rep.alpha_max = alpha_upper_bound(id, info, rep.theorem_beta, rep.rho);
  const MomentumCoefficients raw = raw_rate(id, info, rep.theorem_beta, alpha, omega, rep.rho);
  rep.gamma1 = raw.gamma1;
  rep.gamma2 = raw.gamma2;
  if (id == TheoremId::General || id == TheoremId::NoMomentum) rep.offset_coefficient = 2.0 * alpha * alpha * rep.beta;
  if (id == TheoremId::FullColumnRank) rep.offset_coefficient = 2.0 * alpha * alpha * rep.theorem_beta;

  try {
    rep.omega_max = momentum_upper_bound(id, info, rep.theorem_beta, alpha, rep.rho);
  } catch (const InadmissibleError&) {
    rep.omega_max = std::numeric_limits<double>::quiet_NaN();
  }
  try {
    const OmegaRange range = accelerated_omega_range(info, alpha);
    rep.accel_omega_lo = range.lo;
    rep.accel_omega_recommended = range.recommended;
  } catch (const InadmissibleError&) {
  }

  try {
    momentum_rate(id, info, rep.theorem_beta, alpha, omega, rep.rho);
    const QTau qt = rate_q(rep.gamma1, rep.gamma2);
    rep.q = qt.q;
    rep.tau = qt.tau;
    rep.admissible = true;
  } catch (const Error& e) {
    rep.admissible = false;
    rep.inadmissible_reason = e.what();
  }
  return rep;
}

double residual_envelope(TheoremId id, std::int64_t k, double err0_sq, double r_star_norm_sq,
                         const RateReport& report) {
  if (!report.admissible) throw InadmissibleError("gamma1 + gamma2 < 1", report.gamma1 + report.gamma2, 1.0);
  if (k < 0) throw DomainError("envelope index must be nonnegative");
  const double zeta = report.offset_coefficient * r_star_norm_sq;
  const double rate = id == TheoremId::NoMomentum ? report.eta : report.q;
  const double lead = id == TheoremId::NoMomentum ? 1.0 : 1.0 + report.tau;
  const double rk = std::pow(rate, static_cast<double>(k));
  double bound = rk * lead * err0_sq;
  if (zeta > 0.0) bound += zeta * (1.0 - rk) / (1.0 - rate);
  return bound;
}

double expected_iterate_rate(const SpectralInfo& info, double alpha, std::int64_t k) {
  check_iterate_alpha(info, alpha);
  const double f = 1.0 - alpha * info.sigma_min_nz * info.sigma_min_nz / info.frob_sq;
  return std::pow(f, 2.0 * static_cast<double>(k));
}

double direction_decay(const SpectralInfo& info, double alpha, Index ell, std::int64_t k) {
  check_iterate_alpha(info, alpha);
  const double sigma = info.singular_value(ell);
  return std::pow(1.0 - alpha * sigma * sigma / info.frob_sq, static_cast<double>(k));
}

OmegaRange accelerated_omega_range(const SpectralInfo& info, double alpha) {
  check_iterate_alpha(info, alpha);
  const double t = alpha * info.sigma_min_nz * info.sigma_min_nz / info.frob_sq;
  const double lo = (1.0 - std::sqrt(t)) * (1.0 - std::sqrt(t));
  const double rec = (1.0 - std::sqrt(0.99 * t)) * (1.0 - std::sqrt(0.99 * t));
  return {lo, 1.0, rec};
}

double default_stepsize(const SamplerSpec& spec, const SpectralInfo& info, const LinearSystem& system) {
  const double frob = system.frobenius_squared();
  const double s1 = info.sigma_max * info.sigma_max;
  switch (spec.kind) {
    case SamplerKind::RK:
    case SamplerKind::RGS:
      return 1.0;
    case SamplerKind::DSGS:
      if (info.rank == std::min(system.m(), system.n())) return 1.0 / static_cast<double>(system.n());
      return info.sigma_min_nz * info.sigma_min_nz / s1;
    case SamplerKind::RBK:
      return frob / beta_closed_form(spec, info, system, BetaKind::RowSketch);
    case SamplerKind::RBCD:
      return frob / beta_closed_form(spec, info, system, BetaKind::ColumnSketch);
    case SamplerKind::BGK:
    case SamplerKind::BGLS: {
      const double p = static_cast<double>(spec.block);
      return p * frob / ((p + 1.0) * s1 + frob);
    }
    case SamplerKind::SGC:
      throw DomainError("SGC has no default stepsize; pass an explicit alpha (for example half of the "
                        "General-theorem bound reported by `rates`)");
  }
  throw DomainError("unknown sampler kind");
}

std::vector<TheoremId> applicable_theorems(const SamplerSpec& spec, const LinearSystem& system,
                                           const SpectralInfo& info, bool consistent) {
  std::vector<TheoremId> out = {TheoremId::General};
  const bool full_col = info.rank == system.n();
  const BetaKind side = primary_beta_kind(spec.kind);
  if (full_col) out.push_back(TheoremId::FullColumnRank);
  if (full_col && consistent) out.push_back(TheoremId::FullColumnRankConsistent);
  if (side == BetaKind::ColumnSketch) out.push_back(TheoremId::ColumnSketchOnly);
  if (side == BetaKind::RowSketch && consistent) out.push_back(TheoremId::RowSketchOnly);
  if (consistent || side == BetaKind::ColumnSketch) out.push_back(TheoremId::AnnihilatedResidual);
  return out;
}

}  // namespace pfr
