#include "pfr/oracle.hpp"

#include "pfr/errors.hpp"
#include "pfr/solver.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pfr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Dense copies of everything the factor formulas read, built once per sampler.
class FactorBuilder {
 public:
  explicit FactorBuilder(const Sampler& sampler)
      : spec_(sampler.spec()),
        a_(sampler.system().a().to_dense()),
        row_sq_(a_.rowwise().squaredNorm()),
        col_sq_(a_.colwise().squaredNorm().transpose()),
        frob_(sampler.system().frobenius_squared()),
        trace_(a_.trace()) {}

  Index m() const { return a_.rows(); }
  Index n() const { return a_.cols(); }
  const DenseMatrix& a() const { return a_; }

  void build(const SampleRealization& sample, SketchFactors& f) const {
    const Index m = a_.rows();
    const Index n = a_.cols();
    f.column_side.setZero(n, n);
    f.row_side.setZero(m, m);
    switch (spec_.kind) {
      case SamplerKind::RK: {
        const Index j = std::get<RowDraw>(sample).row;
        f.column_side.diagonal().setOnes();
        f.row_side(j, j) = 1.0 / row_sq_[j];
        return;
      }
      case SamplerKind::RGS: {
        const Index i = std::get<ColumnDraw>(sample).col;
        f.column_side(i, i) = 1.0 / col_sq_[i];
        f.row_side.diagonal().setOnes();
        return;
      }
      case SamplerKind::DSGS: {
        const auto& e = std::get<EntryDraw>(sample);
        const double v = a_(e.row, e.col);
        f.column_side(e.col, e.col) = 1.0 / (v * v);
        f.row_side(e.row, e.row) = 1.0;
        return;
      }
      case SamplerKind::RBK: {
        const auto& rows = std::get<RowBlockDraw>(sample).rows;
        f.column_side.diagonal().setConstant(1.0 / frob_);
        const double scale = static_cast<double>(m) / static_cast<double>(rows.size());
        for (Index j : rows) f.row_side(j, j) = scale;
        return;
      }
      case SamplerKind::RBCD: {
        const auto& cols = std::get<ColumnBlockDraw>(sample).cols;
        const double scale = static_cast<double>(n) / static_cast<double>(cols.size());
        for (Index i : cols) f.column_side(i, i) = scale;
        f.row_side.diagonal().setConstant(1.0 / frob_);
        return;
      }
      case SamplerKind::BGK: {
        const DenseMatrix& s = std::get<GaussianRowSketch>(sample).s;
        f.column_side.diagonal().setConstant(1.0 / (static_cast<double>(s.cols()) * frob_));
        f.row_side.noalias() = s * s.transpose();
        return;
      }
      case SamplerKind::BGLS: {
        const DenseMatrix& t = std::get<GaussianColumnSketch>(sample).t;
        f.column_side.noalias() = t * t.transpose();
        f.row_side.diagonal().setConstant(1.0 / (static_cast<double>(t.cols()) * frob_));
        return;
      }
      case SamplerKind::SGC: {
        const auto& g = std::get<SymmetricGaussianDraw>(sample);
        const double v = a_(g.row, g.col);
        const double c = g.eta.dot(a_ * g.eta) / trace_;
        f.column_side(g.row, g.row) = c / (v * v);
        f.row_side(g.col, g.col) = 1.0;
        return;
      }
    }
  }

 private:
  SamplerSpec spec_;
  DenseMatrix a_;
  Vector row_sq_;
  Vector col_sq_;
  double frob_;
  double trace_;
};

bool is_scalar_identity(const DenseMatrix& m) {
  const double d = m(0, 0);
  const double tol = 1e-14 * std::abs(d);
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      const double target = i == j ? d : 0.0;
      if (std::abs(m(i, j) - target) > tol) return false;
    }
  return true;
}

// Streaming per-entry mean and standard error.
class WelfordMatrix {
 public:
  WelfordMatrix(Index rows, Index cols) : mean_(DenseMatrix::Zero(rows, cols)), m2_(DenseMatrix::Zero(rows, cols)) {}

  void add(const DenseMatrix& x) {
    ++count_;
    delta_ = x - mean_;
    mean_ += delta_ / static_cast<double>(count_);
    m2_.array() += delta_.array() * (x - mean_).array();
  }

  ExpectationEstimate finish() const {
    ExpectationEstimate est;
    est.mean = mean_;
    est.n_samples = count_;
    est.exact = false;
    if (count_ < 2) {
      est.stderr_matrix = DenseMatrix::Constant(mean_.rows(), mean_.cols(), kNaN);
    } else {
      const double n = static_cast<double>(count_);
      est.stderr_matrix = (m2_.array() / ((n - 1.0) * n)).sqrt().matrix();
    }
    return est;
  }

 private:
  DenseMatrix mean_;
  DenseMatrix m2_;
  DenseMatrix delta_;
  std::int64_t count_ = 0;
};

void require_samples(std::int64_t n_samples) {
  if (n_samples < 1) throw DomainError("n_samples must be at least 1");
}

// The random matrix whose expectation defines each β-constant.
class BetaIntegrand {
 public:
  BetaIntegrand(const Sampler& sampler, BetaKind kind) : builder_(sampler), kind_(kind) {
    const DenseMatrix& a = builder_.a();
    gram_ = a.transpose() * a;
    outer_ = a * a.transpose();
  }

  Index size() const { return kind_ == BetaKind::ColumnSketch ? builder_.n() : builder_.m(); }

  void evaluate(const SampleRealization& sample, DenseMatrix& x) {
    builder_.build(sample, f_);
    switch (kind_) {
      case BetaKind::General:
      case BetaKind::IterateGram:
        y_.noalias() = f_.column_side * builder_.a().transpose() * f_.row_side;
        if (kind_ == BetaKind::General)
          x.noalias() = y_.transpose() * gram_ * y_;
        else
          x.noalias() = y_.transpose() * y_;
        return;
      case BetaKind::ColumnSketch:
        if (!is_scalar_identity(f_.row_side))
          throw DomainError("column-sketch constant needs S1S2ᵀ to be a multiple of the identity");
        x.noalias() = f_.column_side.transpose() * gram_ * f_.column_side;
        return;
      case BetaKind::RowSketch:
        if (!is_scalar_identity(f_.column_side))
          throw DomainError("row-sketch constant needs T1T2ᵀ to be a multiple of the identity");
        x.noalias() = f_.row_side.transpose() * outer_ * f_.row_side;
        return;
    }
  }

 private:
  FactorBuilder builder_;
  BetaKind kind_;
  DenseMatrix gram_;
  DenseMatrix outer_;
  SketchFactors f_;
  DenseMatrix y_;
};

Eigen::SelfAdjointEigenSolver<DenseMatrix> symmetric_eigen(const DenseMatrix& m) {
  const DenseMatrix sym = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<DenseMatrix>(sym);
}

DenseMatrix gaussian(Index rows, Index cols, RandomStream& rng) {
  DenseMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

}  // namespace

double ExpectationEstimate::max_standardized_error(const DenseMatrix& target, double zero_tol) const {
  if (target.rows() != mean.rows() || target.cols() != mean.cols())
    throw DomainError("target shape differs from the estimate");
  double worst = 0.0;
  for (Index j = 0; j < mean.cols(); ++j)
    for (Index i = 0; i < mean.rows(); ++i) {
      const double diff = std::abs(mean(i, j) - target(i, j));
      const double se = stderr_matrix(i, j);
      double z;
      if (std::isnan(se)) {
        z = kNaN;
      } else if (se == 0.0) {
        z = diff <= zero_tol ? 0.0 : std::numeric_limits<double>::infinity();
      } else {
        z = diff / se;
      }
      if (std::isnan(z)) return kNaN;
      worst = std::max(worst, z);
    }
  return worst;
}

double ExpectationEstimate::max_abs_error(const DenseMatrix& target) const {
  if (target.rows() != mean.rows() || target.cols() != mean.cols())
    throw DomainError("target shape differs from the estimate");
  return (mean - target).cwiseAbs().maxCoeff();
}

SketchFactors materialize_factors(const Sampler& sampler, const SampleRealization& sample) {
  SketchFactors f;
  FactorBuilder(sampler).build(sample, f);
  return f;
}

ExpectationEstimate estimate_update_operator(const Sampler& sampler, std::int64_t n_samples, RandomStream& rng,
                                             EstimatePath path) {
  const FactorBuilder builder(sampler);
  const DenseMatrix at = builder.a().transpose();
  SketchFactors f;
  DenseMatrix y;
  auto evaluate = [&](const SampleRealization& sample) {
    builder.build(sample, f);
    y.noalias() = f.column_side * at * f.row_side;
  };

  if (path == EstimatePath::Auto && sampler.has_finite_support()) {
    ExpectationEstimate est;
    est.mean = DenseMatrix::Zero(builder.n(), builder.m());
    sampler.for_each_outcome([&](double prob, const SampleRealization& sample) {
      evaluate(sample);
      est.mean += prob * y;
      ++est.n_samples;
    });
    est.stderr_matrix = DenseMatrix::Zero(builder.n(), builder.m());
    est.exact = true;
    return est;
  }

  require_samples(n_samples);
  WelfordMatrix acc(builder.n(), builder.m());
  SampleRealization sample = RowDraw{0};
  for (std::int64_t t = 0; t < n_samples; ++t) {
    sampler.draw(rng, sample);
    evaluate(sample);
    acc.add(y);
  }
  return acc.finish();
}

ExpectationEstimate estimate_update_operator(const SamplerSpec& spec, const LinearSystem& system,
                                             std::int64_t n_samples, RandomStream& rng, EstimatePath path) {
  return estimate_update_operator(Sampler(spec, system), n_samples, rng, path);
}

FourthMomentCheck check_gaussian_fourth_moment(const DenseMatrix& a, Index p, std::int64_t n_samples,
                                               RandomStream& rng) {
  if (p < 1) throw DomainError("sketch width p must be at least 1");
  require_samples(n_samples);
  const Index m = a.rows();
  const double pd = static_cast<double>(p);
  const DenseMatrix k = a * a.transpose();

  FourthMomentCheck out;
  out.target = (pd * pd + pd) * k;
  out.target.diagonal().array() += pd * a.squaredNorm();

  WelfordMatrix acc(m, m);
  DenseMatrix s(m, p), inner(p, p), left(m, p), x(m, m);
  for (std::int64_t t = 0; t < n_samples; ++t) {
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < m; ++i) s(i, j) = rng.normal();
    inner.noalias() = s.transpose() * k * s;
    left.noalias() = s * inner;
    x.noalias() = left * s.transpose();
    acc.add(x);
  }
  out.estimate = acc.finish();
  const double scale = out.target.norm();
  const double gap = (out.estimate.mean - out.target).norm();
  out.max_rel_err = scale > 0.0 ? gap / scale : gap;
  return out;
}

BetaEstimate estimate_beta(const Sampler& sampler, BetaKind kind, std::int64_t n_samples, RandomStream& rng,
                           EstimatePath path) {
  BetaIntegrand integrand(sampler, kind);
  const Index size = integrand.size();
  DenseMatrix x;
  BetaEstimate out;

  if (path == EstimatePath::Auto && sampler.has_finite_support()) {
    ExpectationEstimate& est = out.matrix;
    est.mean = DenseMatrix::Zero(size, size);
    sampler.for_each_outcome([&](double prob, const SampleRealization& sample) {
      integrand.evaluate(sample, x);
      est.mean += prob * x;
      ++est.n_samples;
    });
    est.stderr_matrix = DenseMatrix::Zero(size, size);
    est.exact = true;
    out.value = symmetric_eigen(est.mean).eigenvalues().maxCoeff();
    return out;
  }

  require_samples(n_samples);
  // Second pass replays the same draws to get the spread of vᵀXv.
  RandomStream replay = rng;
  WelfordMatrix acc(size, size);
  SampleRealization sample = RowDraw{0};
  for (std::int64_t t = 0; t < n_samples; ++t) {
    sampler.draw(rng, sample);
    integrand.evaluate(sample, x);
    acc.add(x);
  }
  out.matrix = acc.finish();
  const auto eig = symmetric_eigen(out.matrix.mean);
  const Index top = size - 1;
  out.value = eig.eigenvalues()[top];
  const Vector v = eig.eigenvectors().col(top);

  if (n_samples < 2) {
    out.stderr_value = kNaN;
    return out;
  }
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t t = 0; t < n_samples; ++t) {
    sampler.draw(replay, sample);
    integrand.evaluate(sample, x);
    const double z = v.dot(x * v);
    const double delta = z - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (z - mean);
  }
  const double n = static_cast<double>(n_samples);
  out.stderr_value = std::sqrt(m2 / ((n - 1.0) * n));
  return out;
}

BetaEstimate estimate_beta(const SamplerSpec& spec, const LinearSystem& system, BetaKind kind,
                           std::int64_t n_samples, RandomStream& rng, EstimatePath path) {
  return estimate_beta(Sampler(spec, system), kind, n_samples, rng, path);
}

std::vector<DecayPoint> empirical_direction_decay(const LinearSystem& system, const SamplerSpec& spec,
                                                  const Vector& x0, double alpha, Index ell, std::int64_t k_max,
                                                  int n_trials, RandomStream& rng) {
  if (n_trials < 1) throw DomainError("n_trials must be at least 1");
  if (k_max < 0) throw DomainError("k_max must be nonnegative");
  const SpectralInfo info = compute_spectral_info(system.a(), true);
  if (ell < 0 || ell >= system.n())
    throw DomainError("direction index " + std::to_string(ell) + " outside [0, " + std::to_string(system.n()) + ")");
  const ReferenceSolutions refs = reference_solutions(system, x0, info);
  const Vector v = info.right_vectors->col(ell);
  const Sampler sampler(spec, system);

  const auto len = static_cast<std::size_t>(k_max + 1);
  std::vector<double> mean(len, 0.0), m2(len, 0.0);
  for (int t = 0; t < n_trials; ++t) {
    RandomStream trial_rng = rng.split(static_cast<std::uint64_t>(t));
    const double count = static_cast<double>(t + 1);
    for_each_iterate(sampler, alpha, 0.0, x0, k_max, trial_rng, [&](std::int64_t k, const Vector& x) {
      const double z = v.dot(x - refs.x0_star);
      const auto i = static_cast<std::size_t>(k);
      const double delta = z - mean[i];
      mean[i] += delta / count;
      m2[i] += delta * (z - mean[i]);
    });
  }
  std::vector<DecayPoint> out;
  out.reserve(len);
  const double nt = static_cast<double>(n_trials);
  for (std::size_t i = 0; i < len; ++i) {
    const double se = n_trials > 1 ? std::sqrt(m2[i] / ((nt - 1.0) * nt)) : kNaN;
    out.push_back({static_cast<std::int64_t>(i), mean[i], se});
  }
  return out;
}

double fit_decay_ratio(const std::vector<DecayPoint>& points, double min_snr) {
  double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0, count = 0.0;
  for (const auto& p : points) {
    const double mag = std::abs(p.mean);
    if (!(mag > 0.0) || !(mag > min_snr * p.stderr_value || p.stderr_value == 0.0)) break;
    const double k = static_cast<double>(p.k);
    const double y = std::log(mag);
    sk += k;
    sy += y;
    skk += k * k;
    sky += k * y;
    count += 1.0;
  }
  if (count < 2.0) throw NumericalError("fewer than two resolvable points for the decay fit");
  const double slope = (count * sky - sk * sy) / (count * skk - sk * sk);
  return std::exp(slope);
}

namespace {

struct SuiteSystems {
  LinearSystem general;
  LinearSystem symmetric;
};

SuiteSystems suite_systems(std::uint64_t seed) {
  RandomStream rng(seed, streams::kOracle);
  DenseMatrix a = gaussian(6, 4, rng);
  Vector b = gaussian(6, 1, rng).col(0);
  DenseMatrix h = gaussian(5, 5, rng);
  DenseMatrix s = h + h.transpose();
  s.diagonal().array() += 3.0;
  Vector c = gaussian(5, 1, rng).col(0);
  return {LinearSystem(std::move(a), std::move(b)), LinearSystem(std::move(s), std::move(c))};
}

const LinearSystem& system_for(const SuiteSystems& sys, const SamplerSpec& spec) {
  return spec.kind == SamplerKind::SGC ? sys.symmetric : sys.general;
}

std::vector<SamplerSpec> suite_specs(const LinearSystem& general) {
  const Index m = general.m();
  const Index n = general.n();
  return {SamplerSpec::rk(),      SamplerSpec::rgs(),     SamplerSpec::dsgs(),    SamplerSpec::rbk(1),
          SamplerSpec::rbk(3),    SamplerSpec::rbk(m),    SamplerSpec::rbcd(1),   SamplerSpec::rbcd(2),
          SamplerSpec::rbcd(n),   SamplerSpec::bgk(1),    SamplerSpec::bgk(2),    SamplerSpec::bgls(1),
          SamplerSpec::bgls(2),   SamplerSpec::sgc()};
}

CheckResult exact_check(std::string name, double err, double bound, std::int64_t n) {
  return {std::move(name), err, bound, "max abs error <=", err <= bound, true, n};
}

CheckResult z_check(std::string name, double z, std::int64_t n) {
  return {std::move(name), z, 5.0, "max standard errors <=", z <= 5.0, false, n};
}

}  // namespace

std::vector<CheckResult> run_verification_suite(const VerifyOptions& options) {
  const SuiteSystems sys = suite_systems(options.seed);
  std::vector<CheckResult> out;
  RandomStream rng(options.seed, streams::kOracle + 100);

  for (const SamplerSpec& spec : suite_specs(sys.general)) {
    const LinearSystem& system = system_for(sys, spec);
    Sampler sampler(spec, system);
    std::string name = "update operator " + to_string(spec);
    if (options.corrupt_sampler && spec.kind == SamplerKind::RK) {
      sampler = sampler.with_row_weights(Vector::Ones(system.m()));
      name += " (corrupted weights)";
    }
    const DenseMatrix target = system.a().to_dense().transpose() / system.frobenius_squared();
    const ExpectationEstimate est = estimate_update_operator(sampler, options.operator_samples, rng);
    if (est.exact)
      out.push_back(exact_check(name, est.max_abs_error(target), 1e-12, est.n_samples));
    else
      out.push_back(z_check(name, est.max_standardized_error(target), est.n_samples));
  }

  for (const SamplerSpec& spec : {SamplerSpec::rk(), SamplerSpec::rbk(2), SamplerSpec::rbcd(2)}) {
    const Sampler sampler(spec, sys.general);
    const ExpectationEstimate exact = estimate_update_operator(sampler, 0, rng);
    const ExpectationEstimate mc =
        estimate_update_operator(sampler, options.operator_samples, rng, EstimatePath::MonteCarlo);
    out.push_back(z_check("sampling agrees with enumeration " + to_string(spec),
                          mc.max_standardized_error(exact.mean), mc.n_samples));
  }

  {
    RandomStream mrng(options.seed, streams::kOracle + 200);
    const DenseMatrix a = gaussian(4, 3, mrng);
    for (Index p = 1; p <= 3; ++p) {
      const FourthMomentCheck fm = check_gaussian_fourth_moment(a, p, options.fourth_moment_samples, rng);
      const std::string name = "gaussian fourth moment p=" + std::to_string(p);
      out.push_back(z_check(name, fm.estimate.max_standardized_error(fm.target), fm.estimate.n_samples));
      out.push_back({name + " relative", fm.max_rel_err, 0.05, "relative Frobenius error <=", fm.max_rel_err <= 0.05,
                     false, fm.estimate.n_samples});
    }
  }

  const SpectralInfo general_info = compute_spectral_info(sys.general.a(), false);
  const SpectralInfo symmetric_info = compute_spectral_info(sys.symmetric.a(), false);
  for (const SamplerSpec& spec : suite_specs(sys.general)) {
    const LinearSystem& system = system_for(sys, spec);
    const SpectralInfo& info = spec.kind == SamplerKind::SGC ? symmetric_info : general_info;
    const Sampler sampler(spec, system);
    for (BetaKind kind : {BetaKind::General, BetaKind::IterateGram, BetaKind::ColumnSketch, BetaKind::RowSketch}) {
      double closed;
      try {
        closed = beta_closed_form(spec, info, system, kind);
      } catch (const DomainError&) {
        continue;
      }
      const BetaEstimate est = estimate_beta(sampler, kind, options.operator_samples, rng);
      const std::string name = to_string(kind) + " constant " + to_string(spec);
      const double diff = std::abs(est.value - closed);
      if (est.exact()) {
        const double bound = 1e-10 * std::max(1.0, std::abs(closed));
        out.push_back(exact_check(name, diff, bound, est.matrix.n_samples));
      } else {
        out.push_back(z_check(name, diff / est.stderr_value, est.matrix.n_samples));
      }
    }
  }

  {
    DenseMatrix d = DenseMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 4.0;
    const LinearSystem diag(d, Vector::Zero(2));
    const SpectralInfo info = compute_spectral_info(diag.a(), true);
    Vector x0(2);
    x0 << 1.0, 1.0;
    for (Index ell = 0; ell < 2; ++ell) {
      RandomStream drng = rng.split(static_cast<std::uint64_t>(ell));
      const auto points = empirical_direction_decay(diag, SamplerSpec::rk(), x0, 1.0, ell, 8, options.decay_trials, drng);
      const double predicted = 1.0 - info.singular_value(ell) * info.singular_value(ell) / info.frob_sq;
      double rel;
      try {
        rel = std::abs(fit_decay_ratio(points) - predicted) / predicted;
      } catch (const NumericalError&) {
        rel = std::numeric_limits<double>::infinity();
      }
      char name[64];
      std::snprintf(name, sizeof name, "direction decay sigma=%g", info.singular_value(ell));
      out.push_back({name, rel, 0.10, "relative ratio error <=", rel <= 0.10, false, options.decay_trials});
    }
  }
  return out;
}

std::string format_verification_table(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-44s %12s  %-30s %-8s %10s\n", "check", "statistic", "band", "verdict", "n");
  out << line;
  for (const auto& r : results) {
    char band[64];
    std::snprintf(band, sizeof band, "%s %g", r.band.c_str(), r.bound);
    std::snprintf(line, sizeof line, "%-44s %12.4g  %-30s %-8s %10s\n", r.name.c_str(), r.statistic, band,
                  r.pass ? "pass" : "FAIL", r.exact ? "exact" : std::to_string(r.n_samples).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace pfr
