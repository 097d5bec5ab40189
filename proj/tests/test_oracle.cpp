#include "pfr/errors.hpp"
#include "pfr/oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pfr;
using pfr::testing::gaussian_matrix;
using pfr::testing::gaussian_vector;

namespace {

LinearSystem system_of(const DenseMatrix& a, std::uint64_t seed = 1) {
  return LinearSystem(a, gaussian_vector(a.rows(), seed));
}

DenseMatrix symmetric_matrix(Index n, std::uint64_t seed) {
  const DenseMatrix h = gaussian_matrix(n, n, seed);
  DenseMatrix s = h + h.transpose();
  s.diagonal().array() += 3.0;
  return s;
}

std::vector<SamplerSpec> finite_specs(Index m, Index n) {
  return {SamplerSpec::rk(),   SamplerSpec::rgs(),  SamplerSpec::dsgs(),  SamplerSpec::rbk(1), SamplerSpec::rbk(2),
          SamplerSpec::rbk(m), SamplerSpec::rbcd(1), SamplerSpec::rbcd(2), SamplerSpec::rbcd(n)};
}

}  // namespace

TEST(Factors, ReproduceSamplerDirections) {
  const LinearSystem general = system_of(gaussian_matrix(7, 4, 3));
  const LinearSystem symmetric = system_of(symmetric_matrix(5, 4));
  RandomStream rng(11);
  for (SamplerKind kind : all_sampler_kinds()) {
    const LinearSystem& sys = kind == SamplerKind::SGC ? symmetric : general;
    const Sampler sampler({kind, 2}, sys);
    const DenseMatrix at = sys.a().to_dense().transpose();
    for (int t = 0; t < 20; ++t) {
      const SampleRealization s = sampler.draw(rng);
      const SketchFactors f = materialize_factors(sampler, s);
      const Vector r = gaussian_vector(sys.m(), 100 + t);
      const Vector via_factors = f.column_side * at * f.row_side * r;
      EXPECT_LE((via_factors - sampler.apply(s, r)).norm(), 1e-12 * (1.0 + via_factors.norm())) << to_string(kind);
    }
  }
}

TEST(UpdateOperator, KaczmarzIsExact) {
  const DenseMatrix a = gaussian_matrix(5, 3, 2);
  const LinearSystem sys = system_of(a);
  RandomStream rng(0);
  const ExpectationEstimate est = estimate_update_operator(SamplerSpec::rk(), sys, 0, rng);
  EXPECT_TRUE(est.exact);
  EXPECT_EQ(est.n_samples, 5);
  EXPECT_EQ(est.stderr_matrix.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(est.max_abs_error(a.transpose() / a.squaredNorm()), 1e-14);
}

TEST(UpdateOperator, GaussianKaczmarzMonteCarlo) {
  const DenseMatrix a = gaussian_matrix(4, 3, 5);
  RandomStream rng(7);
  const ExpectationEstimate est = estimate_update_operator(SamplerSpec::bgk(2), system_of(a), 100000, rng);
  EXPECT_FALSE(est.exact);
  EXPECT_EQ(est.n_samples, 100000);
  EXPECT_LE(est.max_standardized_error(a.transpose() / a.squaredNorm()), 5.0);
}

TEST(UpdateOperator, SingleSampleIsTheRealization) {
  const LinearSystem sys = system_of(gaussian_matrix(4, 3, 6));
  const Sampler sampler(SamplerSpec::bgls(2), sys);
  RandomStream rng(9);
  RandomStream copy = rng;
  const ExpectationEstimate est = estimate_update_operator(sampler, 1, rng);
  const SketchFactors f = materialize_factors(sampler, sampler.draw(copy));
  const DenseMatrix y = f.column_side * sys.a().to_dense().transpose() * f.row_side;
  EXPECT_LE((est.mean - y).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(std::isnan(est.stderr_matrix(0, 0)));
}

TEST(UpdateOperator, SamplingAgreesWithEnumeration) {
  const LinearSystem sys = system_of(gaussian_matrix(6, 4, 8));
  RandomStream rng(12);
  for (const SamplerSpec& spec : finite_specs(6, 4)) {
    const Sampler sampler(spec, sys);
    const ExpectationEstimate exact = estimate_update_operator(sampler, 0, rng);
    const ExpectationEstimate mc = estimate_update_operator(sampler, 100000, rng, EstimatePath::MonteCarlo);
    EXPECT_LE(mc.max_standardized_error(exact.mean), 5.0) << to_string(spec);
  }
}

TEST(UpdateOperator, EnumeratedIdentityOnRandomMatrices) {
  RandomStream rng(0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index m = 2 + static_cast<Index>(seed % 7);
    const Index n = 1 + static_cast<Index>((seed * 5) % 6);
    const DenseMatrix a = gaussian_matrix(m, n, 300 + seed);
    const LinearSystem sys = system_of(a);
    for (const SamplerSpec& spec : finite_specs(m, n)) {
      if (spec.block > n && spec.kind == SamplerKind::RBCD) continue;
      const ExpectationEstimate est = estimate_update_operator(spec, sys, 0, rng);
      EXPECT_LE(est.max_abs_error(a.transpose() / a.squaredNorm()), 1e-12) << to_string(spec);
    }
  }
}

TEST(FourthMoment, ScalarExample) {
  DenseMatrix a(1, 1);
  a << 2.0;
  RandomStream rng(21);
  const FourthMomentCheck fm = check_gaussian_fourth_moment(a, 1, 1000000, rng);
  EXPECT_DOUBLE_EQ(fm.target(0, 0), 12.0);
  EXPECT_LE(fm.estimate.max_standardized_error(fm.target), 5.0);
}

TEST(FourthMoment, ZeroMatrix) {
  RandomStream rng(22);
  const FourthMomentCheck fm = check_gaussian_fourth_moment(DenseMatrix::Zero(3, 2), 2, 100, rng);
  EXPECT_EQ(fm.target.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(fm.estimate.mean.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(fm.max_rel_err, 0.0);
}

TEST(FourthMoment, SingleColumnTarget) {
  const DenseMatrix a = gaussian_matrix(3, 2, 23);
  RandomStream rng(23);
  const FourthMomentCheck fm = check_gaussian_fourth_moment(a, 1, 100, rng);
  DenseMatrix expected = 2.0 * a * a.transpose();
  expected.diagonal().array() += a.squaredNorm();
  EXPECT_LE((fm.target - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(FourthMoment, RandomMatricesWithinBand) {
  RandomStream rng(24);
  const DenseMatrix a = gaussian_matrix(4, 3, 24);
  for (Index p = 1; p <= 3; ++p) {
    const FourthMomentCheck fm = check_gaussian_fourth_moment(a, p, 300000, rng);
    EXPECT_LE(fm.estimate.max_standardized_error(fm.target), 5.0) << "p=" << p;
    EXPECT_LE(fm.max_rel_err, 0.05) << "p=" << p;
  }
}

TEST(Beta, KaczmarzOnIdentity) {
  RandomStream rng(0);
  const BetaEstimate est =
      estimate_beta(SamplerSpec::rk(), system_of(DenseMatrix::Identity(2, 2)), BetaKind::General, 0, rng);
  EXPECT_TRUE(est.exact());
  EXPECT_NEAR(est.value, 0.5, 1e-15);
}

TEST(Beta, DoublyStochasticWithoutZeros) {
  RandomStream rng(0);
  const BetaEstimate est =
      estimate_beta(SamplerSpec::dsgs(), system_of(gaussian_matrix(5, 4, 30)), BetaKind::General, 0, rng);
  EXPECT_NEAR(est.value, 1.0, 1e-12);
}

TEST(Beta, GaussianKaczmarzSingleColumn) {
  const DenseMatrix a = gaussian_matrix(4, 3, 31);
  const SpectralInfo info = compute_spectral_info(a, false);
  RandomStream rng(31);
  const BetaEstimate est = estimate_beta(SamplerSpec::bgk(1), system_of(a), BetaKind::RowSketch, 100000, rng);
  const double target = 2.0 * info.sigma_max * info.sigma_max + info.frob_sq;
  EXPECT_LE(std::abs(est.value - target), 5.0 * est.stderr_value);
}

TEST(Beta, SketchKindsNeedScalarOppositeFactor) {
  RandomStream rng(0);
  const LinearSystem sys = system_of(gaussian_matrix(4, 3, 32));
  EXPECT_THROW(estimate_beta(SamplerSpec::rk(), sys, BetaKind::ColumnSketch, 0, rng), DomainError);
  EXPECT_THROW(estimate_beta(SamplerSpec::rgs(), sys, BetaKind::RowSketch, 0, rng), DomainError);
  EXPECT_THROW(estimate_beta(SamplerSpec::dsgs(), sys, BetaKind::RowSketch, 0, rng), DomainError);
}

TEST(Beta, ClosedFormsMatchEnumeration) {
  RandomStream rng(0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index m = 3 + static_cast<Index>(seed % 6);
    const Index n = 2 + static_cast<Index>((seed * 3) % 5);
    const DenseMatrix a = gaussian_matrix(m, n, 400 + seed);
    const LinearSystem sys = system_of(a);
    const SpectralInfo info = compute_spectral_info(a, false);
    for (const SamplerSpec& spec : finite_specs(m, n)) {
      for (BetaKind kind : {BetaKind::General, BetaKind::IterateGram, BetaKind::ColumnSketch, BetaKind::RowSketch}) {
        double closed;
        try {
          closed = beta_closed_form(spec, info, sys, kind);
        } catch (const DomainError&) {
          continue;
        }
        const BetaEstimate est = estimate_beta(spec, sys, kind, 0, rng);
        EXPECT_NEAR(est.value, closed, 1e-10 * std::max(1.0, closed)) << to_string(spec) << ' ' << to_string(kind);
      }
    }
  }
}

TEST(Beta, SparseSupportClosedForms) {
  // zero entries change the DSGS and SGC sums
  DenseMatrix a = gaussian_matrix(5, 5, 33);
  a = (a + a.transpose()).eval();
  a(0, 1) = a(1, 0) = 0.0;
  a(2, 4) = a(4, 2) = 0.0;
  a(3, 3) = 0.0;
  a.diagonal().array() += 1.0;
  const LinearSystem sys = system_of(a);
  const SpectralInfo info = compute_spectral_info(a, false);
  RandomStream rng(33);
  for (BetaKind kind : {BetaKind::General, BetaKind::IterateGram}) {
    const BetaEstimate exact = estimate_beta(SamplerSpec::dsgs(), sys, kind, 0, rng);
    EXPECT_NEAR(exact.value, beta_closed_form(SamplerSpec::dsgs(), info, sys, kind), 1e-12);
    const BetaEstimate mc = estimate_beta(SamplerSpec::sgc(), sys, kind, 100000, rng);
    EXPECT_LE(std::abs(mc.value - beta_closed_form(SamplerSpec::sgc(), info, sys, kind)), 5.0 * mc.stderr_value)
        << to_string(kind);
  }
}

TEST(DirectionDecay, StartIsExact) {
  const LinearSystem sys = system_of(gaussian_matrix(6, 3, 40));
  const Vector x0 = gaussian_vector(3, 41);
  const SpectralInfo info = compute_spectral_info(sys.a(), true);
  const ReferenceSolutions refs = reference_solutions(sys, x0, info);
  RandomStream rng(40);
  const auto pts = empirical_direction_decay(sys, SamplerSpec::rk(), x0, 1.0, 1, 5, 50, rng);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[0].k, 0);
  EXPECT_NEAR(pts[0].mean, info.right_vectors->col(1).dot(x0 - refs.x0_star), 1e-14);
  EXPECT_EQ(pts[0].stderr_value, 0.0);
}

TEST(DirectionDecay, NullDirectionStaysFlat) {
  const LinearSystem sys = system_of(gaussian_matrix(3, 5, 42));
  RandomStream rng(42);
  const auto pts = empirical_direction_decay(sys, SamplerSpec::rk(), gaussian_vector(5, 43), 1.0, 4, 20, 100, rng);
  for (const auto& p : pts) EXPECT_NEAR(p.mean, 0.0, 1e-12);
}

TEST(DirectionDecay, DiagonalRatio) {
  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 4.0;
  const LinearSystem sys(d, Vector::Zero(2));
  RandomStream rng(44);
  const auto pts = empirical_direction_decay(sys, SamplerSpec::rk(), Vector::Ones(2), 1.0, 0, 6, 2000, rng);
  EXPECT_NEAR(fit_decay_ratio(pts), 0.36, 0.036);
}

TEST(DirectionDecay, FitRecoversGeometricSequence) {
  std::vector<DecayPoint> pts;
  for (int k = 0; k < 10; ++k) pts.push_back({k, -2.0 * std::pow(0.7, k), 0.0});
  EXPECT_NEAR(fit_decay_ratio(pts), 0.7, 1e-14);
  EXPECT_THROW(fit_decay_ratio({{0, 1.0, 0.0}, {1, 0.01, 0.01}}), NumericalError);
}

TEST(VerifySuite, PassesAndCatchesCorruption) {
  VerifyOptions opts;
  opts.fourth_moment_samples = 200000;
  for (const auto& r : run_verification_suite(opts)) EXPECT_TRUE(r.pass) << r.name << " statistic " << r.statistic;

  opts.corrupt_sampler = true;
  bool seen = false;
  for (const auto& r : run_verification_suite(opts)) {
    if (r.name.find("corrupted") == std::string::npos) continue;
    seen = true;
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.statistic, r.bound);
  }
  EXPECT_TRUE(seen);
}
