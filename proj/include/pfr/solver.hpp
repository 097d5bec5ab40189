#ifndef PFR_SOLVER_HPP
#define PFR_SOLVER_HPP

#include "pfr/core.hpp"
#include "pfr/rng.hpp"
#include "pfr/samplers.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace pfr {

struct SolveResult {
  Vector x_final;
  std::int64_t iterations = 0;
  bool converged = false;
  bool timed_out = false;
  IterationTrace trace;
  double elapsed_seconds = 0.0;
  // x at each traced iteration, filled only with SolverConfig::record_iterates
  std::vector<Vector> iterates;
};

struct TrialEnsemble {
  int n_trials = 0;
  std::vector<std::int64_t> checkpoints;
  std::vector<double> mean_metric;
  std::vector<double> metric_stderr;
  std::optional<std::vector<Vector>> mean_iterate;
  std::vector<std::int64_t> iterations;  // per trial
  std::vector<bool> converged;           // per trial
  std::vector<bool> timed_out;           // per trial
  std::vector<double> elapsed_seconds;   // per trial

  double mean_iterations() const;
  double mean_elapsed() const;
  bool all_converged() const;
  bool any_timed_out() const;
};

struct TrialOptions {
  bool mean_iterates = false;
  int threads = 1;
};

/// x − α d.
Vector pfr_step(const Vector& x, const UpdateDirection& d, double alpha);
/// x − α d + ω (x − x_prev).
Vector mpfr_step(const Vector& x, const Vector& x_prev, const UpdateDirection& d, double alpha, double omega);

/// Random stream used by trial `trial` of a run seeded with `seed`.
RandomStream trial_stream(std::uint64_t seed, int trial);

/// Runs mPFR (PFR when ω = 0) from x¹ = x⁰ = x0 until the metric reaches tol
/// or max_iter updates have been made, or the time limit runs out. Uses the
/// stream of trial 0.
SolveResult solve(const LinearSystem& system, const SamplerSpec& spec, const SolverConfig& config,
                  const Vector& x0);
SolveResult solve(const Sampler& sampler, const SolverConfig& config, const Vector& x0,
                  const ReferenceSolutions& refs, RandomStream& rng);

TrialEnsemble run_trials(const LinearSystem& system, const SamplerSpec& spec, const SolverConfig& config,
                         const Vector& x0, int n_trials, const TrialOptions& options = {});
TrialEnsemble run_trials(const Sampler& sampler, const SolverConfig& config, const Vector& x0,
                         const ReferenceSolutions& refs, int n_trials, const TrialOptions& options = {});

/// Runs exactly `iterations` updates without stopping rule or metric, calling
/// visit(k, x^k) for k = 0..iterations (x^0 = x0). Used by the oracle tools.
void for_each_iterate(const Sampler& sampler, double alpha, double omega, const Vector& x0, std::int64_t iterations,
                      RandomStream& rng, const std::function<void(std::int64_t, const Vector&)>& visit);

}  // namespace pfr

#endif  // PFR_SOLVER_HPP
