#include "pfr/solver.hpp"

#include "pfr/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace pfr {

namespace {

constexpr double kDivergenceThreshold = 1e12;
constexpr std::int64_t kResidualRefresh = 1000;
constexpr std::int64_t kClockStride = 256;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// A d, exploiting a sparse support when the direction has one.
void apply_matrix(const CoefficientMatrix& a, const UpdateDirection& dir, Vector& out) {
  if (dir.sparse_support) {
    out.setZero(a.rows());
    for (Index i : dir.support) a.add_column(i, dir.d[i], out);
  } else {
    out = a.multiply(dir.d);
  }
}

}  // namespace

double TrialEnsemble::mean_iterations() const {
  if (iterations.empty()) return 0.0;
  double s = 0.0;
  for (auto k : iterations) s += static_cast<double>(k);
  return s / static_cast<double>(iterations.size());
}

double TrialEnsemble::mean_elapsed() const {
  if (elapsed_seconds.empty()) return 0.0;
  double s = 0.0;
  for (double t : elapsed_seconds) s += t;
  return s / static_cast<double>(elapsed_seconds.size());
}

bool TrialEnsemble::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

bool TrialEnsemble::any_timed_out() const {
  return std::any_of(timed_out.begin(), timed_out.end(), [](bool t) { return t; });
}

Vector pfr_step(const Vector& x, const UpdateDirection& d, double alpha) {
  if (d.d.size() != x.size()) throw DomainError("pfr_step: dimension mismatch");
  return x - alpha * d.d;
}

Vector mpfr_step(const Vector& x, const Vector& x_prev, const UpdateDirection& d, double alpha, double omega) {
  if (omega == 0.0) return pfr_step(x, d, alpha);
  if (d.d.size() != x.size() || x_prev.size() != x.size()) throw DomainError("mpfr_step: dimension mismatch");
  return x - alpha * d.d + omega * (x - x_prev);
}

RandomStream trial_stream(std::uint64_t seed, int trial) {
  return RandomStream(seed, streams::kTrialBase + static_cast<std::uint64_t>(trial));
}

SolveResult solve(const LinearSystem& system, const SamplerSpec& spec, const SolverConfig& config,
                  const Vector& x0) {
  const Sampler sampler(spec, system);
  const ReferenceSolutions refs = reference_solutions(system, x0);
  RandomStream rng = trial_stream(config.seed, 0);
  return solve(sampler, config, x0, refs, rng);
}

SolveResult solve(const Sampler& sampler, const SolverConfig& config, const Vector& x0,
                  const ReferenceSolutions& refs, RandomStream& rng) {
  config.validate();
  const LinearSystem& system = sampler.system();
  const CoefficientMatrix& a = system.a();
  if (x0.size() != system.n())
    throw DomainError("initial point has " + std::to_string(x0.size()) + " entries, expected " +
                      std::to_string(system.n()));
  const auto start = Clock::now();
  const bool use_rse = config.metric == Metric::RSE;
  const bool momentum = config.omega != 0.0;
  const bool track_r = sampler.needs_full_residual() || !use_rse;

  SolveResult result;
  Vector x = x0;
  Vector x_prev = x0;
  Vector r, r_prev, ad;
  if (track_r) {
    r = system.residual(x);
    r_prev = r;
  }

  const Vector& ref = use_rse ? refs.x0_star : refs.r_star;
  const Vector initial = use_rse ? x0 : (track_r ? r : system.residual(x0));
  const double denom = (initial - ref).squaredNorm();
  auto record = [&](std::int64_t k, double value) {
    result.trace.entries.push_back({k, value, seconds_since(start)});
    if (config.record_iterates) result.iterates.push_back(x);
  };

  // Starting on the reference: nothing to do, and the relative metric is 0/0.
  const double tiny = 1e-12 * (1.0 + ref.norm());
  if (std::sqrt(denom) <= tiny) {
    record(0, 0.0);
    result.x_final = x;
    result.converged = true;
    result.elapsed_seconds = seconds_since(start);
    return result;
  }
  record(0, 1.0);

  SampleRealization sample = RowDraw{0};
  UpdateDirection dir;
  std::int64_t k = 0;
  while (k < config.max_iter) {
    sampler.draw(rng, sample);
    sampler.update_direction(sample, x, track_r ? &r : nullptr, dir);
    ++k;

    if (!momentum) {
      if (dir.sparse_support) {
        for (Index i : dir.support) x[i] = x[i] - config.alpha * dir.d[i];
      } else {
        x = x - config.alpha * dir.d;
      }
      if (track_r) {
        if (k % kResidualRefresh == 0) {
          r = system.residual(x);
        } else {
          apply_matrix(a, dir, ad);
          r -= config.alpha * ad;
        }
      }
    } else {
      x_prev = x - config.alpha * dir.d + config.omega * (x - x_prev);
      x.swap(x_prev);
      if (track_r) {
        if (k % kResidualRefresh == 0) {
          r_prev = system.residual(x_prev);
          r = system.residual(x);
        } else {
          apply_matrix(a, dir, ad);
          r_prev = r - config.alpha * ad + config.omega * (r - r_prev);
          r.swap(r_prev);
        }
      }
    }

    const bool out_of_time =
        config.time_limit > 0.0 && k % kClockStride == 0 && seconds_since(start) > config.time_limit;
    const bool traced = k % config.trace_every == 0;
    if (!traced && !out_of_time && k % config.check_every != 0 && k != config.max_iter) continue;

    const double value = use_rse ? (x - ref).squaredNorm() / denom : (r - ref).squaredNorm() / denom;
    if (!std::isfinite(value) || value > kDivergenceThreshold) throw DivergenceError(k);
    const bool done = value <= config.tol;
    if (traced || done || out_of_time || k == config.max_iter) record(k, value);
    if (done) {
      result.converged = true;
      break;
    }
    if (out_of_time) {
      result.timed_out = true;
      break;
    }
  }

  result.iterations = k;
  result.x_final = std::move(x);
  result.elapsed_seconds = seconds_since(start);
  return result;
}

TrialEnsemble run_trials(const LinearSystem& system, const SamplerSpec& spec, const SolverConfig& config,
                         const Vector& x0, int n_trials, const TrialOptions& options) {
  const Sampler sampler(spec, system);
  const ReferenceSolutions refs = reference_solutions(system, x0);
  return run_trials(sampler, config, x0, refs, n_trials, options);
}

TrialEnsemble run_trials(const Sampler& sampler, const SolverConfig& config, const Vector& x0,
                         const ReferenceSolutions& refs, int n_trials, const TrialOptions& options) {
  if (n_trials < 1) throw DomainError("n_trials must be at least 1");
  SolverConfig cfg = config;
  cfg.record_iterates = config.record_iterates || options.mean_iterates;

  std::vector<SolveResult> results(n_trials);
  std::vector<std::exception_ptr> errors(n_trials);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int t = next++; t < n_trials; t = next++) {
      try {
        RandomStream rng = trial_stream(cfg.seed, t);
        results[t] = solve(sampler, cfg, x0, refs, rng);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(options.threads, 1, n_trials);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (int t = 0; t < n_trials; ++t) {
    if (!errors[t]) continue;
    const std::string prefix = "trial " + std::to_string(t) + ": ";
    try {
      std::rethrow_exception(errors[t]);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.iteration(), prefix);
    } catch (const std::exception& e) {
      throw Error(prefix + e.what());
    }
  }

  TrialEnsemble ens;
  ens.n_trials = n_trials;
  for (const auto& res : results) {
    for (const auto& e : res.trace.entries)
      if (e.k % cfg.trace_every == 0) ens.checkpoints.push_back(e.k);
    ens.iterations.push_back(res.iterations);
    ens.converged.push_back(res.converged);
    ens.timed_out.push_back(res.timed_out);
    ens.elapsed_seconds.push_back(res.elapsed_seconds);
  }
  std::sort(ens.checkpoints.begin(), ens.checkpoints.end());
  ens.checkpoints.erase(std::unique(ens.checkpoints.begin(), ens.checkpoints.end()), ens.checkpoints.end());

  const std::size_t nc = ens.checkpoints.size();
  ens.mean_metric.assign(nc, 0.0);
  ens.metric_stderr.assign(nc, 0.0);
  std::vector<double> m2(nc, 0.0);
  double seen = 0.0;
  if (options.mean_iterates) ens.mean_iterate = std::vector<Vector>(nc, Vector::Zero(x0.size()));

  for (const auto& res : results) {
    seen += 1.0;
    // entries are ordered by k; hold the last value past the end of the trace
    std::size_t pos = 0;
    const auto& entries = res.trace.entries;
    for (std::size_t c = 0; c < nc; ++c) {
      while (pos + 1 < entries.size() && entries[pos + 1].k <= ens.checkpoints[c]) ++pos;
      const double v = entries[pos].metric_value;
      const double delta = v - ens.mean_metric[c];
      ens.mean_metric[c] += delta / seen;
      m2[c] += delta * (v - ens.mean_metric[c]);
      if (options.mean_iterates) (*ens.mean_iterate)[c] += res.iterates[pos];
    }
  }
  const double nt = static_cast<double>(n_trials);
  for (std::size_t c = 0; c < nc; ++c) {
    if (n_trials > 1) ens.metric_stderr[c] = std::sqrt(m2[c] / (nt - 1.0) / nt);
    if (options.mean_iterates) (*ens.mean_iterate)[c] /= nt;
  }
  return ens;
}

void for_each_iterate(const Sampler& sampler, double alpha, double omega, const Vector& x0, std::int64_t iterations,
                      RandomStream& rng, const std::function<void(std::int64_t, const Vector&)>& visit) {
  Vector x = x0;
  Vector x_prev = x0;
  SampleRealization sample = RowDraw{0};
  UpdateDirection dir;
  visit(0, x);
  for (std::int64_t k = 1; k <= iterations; ++k) {
    sampler.draw(rng, sample);
    sampler.update_direction(sample, x, nullptr, dir);
    Vector next = mpfr_step(x, x_prev, dir, alpha, omega);
    x_prev.swap(x);
    x.swap(next);
    visit(k, x);
  }
}

}  // namespace pfr
