#include "pfr/experiments.hpp"

#include "pfr/errors.hpp"
#include "pfr/theory.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace pfr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_provenance(std::ostream& out, const std::vector<std::string>& lines) {
  for (const auto& l : lines) out << "# " << l << '\n';
}

// Metric of the ensemble at checkpoint k, holding the last value past the end.
double held_value(const TrialEnsemble& ens, std::int64_t k) {
  const auto it = std::upper_bound(ens.checkpoints.begin(), ens.checkpoints.end(), k);
  if (it == ens.checkpoints.begin()) return ens.mean_metric.front();
  return ens.mean_metric[static_cast<std::size_t>(it - ens.checkpoints.begin() - 1)];
}

}  // namespace

Problem build_problem(const MatrixSource& source, RhsMode rhs, std::uint64_t seed) {
  const auto start = Clock::now();
  std::vector<std::string> prov;
  std::optional<CoefficientMatrix> a;
  if (!source.mtx_path.empty()) {
    a = read_matrix_market(source.mtx_path);
    prov.push_back("matrix=mtx path=" + source.mtx_path);
  } else if (source.density < 1.0) {
    std::string warning;
    a = CoefficientMatrix(gen_sparse(source.m, source.n, source.density, std::max(source.kappa, 1.0), source.seed,
                                     &warning));
    prov.push_back("matrix=sparse m=" + std::to_string(source.m) + " n=" + std::to_string(source.n) +
                   " density=" + num(source.density) + " kappa=" + num(std::max(source.kappa, 1.0)) +
                   " seed=" + std::to_string(source.seed));
    if (!warning.empty()) prov.push_back("warning=" + warning);
  } else if (source.kappa > 0.0) {
    a = CoefficientMatrix(gen_conditioned(source.m, source.n, source.kappa, source.seed));
    prov.push_back("matrix=conditioned m=" + std::to_string(source.m) + " n=" + std::to_string(source.n) +
                   " kappa=" + num(source.kappa) + " seed=" + std::to_string(source.seed));
  } else {
    a = CoefficientMatrix(gen_gaussian(source.m, source.n, source.seed));
    prov.push_back("matrix=gaussian m=" + std::to_string(source.m) + " n=" + std::to_string(source.n) +
                   " seed=" + std::to_string(source.seed));
  }
  const RightHandSide r = make_rhs(*a, {rhs, seed}, seed);
  prov.push_back("rhs=" + to_string(rhs) + " seed=" + std::to_string(seed));
  Problem p = build_problem(LinearSystem(*a, r.b), Vector::Zero(a->cols()), std::move(prov));
  p.setup_seconds = seconds_since(start);
  return p;
}

Problem build_problem(LinearSystem system, Vector x0, std::vector<std::string> provenance) {
  const auto start = Clock::now();
  SpectralInfo info = compute_spectral_info(system.a(), true);
  ReferenceSolutions refs = reference_solutions(system, x0, info);
  const bool consistent = is_consistent(system, refs);
  provenance.push_back("shape=" + std::to_string(system.m()) + "x" + std::to_string(system.n()) +
                       " rank=" + std::to_string(info.rank) + " consistent=" + (consistent ? "yes" : "no"));
  Problem p{std::move(system), std::move(info), std::move(refs), std::move(x0), consistent, std::move(provenance), 0.0};
  p.setup_seconds = seconds_since(start);
  return p;
}

Metric default_metric(SamplerKind kind, bool consistent) {
  if (consistent) return Metric::RSE;
  switch (kind) {
    case SamplerKind::RGS:
    case SamplerKind::RBCD:
    case SamplerKind::BGLS:
      return Metric::RRE;
    default:
      return Metric::RSE;
  }
}

double resolve_alpha(const std::optional<double>& alpha, const SamplerSpec& spec, const Problem& problem) {
  if (alpha) return *alpha;
  return default_stepsize(spec, problem.info, problem.system);
}

SweepResult run_sweep(const Problem& problem, const SamplerSpec& spec, const SolverConfig& config,
                      const std::vector<double>& omegas, int n_trials, const TrialOptions& options) {
  if (omegas.empty()) throw DomainError("omega list is empty");
  const Sampler sampler(spec, problem.system);
  SweepResult out;
  out.spec = spec;
  out.config = config;
  out.n_trials = n_trials;
  for (double w : omegas) {
    SweepColumn col;
    col.omega = w;
    SolverConfig cfg = config;
    cfg.omega = w;
    try {
      col.ensemble = run_trials(sampler, cfg, problem.x0, problem.refs, n_trials, options);
    } catch (const DivergenceError& e) {
      col.error = e.what();
    }
    out.columns.push_back(std::move(col));
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::vector<std::string>& provenance) {
  write_provenance(out, provenance);
  for (const auto& col : sweep.columns) {
    if (!col.ensemble) {
      out << "# error omega=" << num(col.omega) << ": " << col.error << '\n';
      continue;
    }
    const TrialEnsemble& e = *col.ensemble;
    const auto done = std::count(e.converged.begin(), e.converged.end(), true);
    out << "# omega=" << num(col.omega) << " mean_iterations=" << num(e.mean_iterations())
        << " converged=" << done << "/" << e.n_trials << " mean_seconds=" << num(e.mean_elapsed()) << '\n';
  }
  std::vector<std::int64_t> ks;
  for (const auto& col : sweep.columns)
    if (col.ensemble) ks.insert(ks.end(), col.ensemble->checkpoints.begin(), col.ensemble->checkpoints.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  out << "iter";
  for (const auto& col : sweep.columns) out << ",omega=" << num(col.omega);
  out << '\n';
  char buf[40];
  for (std::int64_t k : ks) {
    out << k;
    for (const auto& col : sweep.columns) {
      if (col.ensemble) {
        std::snprintf(buf, sizeof buf, "%.10e", held_value(*col.ensemble, k));
        out << ',' << buf;
      } else {
        out << ",nan";
      }
    }
    out << '\n';
  }
}

std::vector<CompareRun> run_compare(const Problem& problem, const std::vector<SamplerSpec>& specs,
                                    const std::optional<double>& alpha, const SolverConfig& config,
                                    const std::vector<double>& omegas) {
  if (specs.empty()) throw DomainError("method list is empty");
  if (omegas.empty()) throw DomainError("omega list is empty");
  std::vector<CompareRun> out;
  for (const SamplerSpec& spec : specs) {
    const auto start = Clock::now();
    const Sampler sampler(spec, problem.system);
    const double a = resolve_alpha(alpha, spec, problem);
    const double setup = seconds_since(start);
    for (double w : omegas) {
      CompareRun run;
      run.spec = spec;
      run.omega = w;
      run.alpha = a;
      run.setup_seconds = setup;
      SolverConfig cfg = config;
      cfg.alpha = a;
      cfg.omega = w;
      cfg.metric = default_metric(spec.kind, problem.consistent);
      RandomStream rng = trial_stream(cfg.seed, 0);
      try {
        run.result = solve(sampler, cfg, problem.x0, problem.refs, rng);
      } catch (const DivergenceError& e) {
        run.error = e.what();
      }
      out.push_back(std::move(run));
    }
  }
  return out;
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRun>& runs,
                       const std::vector<std::string>& provenance) {
  write_provenance(out, provenance);
  for (const auto& run : runs) {
    out << "# method=" << to_string(run.spec) << " omega=" << num(run.omega) << " alpha=" << num(run.alpha)
        << " setup_seconds=" << num(run.setup_seconds);
    if (!run.result) {
      out << " status=error (" << run.error << ")\n";
      continue;
    }
    const SolveResult& r = *run.result;
    const char* status = r.converged ? "converged" : r.timed_out ? "timeout" : "max_iter";
    out << " status=" << status << " iterations=" << r.iterations << " seconds=" << num(r.elapsed_seconds) << '\n';
  }
  out << "method,omega,iter,seconds,metric\n";
  char buf[80];
  for (const auto& run : runs) {
    if (!run.result) continue;
    for (const auto& e : run.result->trace.entries) {
      std::snprintf(buf, sizeof buf, "%.6e,%.10e", e.wall_seconds, e.metric_value);
      out << to_string(run.spec) << ',' << num(run.omega) << ',' << e.k << ',' << buf << '\n';
    }
  }
}

std::vector<ConsensusCell> run_consensus(const IncidenceSystem& graph, const Vector& c,
                                         const ConsensusOptions& options) {
  const Problem problem = build_problem(graph.system, c, {});
  const Index p = std::min<Index>(options.block, graph.system.m());
  const std::vector<SamplerSpec> specs{SamplerSpec::rk(), SamplerSpec::rbk(p), SamplerSpec::bgk(p)};
  std::vector<ConsensusCell> out;
  for (const SamplerSpec& spec : specs) {
    const Sampler sampler(spec, graph.system);
    const double alpha = resolve_alpha(options.alpha, spec, problem);
    for (double w : options.omegas) {
      SolverConfig cfg;
      cfg.alpha = alpha;
      cfg.omega = w;
      cfg.tol = options.tol;
      cfg.max_iter = options.max_iter;
      cfg.seed = options.seed;
      cfg.metric = Metric::RSE;
      cfg.trace_every = options.max_iter;
      cfg.time_limit = options.time_limit;
      const TrialEnsemble ens = run_trials(sampler, cfg, problem.x0, problem.refs, options.n_trials);
      ConsensusCell cell;
      cell.spec = spec;
      cell.omega = w;
      cell.alpha = alpha;
      cell.mean_iterations = ens.mean_iterations();
      cell.mean_seconds = ens.mean_elapsed();
      cell.converged = ens.all_converged();
      cell.timed_out = ens.any_timed_out();
      out.push_back(cell);
    }
  }
  return out;
}

std::string format_consensus_table(const std::vector<ConsensusCell>& cells) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s %10s %14s %12s\n", "method", "omega", "alpha", "iterations", "seconds");
  out << line;
  for (const auto& c : cells) {
    const std::string name = "m" + to_string(c.spec);
    if (c.timed_out) {
      std::snprintf(line, sizeof line, "%-10s %8.3g %10.4g %14s %12s\n", name.c_str(), c.omega, c.alpha, "--", "--");
    } else {
      char iters[32];
      std::snprintf(iters, sizeof iters, c.converged ? "%.4g" : "%.4g*", c.mean_iterations);
      std::snprintf(line, sizeof line, "%-10s %8.3g %10.4g %14s %12.4g\n", name.c_str(), c.omega, c.alpha, iters,
                    c.mean_seconds);
    }
    out << line;
  }
  return out.str();
}

}  // namespace pfr
