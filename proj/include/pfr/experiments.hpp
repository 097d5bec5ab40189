#ifndef PFR_EXPERIMENTS_HPP
#define PFR_EXPERIMENTS_HPP

#include "pfr/core.hpp"
#include "pfr/data.hpp"
#include "pfr/samplers.hpp"
#include "pfr/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pfr {

/// Where the coefficient matrix comes from. A Matrix Market path wins; else
/// density < 1 selects the sparse generator, kappa > 0 the conditioned one,
/// and plain Gaussian otherwise.
struct MatrixSource {
  std::string mtx_path;
  Index m = 500;
  Index n = 100;
  double kappa = 0.0;
  double density = 1.0;
  std::uint64_t seed = 0;
};

/// A system with everything the runs need precomputed. x0 = 0 unless given.
struct Problem {
  LinearSystem system;
  SpectralInfo info;
  ReferenceSolutions refs;
  Vector x0;
  bool consistent = true;
  std::vector<std::string> provenance;  // key=value lines
  double setup_seconds = 0.0;
};

Problem build_problem(const MatrixSource& source, RhsMode rhs, std::uint64_t seed);
Problem build_problem(LinearSystem system, Vector x0, std::vector<std::string> provenance);

/// RRE for RGS, RBCD and BGLS on inconsistent systems, RSE otherwise.
Metric default_metric(SamplerKind kind, bool consistent);

/// Explicit value, or default_stepsize when empty.
double resolve_alpha(const std::optional<double>& alpha, const SamplerSpec& spec, const Problem& problem);

struct SweepColumn {
  double omega = 0.0;
  std::optional<TrialEnsemble> ensemble;
  std::string error;  // set when a trial failed; the column is then empty
};

struct SweepResult {
  SamplerSpec spec;
  SolverConfig config;  // ω is per column
  int n_trials = 0;
  std::vector<SweepColumn> columns;
};

SweepResult run_sweep(const Problem& problem, const SamplerSpec& spec, const SolverConfig& config,
                      const std::vector<double>& omegas, int n_trials, const TrialOptions& options = {});

/// iter, then one mean-metric column per ω. Failed columns print "nan" and get
/// an "# error" line.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::vector<std::string>& provenance);

struct CompareRun {
  SamplerSpec spec;
  double omega = 0.0;
  double alpha = 0.0;
  double setup_seconds = 0.0;  // sampler tables, excluded from the trace times
  std::optional<SolveResult> result;
  std::string error;
};

/// One trial-0 run per (method, ω); `config.alpha` is ignored and resolved
/// per method from `alpha`.
std::vector<CompareRun> run_compare(const Problem& problem, const std::vector<SamplerSpec>& specs,
                                    const std::optional<double>& alpha, const SolverConfig& config,
                                    const std::vector<double>& omegas);

/// Long format: method, omega, iter, seconds, metric.
void write_compare_csv(std::ostream& out, const std::vector<CompareRun>& runs,
                       const std::vector<std::string>& provenance);

struct ConsensusCell {
  SamplerSpec spec;
  double omega = 0.0;
  double alpha = 0.0;
  double mean_iterations = 0.0;
  double mean_seconds = 0.0;
  bool converged = false;
  bool timed_out = false;
};

struct ConsensusOptions {
  Index block = 20;  // p for mRBK and mBGK
  std::vector<double> omegas{0.0, 0.5};
  int n_trials = 1;
  std::uint64_t seed = 0;
  double tol = 1e-12;
  std::int64_t max_iter = 10'000'000;
  double time_limit = 200.0;
  std::optional<double> alpha;
};

/// Runs mRK, mRBK and mBGK from x⁰ = c on the incidence system; RSE is taken
/// against c̄·1.
std::vector<ConsensusCell> run_consensus(const IncidenceSystem& graph, const Vector& c,
                                         const ConsensusOptions& options);

/// Rows per method, iterations and seconds per ω, "--" for timeouts.
std::string format_consensus_table(const std::vector<ConsensusCell>& cells);

}  // namespace pfr

#endif  // PFR_EXPERIMENTS_HPP
