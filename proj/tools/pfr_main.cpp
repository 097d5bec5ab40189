// pfr: command-line front end for the PFR/mPFR solvers, rate calculators and
// verification suite. Exit codes: 0 ok, 1 inadmissible or failed check,
// 2 usage, parse or I/O error.

#include "pfr/data.hpp"
#include "pfr/errors.hpp"
#include "pfr/experiments.hpp"
#include "pfr/oracle.hpp"
#include "pfr/theory.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace pfr;

struct Options {
  std::string method = "RK";
  std::vector<std::string> methods{"RK", "RBK", "BGK"};
  Index block = 0;
  std::string mtx;
  Index m = 500;
  Index n = 100;
  double kappa = 0.0;
  double density = 1.0;
  std::string rhs = "consistent";
  std::string alpha = "default";
  std::vector<double> omegas{0.0};
  int trials = 10;
  std::int64_t max_iter = 100000;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::string out;
  std::string metric = "auto";
  std::int64_t trace_every = 1;
  int threads = 1;
  double timeout = 200.0;

  std::string graph = "cycle";
  Index nodes = 100;
  double radius = 0.0;

  std::string theorem = "all";

  std::int64_t samples = 100000;
  std::int64_t fourth_samples = 1000000;
  int decay_trials = 2000;
  bool corrupt_sampler = false;
};

struct ExitCode {
  int code;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join_omegas(const std::vector<double>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + num(w[i]);
  return s;
}

std::optional<double> parse_alpha(const std::string& text) {
  if (text == "default") return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw DomainError("--alpha must be 'default' or a number, got '" + text + "'");
  return v;
}

SamplerSpec make_spec(const std::string& name, Index block, const Problem& p) {
  SamplerSpec spec{parse_sampler_kind(name), block};
  if (spec.uses_block() && block == 0) {
    const bool rows = spec.kind == SamplerKind::RBK || spec.kind == SamplerKind::BGK;
    spec.block = std::min<Index>(10, rows ? p.system.m() : p.system.n());
  }
  spec.validate(p.system);
  return spec;
}

Problem load_problem(const Options& o) {
  MatrixSource src;
  src.mtx_path = o.mtx;
  src.m = o.m;
  src.n = o.n;
  src.kappa = o.kappa;
  src.density = o.density;
  src.seed = o.seed;
  return build_problem(src, parse_rhs_mode(o.rhs), o.seed);
}

SolverConfig base_config(const Options& o) {
  SolverConfig cfg;
  cfg.max_iter = o.max_iter;
  cfg.tol = o.tol;
  cfg.seed = o.seed;
  cfg.trace_every = o.trace_every;
  cfg.time_limit = o.timeout;
  return cfg;
}

Metric resolve_metric(const Options& o, const SamplerSpec& spec, const Problem& p) {
  if (o.metric == "auto") return default_metric(spec.kind, p.consistent);
  return parse_metric(o.metric);
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw Error("cannot write '" + o.out + "'");
  f << text;
  if (!f) throw Error("write to '" + o.out + "' failed");
}

std::vector<std::string> run_provenance(const std::string& command, const Options& o, const SamplerSpec& spec,
                                        double alpha, const SolverConfig& cfg, const Problem& p) {
  std::vector<std::string> prov{"pfr " + command,
                                "method=" + to_string(spec),
                                "alpha=" + num(alpha) + (o.alpha == "default" ? " (default)" : ""),
                                "omega=" + join_omegas(o.omegas),
                                "seed=" + std::to_string(o.seed),
                                "trials=" + std::to_string(o.trials),
                                "max_iter=" + std::to_string(cfg.max_iter),
                                "tol=" + num(cfg.tol),
                                "metric=" + to_string(cfg.metric),
                                "trace_every=" + std::to_string(cfg.trace_every)};
  prov.insert(prov.end(), p.provenance.begin(), p.provenance.end());
  prov.push_back("setup_seconds=" + num(p.setup_seconds));
  return prov;
}

int cmd_sweep(const Options& o, bool single) {
  const Problem p = load_problem(o);
  const SamplerSpec spec = make_spec(o.method, o.block, p);
  SolverConfig cfg = base_config(o);
  cfg.alpha = resolve_alpha(parse_alpha(o.alpha), spec, p);
  cfg.metric = resolve_metric(o, spec, p);
  Options used = o;
  if (single) used.omegas.resize(1);
  TrialOptions topts;
  topts.threads = o.threads;
  const SweepResult sweep = run_sweep(p, spec, cfg, used.omegas, o.trials, topts);
  const auto prov = run_provenance(single ? "solve" : "sweep", used, spec, cfg.alpha, cfg, p);

  std::ostringstream out;
  if (!single) {
    write_sweep_csv(out, sweep, prov);
  } else {
    const SweepColumn& col = sweep.columns.front();
    if (!col.ensemble) throw DivergenceError(0, col.error + "; ");
    const TrialEnsemble& e = *col.ensemble;
    for (const auto& l : prov) out << "# " << l << '\n';
    out << "# mean_iterations=" << num(e.mean_iterations()) << " converged="
        << std::count(e.converged.begin(), e.converged.end(), true) << "/" << e.n_trials
        << " mean_seconds=" << num(e.mean_elapsed()) << '\n';
    out << "iter,metric,stderr\n";
    char buf[64];
    for (std::size_t i = 0; i < e.checkpoints.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10e,%.4e", e.mean_metric[i], e.metric_stderr[i]);
      out << e.checkpoints[i] << ',' << buf << '\n';
    }
  }
  emit(o, out.str());
  if (single) return 0;
  for (const auto& col : sweep.columns)
    if (!col.ensemble) return 1;
  return 0;
}

int cmd_compare(const Options& o) {
  const Problem p = load_problem(o);
  std::vector<SamplerSpec> specs;
  for (const auto& name : o.methods) specs.push_back(make_spec(name, o.block, p));
  SolverConfig cfg = base_config(o);
  const auto runs = run_compare(p, specs, parse_alpha(o.alpha), cfg, o.omegas);
  std::vector<std::string> prov{"pfr compare", "omega=" + join_omegas(o.omegas), "seed=" + std::to_string(o.seed),
                                "max_iter=" + std::to_string(cfg.max_iter), "tol=" + num(cfg.tol),
                                "timeout_seconds=" + num(o.timeout)};
  prov.insert(prov.end(), p.provenance.begin(), p.provenance.end());
  prov.push_back("setup_seconds=" + num(p.setup_seconds) + " (excluded from iteration timings)");
  std::ostringstream out;
  write_compare_csv(out, runs, prov);
  emit(o, out.str());
  return 0;
}

int cmd_consensus(const Options& o) {
  GraphTopology topo{parse_graph_kind(o.graph), o.nodes, o.radius};
  const Vector c = node_values(o.nodes, o.seed);
  const IncidenceSystem graph = incidence_system(topo, c, o.seed);
  ConsensusOptions copts;
  copts.block = o.block == 0 ? 20 : o.block;
  copts.omegas = o.omegas;
  copts.n_trials = o.trials;
  copts.seed = o.seed;
  copts.tol = o.tol;
  copts.max_iter = o.max_iter;
  copts.time_limit = o.timeout;
  copts.alpha = parse_alpha(o.alpha);
  const auto cells = run_consensus(graph, c, copts);

  std::ostringstream out;
  out << "# pfr consensus\n# graph=" << to_string(topo.kind) << " nodes=" << o.nodes
      << " edges=" << graph.edges.size();
  if (topo.kind == GraphKind::RGG)
    out << " radius=" << num(o.radius > 0.0 ? o.radius : default_rgg_radius(o.nodes));
  out << "\n# c_bar=" << num(graph.c_bar) << " seed=" << o.seed << " trials=" << o.trials << " tol=" << num(o.tol)
      << " timeout_seconds=" << num(o.timeout) << " max_iter=" << o.max_iter << '\n';
  out << format_consensus_table(cells);
  emit(o, out.str());
  return 0;
}

int cmd_rates(const Options& o) {
  const Problem p = load_problem(o);
  const SamplerSpec spec = make_spec(o.method, o.block, p);
  const double alpha = resolve_alpha(parse_alpha(o.alpha), spec, p);
  const double omega = o.omegas.front();
  const auto applicable = applicable_theorems(spec, p.system, p.info, p.consistent);

  std::vector<TheoremId> ids;
  if (o.theorem == "all") {
    ids = applicable;
  } else {
    ids.push_back(parse_theorem_id(o.theorem));
  }
  std::ostringstream out;
  out << "# pfr rates\n";
  for (const auto& l : p.provenance) out << "# " << l << '\n';
  out << "applicable=";
  for (std::size_t i = 0; i < applicable.size(); ++i) out << (i ? "," : "") << to_string(applicable[i]);
  out << '\n';
  int admissible = 0;
  for (TheoremId id : ids) {
    out << '\n';
    if (std::find(applicable.begin(), applicable.end(), id) == applicable.end())
      out << "note=hypotheses of " << to_string(id) << " do not hold for this method and system\n";
    const RateReport rep = rate_report(id, spec, p.info, p.system, alpha, omega);
    out << rep.to_key_values();
    if (rep.admissible) ++admissible;
  }
  emit(o, out.str());
  return admissible > 0 ? 0 : 1;
}

int cmd_verify(const Options& o) {
  VerifyOptions v;
  v.seed = o.seed;
  v.operator_samples = o.samples;
  v.fourth_moment_samples = o.fourth_samples;
  v.decay_trials = o.decay_trials;
  v.corrupt_sampler = o.corrupt_sampler;
  const auto results = run_verification_suite(v);
  std::ostringstream out;
  out << "# pfr verify seed=" << o.seed << " samples=" << o.samples << " fourth_moment_samples=" << o.fourth_samples
      << " decay_trials=" << o.decay_trials << '\n';
  out << format_verification_table(results);
  const auto failed = std::count_if(results.begin(), results.end(), [](const CheckResult& r) { return !r.pass; });
  out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
  emit(o, out.str());
  return failed == 0 ? 0 : 1;
}

void add_problem_flags(CLI::App* sub, Options& o) {
  sub->add_option("--mtx", o.mtx, "Matrix Market file for A");
  sub->add_option("--m", o.m, "rows of a generated matrix")->check(CLI::PositiveNumber);
  sub->add_option("--n", o.n, "columns of a generated matrix")->check(CLI::PositiveNumber);
  sub->add_option("--kappa", o.kappa, "target condition number (conditioned or sparse generator)");
  sub->add_option("--density", o.density, "fill fraction; below 1 selects the sparse generator");
  sub->add_option("--rhs", o.rhs, "consistent or inconsistent");
  sub->add_option("--seed", o.seed, "seed for data and sampling");
}

void add_run_flags(CLI::App* sub, Options& o) {
  sub->add_option("--alpha", o.alpha, "stepsize, or 'default'");
  sub->add_option("--omega", o.omegas, "momentum values, comma separated")->delimiter(',');
  sub->add_option("--trials", o.trials, "independent trials")->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", o.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--tol", o.tol, "stopping tolerance on the relative error");
  sub->add_option("--block", o.block, "block size p or s for RBK, RBCD, BGK, BGLS");
  sub->add_option("--out", o.out, "output file (default stdout)");
  sub->add_option("--timeout", o.timeout, "wall-clock limit per run in seconds (0: none)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudoinverse-free randomized solvers with heavy-ball momentum"};
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "run trials at one (alpha, omega) and print the mean metric trace");
  auto* sweep = app.add_subcommand("sweep", "mean metric trace for each omega in a list");
  auto* compare = app.add_subcommand("compare", "time-versus-metric traces for several methods");
  auto* consensus = app.add_subcommand("consensus", "average consensus on a graph incidence system");
  auto* rates = app.add_subcommand("rates", "closed-form rate constants and admissibility");
  auto* verify = app.add_subcommand("verify", "expectation identities and rate checks by enumeration and sampling");

  for (auto* sub : {solve, sweep, rates}) {
    sub->add_option("--method", o.method, "RK, RGS, DSGS, RBK, RBCD, BGK, BGLS or SGC (optional leading m)");
  }
  for (auto* sub : {solve, sweep, compare, rates}) add_problem_flags(sub, o);
  for (auto* sub : {solve, sweep, compare}) {
    add_run_flags(sub, o);
    sub->add_option("--trace-every", o.trace_every, "record every k-th iteration")->check(CLI::PositiveNumber);
  }
  for (auto* sub : {solve, sweep}) {
    sub->add_option("--metric", o.metric, "RSE, RRE or auto");
    sub->add_option("--threads", o.threads, "worker threads for trials")->check(CLI::PositiveNumber);
  }
  compare->add_option("--methods", o.methods, "method list, comma separated")->delimiter(',');

  add_run_flags(consensus, o);
  consensus->add_option("--graph", o.graph, "cycle, line or rgg");
  consensus->add_option("--nodes", o.nodes, "number of nodes")->check(CLI::PositiveNumber);
  consensus->add_option("--radius", o.radius, "RGG connection radius (default sqrt(log n / n))");
  consensus->add_option("--seed", o.seed, "seed for node values, graph and sampling");

  rates->add_option("--alpha", o.alpha, "stepsize, or 'default'");
  rates->add_option("--omega", o.omegas, "momentum (first value used)")->delimiter(',');
  rates->add_option("--block", o.block, "block size p or s");
  rates->add_option("--theorem", o.theorem,
                    "General, NoMomentum, FullColumnRank, FullColumnRankConsistent, ColumnSketchOnly, "
                    "RowSketchOnly, AnnihilatedResidual or all");
  rates->add_option("--out", o.out, "output file (default stdout)");

  verify->add_option("--seed", o.seed, "seed");
  verify->add_option("--samples", o.samples, "Monte-Carlo samples per operator and constant")
      ->check(CLI::PositiveNumber);
  verify->add_option("--fourth-samples", o.fourth_samples, "Monte-Carlo samples for the fourth-moment check")
      ->check(CLI::PositiveNumber);
  verify->add_option("--decay-trials", o.decay_trials, "trials for the direction-decay check")
      ->check(CLI::PositiveNumber);
  verify->add_option("--out", o.out, "output file (default stdout)");
  verify->add_flag("--corrupt-sampler", o.corrupt_sampler)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  // Consensus and compare run to RSE 1e-12 under the wall-clock limit.
  for (auto* sub : {compare, consensus}) {
    if (!*sub) continue;
    if (sub->count("--tol") == 0) o.tol = 1e-12;
    if (sub->count("--max-iter") == 0) o.max_iter = 10'000'000;
  }
  if (*consensus) {
    if (consensus->count("--omega") == 0) o.omegas = {0.0, 0.5};
    if (consensus->count("--trials") == 0) o.trials = 1;
  }
  if (o.trials < 1 || o.omegas.empty()) {
    std::cerr << "error: need at least one trial and one omega\n";
    return 2;
  }

  try {
    if (*solve) return cmd_sweep(o, true);
    if (*sweep) return cmd_sweep(o, false);
    if (*compare) return cmd_compare(o);
    if (*consensus) return cmd_consensus(o);
    if (*rates) return cmd_rates(o);
    if (*verify) return cmd_verify(o);
  } catch (const InadmissibleError& e) {
    std::cerr << "inadmissible: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
