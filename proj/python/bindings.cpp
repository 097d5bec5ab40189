#include "pfr/data.hpp"
#include "pfr/errors.hpp"
#include "pfr/experiments.hpp"
#include "pfr/oracle.hpp"
#include "pfr/samplers.hpp"
#include "pfr/solver.hpp"
#include "pfr/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <sstream>

namespace py = pybind11;
using namespace pfr;

namespace {

SamplerSpec spec_of(const std::string& method, Index block) {
  return {parse_sampler_kind(method), block};
}

Problem problem_of(const LinearSystem& system, const std::optional<Vector>& x0) {
  return build_problem(system, x0 ? *x0 : Vector::Zero(system.n()), {});
}

SolverConfig config_of(const SamplerSpec& spec, const Problem& p, std::optional<double> alpha, double omega,
                       double tol, std::int64_t max_iter, std::uint64_t seed, const std::string& metric,
                       std::int64_t trace_every) {
  SolverConfig cfg;
  cfg.alpha = resolve_alpha(alpha, spec, p);
  cfg.omega = omega;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.seed = seed;
  cfg.trace_every = trace_every;
  cfg.metric = metric == "auto" ? default_metric(spec.kind, p.consistent) : parse_metric(metric);
  return cfg;
}

py::dict key_values(const std::string& text) {
  py::dict out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[py::str(line.substr(0, eq))] = line.substr(eq + 1);
  }
  return out;
}

BetaKind beta_kind_of(const std::string& kind) {
  static const std::map<std::string, BetaKind> kinds{{"General", BetaKind::General},
                                                     {"IterateGram", BetaKind::IterateGram},
                                                     {"ColumnSketch", BetaKind::ColumnSketch},
                                                     {"RowSketch", BetaKind::RowSketch}};
  const auto it = kinds.find(kind);
  if (it == kinds.end()) throw DomainError("unknown beta kind '" + kind + "'");
  return it->second;
}

py::object matrix_to_python(const CoefficientMatrix& a) {
  if (a.is_sparse()) return py::cast(*a.sparse());
  return py::cast(*a.dense());
}

}  // namespace

PYBIND11_MODULE(_pfr, m) {
  m.doc() = "Pseudoinverse-free randomized solvers with heavy-ball momentum";

  static py::exception<Error> base(m, "PfrError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InadmissibleError>(m, "InadmissibleError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::class_<LinearSystem>(m, "System")
      .def(py::init([](const DenseMatrix& a, const Vector& b) { return LinearSystem(CoefficientMatrix(a), b); }),
           py::arg("a"), py::arg("b"))
      .def(py::init([](const SparseMatrix& a, const Vector& b) { return LinearSystem(CoefficientMatrix(a), b); }),
           py::arg("a"), py::arg("b"))
      .def_property_readonly("m", &LinearSystem::m)
      .def_property_readonly("n", &LinearSystem::n)
      .def_property_readonly("b", [](const LinearSystem& s) { return Vector(s.b()); })
      .def_property_readonly("frobenius_squared", &LinearSystem::frobenius_squared)
      .def("dense", [](const LinearSystem& s) { return s.a().to_dense(); })
      .def("residual", &LinearSystem::residual, py::arg("x"));

  m.def("methods", [] {
    std::vector<std::string> out;
    for (SamplerKind k : all_sampler_kinds()) out.push_back(to_string(k));
    return out;
  });

  m.def(
      "solve",
      [](const LinearSystem& system, const std::string& method, Index block, std::optional<double> alpha,
         double omega, double tol, std::int64_t max_iter, std::uint64_t seed, const std::string& metric,
         std::optional<Vector> x0, std::int64_t trace_every) {
        const SamplerSpec spec = spec_of(method, block);
        const Problem p = problem_of(system, x0);
        const SolverConfig cfg = config_of(spec, p, alpha, omega, tol, max_iter, seed, metric, trace_every);
        SolveResult r;
        {
          py::gil_scoped_release release;
          const Sampler sampler(spec, system);
          RandomStream rng = trial_stream(seed, 0);
          r = solve(sampler, cfg, p.x0, p.refs, rng);
        }
        std::vector<std::int64_t> ks;
        std::vector<double> values;
        for (const auto& e : r.trace.entries) {
          ks.push_back(e.k);
          values.push_back(e.metric_value);
        }
        py::dict out;
        out["x"] = r.x_final;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["alpha"] = cfg.alpha;
        out["metric"] = to_string(cfg.metric);
        out["k"] = ks;
        out["values"] = values;
        out["seconds"] = r.elapsed_seconds;
        return out;
      },
      py::arg("system"), py::arg("method"), py::arg("block") = 0, py::arg("alpha") = py::none(),
      py::arg("omega") = 0.0, py::arg("tol") = 1e-6, py::arg("max_iter") = 100000, py::arg("seed") = 0,
      py::arg("metric") = "auto", py::arg("x0") = py::none(), py::arg("trace_every") = 1);

  m.def(
      "run_trials",
      [](const LinearSystem& system, const std::string& method, Index block, std::optional<double> alpha,
         double omega, int trials, double tol, std::int64_t max_iter, std::uint64_t seed, const std::string& metric,
         std::optional<Vector> x0, std::int64_t trace_every) {
        const SamplerSpec spec = spec_of(method, block);
        const Problem p = problem_of(system, x0);
        const SolverConfig cfg = config_of(spec, p, alpha, omega, tol, max_iter, seed, metric, trace_every);
        TrialEnsemble e;
        {
          py::gil_scoped_release release;
          e = run_trials(Sampler(spec, system), cfg, p.x0, p.refs, trials);
        }
        py::dict out;
        out["k"] = e.checkpoints;
        out["mean"] = e.mean_metric;
        out["stderr"] = e.metric_stderr;
        out["iterations"] = e.iterations;
        out["mean_iterations"] = e.mean_iterations();
        out["all_converged"] = e.all_converged();
        out["alpha"] = cfg.alpha;
        return out;
      },
      py::arg("system"), py::arg("method"), py::arg("block") = 0, py::arg("alpha") = py::none(),
      py::arg("omega") = 0.0, py::arg("trials") = 10, py::arg("tol") = 1e-6, py::arg("max_iter") = 100000,
      py::arg("seed") = 0, py::arg("metric") = "auto", py::arg("x0") = py::none(), py::arg("trace_every") = 1);

  m.def(
      "default_stepsize",
      [](const LinearSystem& system, const std::string& method, Index block) {
        const SamplerSpec spec = spec_of(method, block);
        return default_stepsize(spec, compute_spectral_info(system.a(), false), system);
      },
      py::arg("system"), py::arg("method"), py::arg("block") = 0);

  m.def(
      "beta",
      [](const LinearSystem& system, const std::string& method, Index block, const std::string& kind) {
        const SamplerSpec spec = spec_of(method, block);
        const SpectralInfo info = compute_spectral_info(system.a(), false);
        if (kind == "primary") return beta_closed_form(spec, info, system);
        return beta_closed_form(spec, info, system, beta_kind_of(kind));
      },
      py::arg("system"), py::arg("method"), py::arg("block") = 0, py::arg("kind") = "primary");

  m.def(
      "estimate_beta",
      [](const LinearSystem& system, const std::string& method, Index block, const std::string& kind,
         std::int64_t samples, std::uint64_t seed) {
        RandomStream rng(seed, 6);
        const BetaEstimate e = estimate_beta(spec_of(method, block), system, beta_kind_of(kind), samples, rng);
        return py::make_tuple(e.value, e.stderr_value, e.exact());
      },
      py::arg("system"), py::arg("method"), py::arg("block") = 0, py::arg("kind") = "General",
      py::arg("samples") = 100000, py::arg("seed") = 0);

  m.def(
      "update_operator",
      [](const LinearSystem& system, const std::string& method, Index block) {
        return exact_update_operator(spec_of(method, block), system);
      },
      py::arg("system"), py::arg("method"), py::arg("block") = 0,
      "Enumerated E[T1 T2^T A^T S1 S2^T] for finite-support samplers.");

  m.def(
      "rate_report",
      [](const LinearSystem& system, const std::string& method, Index block, const std::string& theorem,
         std::optional<double> alpha, double omega) {
        const SamplerSpec spec = spec_of(method, block);
        const Problem p = problem_of(system, std::nullopt);
        const double a = resolve_alpha(alpha, spec, p);
        return key_values(rate_report(parse_theorem_id(theorem), spec, p.info, system, a, omega).to_key_values());
      },
      py::arg("system"), py::arg("method"), py::arg("block") = 0, py::arg("theorem") = "General",
      py::arg("alpha") = py::none(), py::arg("omega") = 0.0);

  m.def("gen_gaussian", &gen_gaussian, py::arg("m"), py::arg("n"), py::arg("seed") = 0);
  m.def("gen_conditioned", &gen_conditioned, py::arg("m"), py::arg("n"), py::arg("kappa"), py::arg("seed") = 0);
  m.def(
      "gen_sparse",
      [](Index rows, Index cols, double density, double kappa, std::uint64_t seed) {
        return gen_sparse(rows, cols, density, kappa, seed);
      },
      py::arg("m"), py::arg("n"), py::arg("density"), py::arg("kappa"), py::arg("seed") = 0);
  m.def(
      "make_rhs",
      [](const DenseMatrix& a, const std::string& mode, std::uint64_t seed) {
        const RightHandSide r = make_rhs(a, {parse_rhs_mode(mode), seed}, seed);
        return py::make_tuple(r.b, r.x_star);
      },
      py::arg("a"), py::arg("mode") = "consistent", py::arg("seed") = 0, "Returns (b, x_star).");
  m.def(
      "incidence_system",
      [](const std::string& graph, Index nodes, std::uint64_t seed, double radius) {
        const Vector c = node_values(nodes, seed);
        IncidenceSystem g = incidence_system({parse_graph_kind(graph), nodes, radius}, c, seed);
        return py::make_tuple(g.system, c, g.c_bar, g.edges);
      },
      py::arg("graph"), py::arg("nodes"), py::arg("seed") = 0, py::arg("radius") = 0.0,
      "Returns (system, node values, their mean, edges).");
  m.def(
      "read_matrix_market", [](const std::string& path) { return matrix_to_python(read_matrix_market(path)); },
      py::arg("path"));
  m.def(
      "write_matrix_market",
      [](const std::string& path, const DenseMatrix& a) { write_matrix_market(path, CoefficientMatrix(a)); },
      py::arg("path"), py::arg("a"));
  m.def(
      "write_matrix_market",
      [](const std::string& path, const SparseMatrix& a) { write_matrix_market(path, CoefficientMatrix(a)); },
      py::arg("path"), py::arg("a"));
}
