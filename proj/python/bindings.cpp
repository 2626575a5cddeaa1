#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dbsde/experiments.hpp"
#include "dbsde/pathtree.hpp"
#include "dbsde/trajectory.hpp"

namespace py = pybind11;
using namespace dbsde;

namespace {

Scheme scheme_from_string(const std::string& name) {
  if (name == "explicit") return Scheme::Explicit;
  if (name == "implicit") return Scheme::Implicit;
  throw config_error("scheme must be 'explicit' or 'implicit', got '" + name + "'");
}

SweepSpec sweep_from_args(int example, double a, double T, double lam, const std::string& scheme,
                          int threads, bool literal) {
  SweepSpec spec;
  spec.example = example;
  spec.a = a;
  spec.T = T;
  spec.lambda = lam;
  spec.scheme = scheme_from_string(scheme);
  spec.options.threads = threads;
  spec.options.literal_penalty = literal;
  return spec;
}

// the problem travels with the solution so paths can be sampled later
struct PySolution {
  ProblemSpec problem;
  SchemeSolution solution;
};

PySolution py_solve(int example, int n, double p, double T, double lam, double a,
                    const std::string& scheme, bool full_storage, bool literal_penalty,
                    int threads) {
  const SweepSpec spec = sweep_from_args(example, a, T, lam, scheme, threads, literal_penalty);
  SolveOptions opts = spec.options;
  opts.storage = full_storage ? Storage::Full : Storage::RootOnly;
  PySolution out{make_problem(spec, n, p), {}};
  out.solution = solve_scheme(out.problem, spec.scheme, opts);
  return out;
}

double py_oracle_root(int example, int n, double p, double T, double lam, double a,
                      const std::string& scheme) {
  const SweepSpec spec = sweep_from_args(example, a, T, lam, scheme, 1, false);
  const ProblemSpec prob = make_problem(spec, n, p);
  return oracle_solve(prob.grid, to_path_problem(prob), spec.scheme).root;
}

py::dict py_sample_path(const PySolution& solved, std::uint64_t seed) {
  const TrajectorySample sample = sample_path(solved.problem, solved.solution, seed);
  std::vector<double> t, e, eta, w, ntilde, y, xi, zeta, a, k, A, K, alpha;
  for (const TrajectoryStep& s : sample.steps) {
    t.push_back(s.t);
    e.push_back(s.e);
    eta.push_back(s.eta);
    w.push_back(s.w);
    ntilde.push_back(s.ntilde);
    y.push_back(s.y);
    xi.push_back(s.xi);
    zeta.push_back(s.zeta);
    a.push_back(s.a);
    k.push_back(s.k);
    A.push_back(s.A);
    K.push_back(s.K);
    alpha.push_back(s.alpha);
  }
  py::dict out;
  out["t"] = t;
  out["e"] = e;
  out["eta"] = eta;
  out["w"] = w;
  out["ntilde"] = ntilde;
  out["y"] = y;
  out["xi"] = xi;
  out["zeta"] = zeta;
  out["a"] = a;
  out["k"] = k;
  out["A"] = A;
  out["K"] = K;
  out["alpha"] = alpha;
  out["seed"] = sample.seed;
  out["max_violation"] = sample.max_violation;
  return out;
}

}  // namespace

PYBIND11_MODULE(_dbsde, m) {
  m.doc() = "penalized random-walk solver for doubly reflected BSDEs with jumps";

  py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<numerical_error>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<model_error>(m, "ModelError", PyExc_RuntimeError);

  py::class_<GridSpec>(m, "GridSpec")
      .def_readonly("n", &GridSpec::n)
      .def_readonly("T", &GridSpec::T)
      .def_readonly("lam", &GridSpec::lambda)
      .def_readonly("delta", &GridSpec::delta)
      .def_readonly("kappa", &GridSpec::kappa)
      .def("__repr__", [](const GridSpec& g) {
        return "GridSpec(n=" + std::to_string(g.n) + ", T=" + std::to_string(g.T) +
               ", lam=" + std::to_string(g.lambda) + ")";
      });

  m.def("make_grid", &make_grid, py::arg("n"), py::arg("T") = 1.0, py::arg("lam") = 5.0);

  m.def(
      "increment_moments",
      [](const GridSpec& g) {
        const MomentReport r = increment_moments(g);
        py::dict out;
        out["e"] = r.e;
        out["eta"] = r.eta;
        out["mu"] = r.mu;
        out["e_sq"] = r.e_sq;
        out["eta_sq"] = r.eta_sq;
        out["mu_sq"] = r.mu_sq;
        out["e_eta"] = r.e_eta;
        out["e_mu"] = r.e_mu;
        out["eta_mu"] = r.eta_mu;
        return out;
      },
      py::arg("grid"));

  py::class_<PySolution>(m, "Solution")
      .def_property_readonly("y0", [](const PySolution& s) { return s.solution.y0; })
      .def_property_readonly("energy", [](const PySolution& s) { return s.solution.diag.energy; })
      .def_property_readonly(
          "max_lower_violation",
          [](const PySolution& s) { return s.solution.diag.max_lower_violation; })
      .def_property_readonly(
          "max_upper_violation",
          [](const PySolution& s) { return s.solution.diag.max_upper_violation; })
      .def_property_readonly(
          "max_fixed_point_resid",
          [](const PySolution& s) { return s.solution.diag.max_fixed_point_resid; })
      .def_property_readonly("stability_ok",
                             [](const PySolution& s) { return s.solution.diag.stability_ok; })
      .def_property_readonly("warnings",
                             [](const PySolution& s) { return s.solution.warnings; })
      .def(
          "y", [](const PySolution& s, int j) { return s.solution.layer(j).y; }, py::arg("j"),
          "per-node y values of layer j (full-storage solves only)")
      .def(
          "a", [](const PySolution& s, int j) { return s.solution.layer(j).a; }, py::arg("j"))
      .def(
          "k", [](const PySolution& s, int j) { return s.solution.layer(j).k; }, py::arg("j"))
      .def("__repr__", [](const PySolution& s) {
        return "Solution(y0=" + std::to_string(s.solution.y0) + ")";
      });

  m.def("solve", &py_solve, py::arg("example"), py::arg("n"), py::arg("p"), py::arg("T") = 1.0,
        py::arg("lam") = 5.0, py::arg("a") = 0.0, py::arg("scheme") = "explicit",
        py::arg("full_storage") = false, py::arg("literal_penalty") = false,
        py::arg("threads") = 1,
        "backward solve of the penalized scheme; example 1, 2 or 0 (unconstrained fixture)");

  m.def("oracle_root", &py_oracle_root, py::arg("example"), py::arg("n"), py::arg("p"),
        py::arg("T") = 1.0, py::arg("lam") = 5.0, py::arg("a") = 0.0,
        py::arg("scheme") = "explicit",
        "root value from the exact 4^n path-tree recursion (n <= 12)");

  m.def("sample_path", &py_sample_path, py::arg("solution"), py::arg("seed") = 0,
        "sample one trajectory along the solved lattice; needs full_storage=True");

  m.def("derive_stream_seed", &derive_stream_seed, py::arg("master_seed"), py::arg("index"));

  m.def(
      "run_table",
      [](int example, std::vector<int> n_list, std::vector<double> p_list, double T, double lam,
         double a, const std::string& scheme, int threads) {
        SweepSpec spec = sweep_from_args(example, a, T, lam, scheme, threads, false);
        spec.n_list = std::move(n_list);
        spec.p_list = std::move(p_list);
        return run_table(spec).y0;
      },
      py::arg("example"), py::arg("n_list"), py::arg("p_list"), py::arg("T") = 1.0,
      py::arg("lam") = 5.0, py::arg("a") = 0.0, py::arg("scheme") = "explicit",
      py::arg("threads") = 1, "Y0 grid indexed [p][n]");

  m.def(
      "run_comparison",
      [](int example, std::vector<int> n_list, double p, double T, double lam, double a) {
        SweepSpec spec = sweep_from_args(example, a, T, lam, "explicit", 1, false);
        spec.n_list = std::move(n_list);
        spec.p_list = {p};
        const ComparisonResult result = run_comparison(spec);
        py::dict out;
        std::vector<int> ns;
        std::vector<double> gaps;
        for (const auto& row : result.rows) {
          ns.push_back(row.n);
          gaps.push_back(row.root_gap);
        }
        out["n"] = ns;
        out["root_gap"] = gaps;
        out["fitted_order"] = result.fitted_order;
        return out;
      },
      py::arg("example"), py::arg("n_list"), py::arg("p"), py::arg("T") = 1.0,
      py::arg("lam") = 5.0, py::arg("a") = 0.0,
      "explicit vs implicit root gaps and the fitted log-log order");
}
