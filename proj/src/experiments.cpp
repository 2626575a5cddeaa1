#include "dbsde/experiments.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "dbsde/csv.hpp"
#include "dbsde/errors.hpp"

namespace dbsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string scheme_name(Scheme s) { return s == Scheme::Explicit ? "explicit" : "implicit"; }

std::string spec_comment(const SweepSpec& spec) {
  std::string out = "example=" + std::to_string(spec.example);
  if (spec.example == 2) out += " a=" + format_double(spec.a);
  out += " scheme=" + scheme_name(spec.scheme) + " T=" + format_double(spec.T) +
         " lambda=" + format_double(spec.lambda);
  if (spec.options.literal_penalty) out += " compat_literal_penalty=true";
  return out;
}

// Least-squares slope of log(gap) vs log(delta).
double fit_order(const std::vector<ComparisonRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const auto& r : rows) {
    if (!(r.root_gap > 0.0)) continue;
    const double x = std::log(r.delta);
    const double y = std::log(r.root_gap);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return kNaN;
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) return kNaN;
  return (count * sxy - sx * sy) / denom;
}

}  // namespace

ProblemSpec make_problem(const SweepSpec& spec, int n, double p) {
  const GridSpec grid = make_grid(n, spec.T, spec.lambda);
  switch (spec.example) {
    case 1:
      return example1(grid, p);
    case 2:
      return example2(grid, spec.a, p);
    case 0:
      return unconstrained(
          grid, [](double, double, double) { return 0.0; },
          Driver{[](double, double, double, double) { return 0.0; }, 0.0}, 1e6, p);
    default:
      throw config_error("make_problem: example must be 0, 1 or 2, got " +
                         std::to_string(spec.example));
  }
}

TableResult run_table(const SweepSpec& spec) {
  TableResult table;
  table.spec = spec;
  const std::size_t np = spec.p_list.size();
  const std::size_t nn = spec.n_list.size();
  table.y0.assign(np, std::vector<double>(nn, 0.0));
  if (np == 0 || nn == 0) return table;

  std::vector<int> stability(np * nn, 0);
  std::atomic<std::size_t> cursor{0};
  std::vector<std::exception_ptr> errors(std::max(1, spec.options.threads));

  auto worker = [&](std::size_t worker_id) {
    try {
      SolveOptions cell_opts = spec.options;
      cell_opts.storage = Storage::RootOnly;
      cell_opts.threads = 1;
      for (;;) {
        const std::size_t cell = cursor.fetch_add(1);
        if (cell >= np * nn) break;
        const std::size_t pi = cell / nn;
        const std::size_t ni = cell % nn;
        const ProblemSpec prob = make_problem(spec, spec.n_list[ni], spec.p_list[pi]);
        const SchemeSolution sol = solve_scheme(prob, spec.scheme, cell_opts);
        table.y0[pi][ni] = sol.y0;
        stability[cell] = sol.diag.stability_ok ? 0 : 1;
      }
    } catch (...) {
      errors[worker_id] = std::current_exception();
    }
  };

  const int threads = std::max(1, spec.options.threads);
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  for (int s : stability) table.stability_violations += s;
  return table;
}

ComparisonResult run_comparison(const SweepSpec& spec) {
  if (spec.p_list.empty()) throw config_error("run_comparison: p_list is empty");
  ComparisonResult result;
  result.spec = spec;
  const double p = spec.p_list.front();

  for (int n : spec.n_list) {
    const ProblemSpec prob = make_problem(spec, n, p);
    BackwardSweep exp_sweep(prob, Scheme::Explicit, spec.options);
    BackwardSweep imp_sweep(prob, Scheme::Implicit, spec.options);

    ComparisonRow row;
    row.n = n;
    row.delta = prob.grid.delta;
    const ForwardWeights& weights = exp_sweep.weights();
    while (!exp_sweep.done()) {
      exp_sweep.step();
      imp_sweep.step();
      const int j = exp_sweep.j();
      const auto ye = exp_sweep.y();
      const auto yi = imp_sweep.y();
      const auto uw = weights.up_weights(j);
      const auto jw = weights.jump_weights(j);
      double ms = 0.0;
      for (int up = 0; up <= j; ++up) {
        const std::size_t base = static_cast<std::size_t>(up) * (j + 1);
        for (int jumps = 0; jumps <= j; ++jumps) {
          const double d = ye[base + jumps] - yi[base + jumps];
          ms += uw[up] * jw[jumps] * d * d;
        }
      }
      row.max_layer_ms_gap = std::max(row.max_layer_ms_gap, ms);
      row.sum_ms_gap_dt += prob.grid.delta * ms;
    }
    row.root_explicit = exp_sweep.y()[0];
    row.root_implicit = imp_sweep.y()[0];
    row.root_gap = std::abs(row.root_explicit - row.root_implicit);
    result.rows.push_back(row);
  }
  result.fitted_order = fit_order(result.rows);
  return result;
}

AuditReport run_audit(const SweepSpec& spec) {
  if (spec.n_list.empty()) throw config_error("run_audit: n_list is empty");
  AuditReport report;
  report.spec = spec;
  const int n0 = spec.n_list.front();

  SolveOptions opts = spec.options;
  opts.storage = Storage::RootOnly;

  std::vector<double> violations;
  for (double p : spec.p_list) {
    const ProblemSpec prob = make_problem(spec, n0, p);
    const SchemeSolution sol = solve_scheme(prob, spec.scheme, opts);

    report.entries.push_back({"fixed_point_identity", p,
                              sol.diag.max_fixed_point_resid <= 1e-12,
                              sol.diag.max_fixed_point_resid, 1e-12,
                              sol.diag.worst_fixed_point});
    report.entries.push_back({"complementarity", p, sol.diag.max_complementarity == 0.0,
                              sol.diag.max_complementarity, 0.0, Node{}});
    const double viol = std::max(sol.diag.max_lower_violation, sol.diag.max_upper_violation);
    const Node worst = sol.diag.max_lower_violation >= sol.diag.max_upper_violation
                           ? sol.diag.worst_lower
                           : sol.diag.worst_upper;
    report.entries.push_back({"barrier_violation", p, true, viol, kNaN, worst});
    violations.push_back(viol);

    const ProblemSpec prob2 = make_problem(spec, 2 * n0, p);
    const SchemeSolution sol2 = solve_scheme(prob2, spec.scheme, opts);
    const double ratio = sol.diag.energy > 0.0
                             ? std::abs(sol2.diag.energy - sol.diag.energy) / sol.diag.energy
                             : 0.0;
    report.entries.push_back(
        {"energy_change_on_n_doubling", p, ratio < 0.5, ratio, 0.5, Node{}});

    if (spec.example == 0) {
      const double active = std::max(sol.diag.max_a, sol.diag.max_k);
      report.entries.push_back({"penalty_inactive", p, active == 0.0, active, 0.0, Node{}});
    }
  }

  double worst_increase = 0.0;
  for (std::size_t i = 1; i < violations.size(); ++i)
    worst_increase = std::max(worst_increase, violations[i] - violations[i - 1]);
  report.entries.push_back({"barrier_violation_nonincreasing_in_p", kNaN,
                            worst_increase <= 0.0, worst_increase, 0.0, Node{}});

  for (const auto& e : report.entries) report.all_pass = report.all_pass && e.pass;
  return report;
}

void write_table_csv(const std::filesystem::path& path, const TableResult& table) {
  CsvFile csv(path);
  csv.comment("dbsde table " + spec_comment(table.spec));
  if (table.stability_violations > 0)
    csv.comment("stability_condition_violated_cells=" +
                std::to_string(table.stability_violations));
  std::vector<std::string> header{"p"};
  for (int n : table.spec.n_list) header.push_back("n=" + std::to_string(n));
  csv.row(header);
  for (std::size_t pi = 0; pi < table.spec.p_list.size(); ++pi) {
    std::vector<std::string> cells{format_double(table.spec.p_list[pi])};
    for (double v : table.y0[pi]) cells.push_back(format_double(v));
    csv.row(cells);
  }
  csv.commit();
}

void write_comparison_csv(const std::filesystem::path& path, const ComparisonResult& result) {
  CsvFile csv(path);
  csv.comment("dbsde compare " + spec_comment(result.spec) +
              " p=" + format_double(result.spec.p_list.empty() ? 0.0 : result.spec.p_list.front()));
  csv.comment("fitted_order=" + format_double(result.fitted_order));
  csv.row({std::string("n"), "delta", "root_explicit", "root_implicit", "root_gap",
           "max_layer_ms_gap", "sum_ms_gap_dt"});
  for (const auto& r : result.rows) {
    csv.row({std::to_string(r.n), format_double(r.delta), format_double(r.root_explicit),
             format_double(r.root_implicit), format_double(r.root_gap),
             format_double(r.max_layer_ms_gap), format_double(r.sum_ms_gap_dt)});
  }
  csv.commit();
}

void write_audit_csv(const std::filesystem::path& path, const AuditReport& report) {
  CsvFile csv(path);
  csv.comment("dbsde audit " + spec_comment(report.spec) +
              " n=" + std::to_string(report.spec.n_list.empty() ? 0 : report.spec.n_list.front()));
  csv.comment(std::string("all_pass=") + (report.all_pass ? "true" : "false"));
  csv.row({std::string("invariant"), "p", "pass", "value", "threshold", "worst_j", "worst_up",
           "worst_jumps"});
  for (const auto& e : report.entries) {
    csv.row({e.name, format_double(e.p), e.pass ? "true" : "false", format_double(e.value),
             format_double(e.threshold), std::to_string(e.worst.j), std::to_string(e.worst.up),
             std::to_string(e.worst.jumps)});
  }
  csv.commit();
}

void write_solution_csv(const std::filesystem::path& path, const ProblemSpec& prob,
                        const SchemeSolution& solution) {
  if (!solution.has_layers)
    throw config_error("write_solution_csv: solution was solved without full storage");
  CsvFile csv(path);
  csv.comment("dbsde solution scheme=" + scheme_name(solution.scheme) +
              " n=" + std::to_string(solution.grid.n) + " T=" + format_double(solution.grid.T) +
              " lambda=" + format_double(solution.grid.lambda) + " p=" + format_double(solution.p));
  csv.row({std::string("j"), "up", "jumps", "t", "w", "ntilde", "y", "z", "u", "v", "a", "k"});
  const GridSpec& g = solution.grid;
  for (int j = 0; j <= g.n; ++j) {
    const LayerFields& f = solution.layer(j);
    const bool terminal = j == g.n;
    for (int up = 0; up <= j; ++up) {
      for (int jumps = 0; jumps <= j; ++jumps) {
        const Node node{j, up, jumps};
        const std::size_t idx = node_index(j, up, jumps);
        csv.row({std::to_string(j), std::to_string(up), std::to_string(jumps),
                 format_double(t_value(g, j)), format_double(w_value(g, node)),
                 format_double(ntilde_value(g, node)), format_double(f.y[idx]),
                 format_double(terminal ? 0.0 : f.z[idx]),
                 format_double(terminal ? 0.0 : f.u[idx]),
                 format_double(terminal ? 0.0 : f.v[idx]),
                 format_double(terminal ? 0.0 : f.a[idx]),
                 format_double(terminal ? 0.0 : f.k[idx])});
      }
    }
  }
  csv.commit();
  (void)prob;
}

}  // namespace dbsde
