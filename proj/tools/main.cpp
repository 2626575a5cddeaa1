#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dbsde/csv.hpp"
#include "dbsde/errors.hpp"
#include "dbsde/experiments.hpp"
#include "dbsde/pathtree.hpp"
#include "dbsde/trajectory.hpp"

namespace {

using namespace dbsde;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInvariant = 4;

struct Config {
  double T = 1.0;
  std::optional<int> n;
  double lambda = 5.0;
  std::optional<double> p;
  std::string example;  // "1" | "2" | "unconstrained"
  std::optional<double> a;
  std::string scheme = "explicit";
  std::uint64_t seed = 0;
  std::string out;
  bool compat_literal_penalty = false;
  int threads = 1;
  int count = 1;
  std::string n_list;
  std::string p_list;
};

void add_common_options(CLI::App* cmd, Config& cfg) {
  cmd->set_config("--config", "", "key = value config file; flags override it");
  cmd->add_option("--T", cfg.T, "horizon");
  cmd->add_option("--n", cfg.n, "number of time steps");
  cmd->add_option("--lambda", cfg.lambda, "Poisson intensity");
  cmd->add_option("--p", cfg.p, "penalization parameter");
  cmd->add_option("--example", cfg.example, "problem: 1 | 2 | unconstrained");
  cmd->add_option("--a", cfg.a, "example-2 threshold (required iff example=2)");
  cmd->add_option("--scheme", cfg.scheme, "explicit | implicit")
      ->check(CLI::IsMember({"explicit", "implicit"}));
  cmd->add_option("--seed", cfg.seed, "master seed for path sampling");
  cmd->add_option("--out", cfg.out, "output file");
  cmd->add_flag("--compat_literal_penalty", cfg.compat_literal_penalty,
                "use the uncorrected penalty closed form (diagnostic)");
  cmd->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--count", cfg.count, "number of sampled paths")->check(CLI::PositiveNumber);
  cmd->add_option("--n_list", cfg.n_list, "comma-separated n sweep values");
  cmd->add_option("--p_list", cfg.p_list, "comma-separated p sweep values");
}

int parse_example(const Config& cfg) {
  if (cfg.example == "1") return 1;
  if (cfg.example == "2") return 2;
  if (cfg.example == "unconstrained") return 0;
  if (cfg.example.empty()) throw config_error("missing required key: example");
  throw config_error("example must be 1, 2 or unconstrained, got '" + cfg.example + "'");
}

Scheme parse_scheme(const Config& cfg) {
  return cfg.scheme == "implicit" ? Scheme::Implicit : Scheme::Explicit;
}

void require_a_for_example2(const Config& cfg, int example) {
  if (example == 2 && !cfg.a.has_value())
    throw config_error("example=2 requires key a");
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
  std::vector<T> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) {
      try {
        if constexpr (std::is_integral_v<T>)
          values.push_back(static_cast<T>(std::stoll(tok)));
        else
          values.push_back(static_cast<T>(std::stod(tok)));
      } catch (const std::exception&) {
        throw config_error("cannot parse " + key + " entry '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return values;
}

SolveOptions solve_options(const Config& cfg, Storage storage) {
  SolveOptions opts;
  opts.storage = storage;
  opts.threads = cfg.threads;
  opts.literal_penalty = cfg.compat_literal_penalty;
  return opts;
}

ProblemSpec build_problem(const Config& cfg, int example, int n, double p) {
  SweepSpec spec;
  spec.example = example;
  spec.a = cfg.a.value_or(0.0);
  spec.T = cfg.T;
  spec.lambda = cfg.lambda;
  return make_problem(spec, n, p);
}

SweepSpec build_sweep(const Config& cfg, int example) {
  SweepSpec spec;
  spec.example = example;
  spec.a = cfg.a.value_or(0.0);
  spec.scheme = parse_scheme(cfg);
  spec.T = cfg.T;
  spec.lambda = cfg.lambda;
  spec.options = solve_options(cfg, Storage::RootOnly);
  if (!cfg.n_list.empty()) spec.n_list = parse_list<int>(cfg.n_list, "n_list");
  if (!cfg.p_list.empty()) spec.p_list = parse_list<double>(cfg.p_list, "p_list");
  return spec;
}

void print_warnings(const SchemeSolution& sol) {
  for (const std::string& w : sol.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_solve(const Config& cfg) {
  const int example = parse_example(cfg);
  require_a_for_example2(cfg, example);
  if (!cfg.n.has_value()) throw config_error("solve requires key n");
  if (!cfg.p.has_value()) throw config_error("solve requires key p");

  const bool dump = !cfg.out.empty();
  const ProblemSpec prob = build_problem(cfg, example, *cfg.n, *cfg.p);
  const SchemeSolution sol = solve_scheme(
      prob, parse_scheme(cfg), solve_options(cfg, dump ? Storage::Full : Storage::RootOnly));
  print_warnings(sol);

  char rounded[32];
  std::snprintf(rounded, sizeof(rounded), "%.4f", sol.y0);
  std::cout << "Y0 = " << rounded << " (" << format_double(sol.y0) << ")\n";
  std::cout << "scheme=" << cfg.scheme << " example=" << cfg.example << " n=" << *cfg.n
            << " p=" << format_double(*cfg.p) << " T=" << format_double(cfg.T)
            << " lambda=" << format_double(cfg.lambda) << "\n";
  std::cout << "max_violation lower=" << format_double(sol.diag.max_lower_violation)
            << " upper=" << format_double(sol.diag.max_upper_violation)
            << " energy=" << format_double(sol.diag.energy) << "\n";
  if (dump) {
    write_solution_csv(cfg.out, prob, sol);
    std::cout << "wrote " << cfg.out << "\n";
  }
  return kExitOk;
}

int cmd_table(const Config& cfg) {
  const int example = parse_example(cfg);
  require_a_for_example2(cfg, example);
  if (cfg.out.empty()) throw config_error("table requires key out");
  const TableResult table = run_table(build_sweep(cfg, example));
  write_table_csv(cfg.out, table);
  if (table.stability_violations > 0)
    std::cerr << "warning: step-size smallness condition violated in "
              << table.stability_violations << " cells\n";
  std::cout << "wrote " << cfg.out << "\n";
  return kExitOk;
}

std::filesystem::path indexed_path(const std::filesystem::path& base, int index, int count) {
  if (count == 1) return base;
  std::filesystem::path out = base.parent_path() / base.stem();
  out += "_" + std::to_string(index);
  out += base.extension();
  return out;
}

int cmd_paths(const Config& cfg) {
  const int example = parse_example(cfg);
  require_a_for_example2(cfg, example);
  if (!cfg.n.has_value()) throw config_error("paths requires key n");
  if (!cfg.p.has_value()) throw config_error("paths requires key p");
  if (cfg.out.empty()) throw config_error("paths requires key out");

  const ProblemSpec prob = build_problem(cfg, example, *cfg.n, *cfg.p);
  const SchemeSolution sol =
      solve_scheme(prob, parse_scheme(cfg), solve_options(cfg, Storage::Full));
  print_warnings(sol);

  for (int i = 0; i < cfg.count; ++i) {
    const std::uint64_t stream = derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(i));
    const TrajectorySample sample = sample_path(prob, sol, stream);
    const std::vector<std::string> metadata{
        "dbsde path example=" + cfg.example + " scheme=" + cfg.scheme +
            " n=" + std::to_string(*cfg.n) + " T=" + format_double(cfg.T) +
            " lambda=" + format_double(cfg.lambda) + " p=" + format_double(*cfg.p),
        "master_seed=" + std::to_string(cfg.seed) + " sample_index=" + std::to_string(i)};
    const std::filesystem::path dest = indexed_path(cfg.out, i, cfg.count);
    write_trajectory_csv(dest, sample, metadata);
    std::cout << "path " << i << ": wrote " << dest.string()
              << " max_violation=" << format_double(sample.max_violation) << "\n";
  }
  return kExitOk;
}

int cmd_compare(const Config& cfg) {
  const int example = parse_example(cfg);
  require_a_for_example2(cfg, example);
  if (cfg.out.empty()) throw config_error("compare requires key out");
  SweepSpec spec = build_sweep(cfg, example);
  if (cfg.p.has_value()) spec.p_list = {*cfg.p};
  if (cfg.n_list.empty()) spec.n_list = {50, 100, 200};
  const ComparisonResult result = run_comparison(spec);
  write_comparison_csv(cfg.out, result);
  std::cout << "fitted_order = " << format_double(result.fitted_order) << "\n";
  std::cout << "wrote " << cfg.out << "\n";
  return kExitOk;
}

bool report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n";
  return pass;
}

int cmd_check(const Config& cfg) {
  const int example = parse_example(cfg);
  require_a_for_example2(cfg, example);
  const double p = cfg.p.value_or(100.0);
  bool all = true;

  // Oracle equivalence on a small grid: the lattice is an exact
  // recombination of the path tree, so root values must agree to 1e-12.
  const int n_small = 6;
  for (Scheme scheme : {Scheme::Explicit, Scheme::Implicit}) {
    const ProblemSpec prob = build_problem(cfg, example, n_small, p);
    const SchemeSolution lattice = solve_scheme(prob, scheme, solve_options(cfg, Storage::RootOnly));
    const OracleSolution oracle = oracle_solve(prob.grid, to_path_problem(prob), scheme);
    const double diff = std::abs(lattice.y0 - oracle.root);
    all &= report(std::string("oracle_equivalence_") +
                      (scheme == Scheme::Explicit ? "explicit" : "implicit"),
                  diff <= 1e-12, "n=6 |lattice-oracle|=" + format_double(diff));
  }

  // p = 0 with a trivial driver: Theta is the identity, the two schemes must
  // produce the same root bit-for-bit.
  {
    SweepSpec zero;
    zero.example = 0;
    zero.T = cfg.T;
    zero.lambda = cfg.lambda;
    const ProblemSpec prob = make_problem(zero, 32, 0.0);
    const SchemeSolution e = solve_explicit(prob);
    const SchemeSolution i = solve_implicit(prob);
    all &= report("p0_trivial_driver_schemes_identical", e.y0 == i.y0,
                  "explicit=" + format_double(e.y0) + " implicit=" + format_double(i.y0));
  }

  // Step-size smallness condition at the configured size (warning only).
  if (cfg.n.has_value()) {
    const GridSpec grid = make_grid(*cfg.n, cfg.T, cfg.lambda);
    const double lhs = stability_lhs(grid, p, 6.0);
    report("stability_condition", true,
           lhs < 1.0 ? "satisfied, lhs=" + format_double(lhs)
                     : "violated (warn only), lhs=" + format_double(lhs));
  }

  SweepSpec audit_spec = build_sweep(cfg, example);
  if (cfg.n_list.empty()) audit_spec.n_list = {cfg.n.value_or(100)};
  const AuditReport audit = run_audit(audit_spec);
  for (const AuditEntry& e : audit.entries) {
    std::string detail = "value=" + format_double(e.value);
    if (!std::isnan(e.p)) detail += " p=" + format_double(e.p);
    all &= report("audit_" + e.name, e.pass, detail);
  }
  if (!cfg.out.empty()) {
    write_audit_csv(cfg.out, audit);
    std::cout << "wrote " << cfg.out << "\n";
  }
  return all ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"penalized random-walk solver for doubly reflected BSDEs with jumps"};
  app.require_subcommand(1);

  Config cfg;
  CLI::App* solve = app.add_subcommand("solve", "run one backward solve and print Y0");
  CLI::App* table = app.add_subcommand("table", "sweep (n, p) and write the Y0 grid as CSV");
  CLI::App* paths = app.add_subcommand("paths", "sample trajectories and write CSVs");
  CLI::App* compare =
      app.add_subcommand("compare", "explicit vs implicit gap report across n");
  CLI::App* check = app.add_subcommand("check", "oracle equivalence and invariant audit");
  for (CLI::App* cmd : {solve, table, paths, compare, check}) add_common_options(cmd, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(cfg);
    if (table->parsed()) return cmd_table(cfg);
    if (paths->parsed()) return cmd_paths(cfg);
    if (compare->parsed()) return cmd_compare(cfg);
    if (check->parsed()) return cmd_check(cfg);
    return kExitConfig;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const model_error& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
