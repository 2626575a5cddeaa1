#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dbsde/experiments.hpp"
#include "doctest.h"

using namespace dbsde;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') ++rows;
  return rows;  // includes the header
}

}  // namespace

TEST_CASE("single-cell table equals a direct solve") {
  SweepSpec spec;
  spec.example = 1;
  spec.n_list = {60};
  spec.p_list = {100.0};
  const TableResult table = run_table(spec);
  REQUIRE(table.y0.size() == 1);
  REQUIRE(table.y0[0].size() == 1);
  const SchemeSolution direct = solve_explicit(make_problem(spec, 60, 100.0));
  CHECK(table.y0[0][0] == direct.y0);
}

TEST_CASE("table runs are deterministic and thread-independent") {
  SweepSpec spec;
  spec.example = 2;
  spec.a = 1.0;
  spec.n_list = {24, 40};
  spec.p_list = {20.0, 500.0};
  const TableResult serial = run_table(spec);
  spec.options.threads = 4;
  const TableResult parallel = run_table(spec);
  for (std::size_t pi = 0; pi < serial.y0.size(); ++pi)
    for (std::size_t ni = 0; ni < serial.y0[pi].size(); ++ni)
      CHECK(serial.y0[pi][ni] == parallel.y0[pi][ni]);
}

TEST_CASE("table CSV layout and determinism") {
  SweepSpec spec;
  spec.example = 1;
  spec.n_list = {16, 24};
  spec.p_list = {20.0, 100.0};
  const TableResult table = run_table(spec);
  const auto dir = std::filesystem::temp_directory_path();
  const auto file_a = dir / "dbsde_table_a.csv";
  const auto file_b = dir / "dbsde_table_b.csv";
  write_table_csv(file_a, table);
  write_table_csv(file_b, table);
  const std::string text = read_file(file_a);
  CHECK(text == read_file(file_b));

  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line) && line.rfind('#', 0) == 0) {
  }
  CHECK(line == "p,n=16,n=24");
  CHECK(data_rows(text) == 3);  // header + two p rows
  std::filesystem::remove(file_a);
  std::filesystem::remove(file_b);
}

TEST_CASE("empty sweep produces a header-only table") {
  SweepSpec spec;
  spec.example = 1;
  spec.n_list = {};
  spec.p_list = {};
  const TableResult table = run_table(spec);
  const auto file = std::filesystem::temp_directory_path() / "dbsde_table_empty.csv";
  write_table_csv(file, table);
  CHECK(data_rows(read_file(file)) == 1);
  std::filesystem::remove(file);
}

TEST_CASE("comparison: zero driver at p = 0 gives exactly zero gaps") {
  SweepSpec spec;
  spec.example = 0;
  spec.n_list = {8, 16};
  spec.p_list = {0.0};
  const ComparisonResult result = run_comparison(spec);
  for (const ComparisonRow& row : result.rows) {
    CHECK(row.root_gap == 0.0);
    CHECK(row.max_layer_ms_gap == 0.0);
  }
  CHECK(std::isnan(result.fitted_order));
}

TEST_CASE("comparison: explicit-implicit gap has order about one") {
  SweepSpec spec;
  spec.example = 1;
  spec.n_list = {50, 100, 200};
  spec.p_list = {100.0};
  const ComparisonResult result = run_comparison(spec);
  REQUIRE(result.rows.size() == 3);
  CHECK(result.rows[0].root_gap > result.rows[1].root_gap);
  CHECK(result.rows[1].root_gap > result.rows[2].root_gap);
  CHECK(result.rows[1].root_gap / result.rows[0].root_gap <= 0.7);
  CHECK(result.rows[2].root_gap / result.rows[1].root_gap <= 0.7);
  CHECK(result.fitted_order >= 0.8);

  const auto file = std::filesystem::temp_directory_path() / "dbsde_cmp.csv";
  write_comparison_csv(file, result);
  CHECK(data_rows(read_file(file)) == 4);
  std::filesystem::remove(file);
}

TEST_CASE("audit on the first example passes its invariants") {
  SweepSpec spec;
  spec.example = 1;
  spec.n_list = {100};
  spec.p_list = {20.0, 100.0, 20000.0};
  const AuditReport report = run_audit(spec);
  CHECK(report.all_pass);
  bool saw_fixed_point = false, saw_monotone = false, saw_energy = false;
  for (const AuditEntry& e : report.entries) {
    if (e.name == "fixed_point_identity") {
      saw_fixed_point = true;
      CHECK(e.value <= 1e-12);
    }
    if (e.name == "barrier_violation_nonincreasing_in_p") saw_monotone = true;
    if (e.name == "energy_change_on_n_doubling") {
      saw_energy = true;
      CHECK(e.value < 0.5);
    }
  }
  CHECK(saw_fixed_point);
  CHECK(saw_monotone);
  CHECK(saw_energy);
}

TEST_CASE("audit on the unconstrained fixture reports inactive penalties") {
  SweepSpec spec;
  spec.example = 0;
  spec.n_list = {32};
  spec.p_list = {50.0};
  const AuditReport report = run_audit(spec);
  CHECK(report.all_pass);
  bool saw = false;
  for (const AuditEntry& e : report.entries) {
    if (e.name == "penalty_inactive") {
      saw = true;
      CHECK(e.pass);
      CHECK(e.value == 0.0);
    }
  }
  CHECK(saw);

  const auto file = std::filesystem::temp_directory_path() / "dbsde_audit.csv";
  write_audit_csv(file, report);
  CHECK(data_rows(read_file(file)) == report.entries.size() + 1);
  std::filesystem::remove(file);
}

TEST_CASE("solution CSV dump") {
  SweepSpec spec;
  spec.example = 1;
  const ProblemSpec prob = make_problem(spec, 6, 100.0);
  SolveOptions opts;
  opts.storage = Storage::Full;
  const SchemeSolution sol = solve_explicit(prob, opts);
  const auto file = std::filesystem::temp_directory_path() / "dbsde_solution.csv";
  write_solution_csv(file, prob, sol);
  CHECK(data_rows(read_file(file)) == total_node_count(6) + 1);
  std::filesystem::remove(file);
}
