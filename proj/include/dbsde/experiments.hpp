#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dbsde/model.hpp"
#include "dbsde/scheme.hpp"

namespace dbsde {

// (n, p) sweep description. Defaults match the reference study layout:
// n in {100,200,400,500,600}, p in {20,...,20000}, T = 1, lambda = 5.
struct SweepSpec {
  int example = 1;  // 1 | 2 | 0 (0 = unconstrained zero fixture)
  double a = 0.0;   // example-2 threshold
  std::vector<int> n_list{100, 200, 400, 500, 600};
  std::vector<double> p_list{20, 50, 100, 500, 1000, 5000, 20000};
  Scheme scheme = Scheme::Explicit;
  double T = 1.0;
  double lambda = 5.0;
  SolveOptions options{};
};

ProblemSpec make_problem(const SweepSpec& spec, int n, double p);

struct TableResult {
  SweepSpec spec;
  // y0[pi][ni], rows follow p_list, columns follow n_list
  std::vector<std::vector<double>> y0;
  int stability_violations = 0;  // cells where the smallness condition failed
};

// One solve per (n, p) cell; cells run in parallel when options.threads > 1,
// each cell solved single-threaded into its own slot.
TableResult run_table(const SweepSpec& spec);

struct ComparisonRow {
  int n = 0;
  double delta = 0;
  double root_explicit = 0, root_implicit = 0, root_gap = 0;
  double max_layer_ms_gap = 0;  // max_j E[(y_exp - y_imp)^2] under lattice probabilities
  double sum_ms_gap_dt = 0;     // delta * sum_j E[(y_exp - y_imp)^2]
};

struct ComparisonResult {
  SweepSpec spec;
  std::vector<ComparisonRow> rows;
  // least-squares slope of log(root_gap) against log(delta) over rows with a
  // positive gap; NaN when fewer than two such rows
  double fitted_order = 0;
};

// Lockstep explicit/implicit sweeps at p = p_list.front() for every n.
ComparisonResult run_comparison(const SweepSpec& spec);

struct AuditEntry {
  std::string name;
  double p = 0;  // NaN when not tied to one p
  bool pass = true;
  double value = 0;
  double threshold = 0;  // NaN for informational rows
  Node worst{};
};

struct AuditReport {
  SweepSpec spec;
  std::vector<AuditEntry> entries;
  bool all_pass = true;
};

// Complementarity, fixed-point identities, energy stability under n-doubling,
// and the barrier-violation-vs-p curve, at n = n_list.front() over p_list.
AuditReport run_audit(const SweepSpec& spec);

void write_table_csv(const std::filesystem::path& path, const TableResult& table);
void write_comparison_csv(const std::filesystem::path& path, const ComparisonResult& result);
void write_audit_csv(const std::filesystem::path& path, const AuditReport& report);

// Per-node dump of a full-storage solution:
// j,up,jumps,t,w,ntilde,y,z,u,v,a,k.
void write_solution_csv(const std::filesystem::path& path, const ProblemSpec& prob,
                        const SchemeSolution& solution);

}  // namespace dbsde
