#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dbsde/model.hpp"
#include "dbsde/scheme.hpp"

namespace dbsde {

// One increment of the joint walk along a stored path.
struct PathStep {
  std::int8_t e = 1;  // +1 or -1
  bool jump = false;
};

// Functional of a path prefix; steps.size() is the depth.
using PathFunctional = std::function<double(const GridSpec&, std::span<const PathStep>)>;

// Path-indexed problem for the non-recombining tree. Accepts genuinely
// path-dependent barrier pairs, which the lattice backend cannot represent.
struct PathProblem {
  Driver driver;
  PathFunctional lower;
  PathFunctional upper;
  double p = 0.0;
};

// Adapts a Markovian problem: evaluates the (t, W, Ntilde) barriers at the
// prefix sums of the path.
PathProblem to_path_problem(const ProblemSpec& prob);

// Full tree values, flat arrays indexed by base-4 path codes (depth j has
// 4^j entries; digit order matches the canonical branch order, first step in
// the most significant digit).
struct OracleSolution {
  double root = 0.0;
  std::vector<std::vector<double>> y;  // y[j][code]
};

// Identical recursion to the lattice solvers, conditional expectations summed
// explicitly over the 4 children of every path node. Hard memory guard at
// n <= 12.
OracleSolution oracle_solve(const GridSpec& grid, const PathProblem& prob, Scheme scheme,
                            const SolveOptions& opts = {});

// Decodes a path code of the given depth into steps.
std::vector<PathStep> decode_path(std::uint64_t code, int depth);

double path_probability(const GridSpec& grid, std::span<const PathStep> steps);
double path_w_value(const GridSpec& grid, std::span<const PathStep> steps);
double path_ntilde_value(const GridSpec& grid, std::span<const PathStep> steps);

// Max absolute discrepancy, over all depth-j path nodes, between the
// four-branch kernel and a direct enumeration of the children of the given
// depth-(j+1) functional.
double oracle_cond_exp_check(const GridSpec& grid, int depth, const PathFunctional& functional);

}  // namespace dbsde
