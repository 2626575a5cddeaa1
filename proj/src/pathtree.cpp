#include "dbsde/pathtree.hpp"

#include <cmath>
#include <string>

#include "dbsde/errors.hpp"

namespace dbsde {

namespace {

constexpr int kMaxOracleDepth = 12;

// Branch digit d in 0..3, canonical order: (+1,nj), (-1,nj), (+1,j), (-1,j).
inline PathStep step_of_digit(unsigned d) {
  return PathStep{static_cast<std::int8_t>((d & 1u) ? -1 : +1), (d & 2u) != 0};
}

inline double digit_probability(const GridSpec& g, unsigned d) {
  return (d & 2u) ? 0.5 * (1.0 - g.kappa) : 0.5 * g.kappa;
}

void check_depth(int n) {
  if (n > kMaxOracleDepth)
    throw config_error("oracle: n = " + std::to_string(n) + " exceeds the 4^n memory guard (n <= " +
                       std::to_string(kMaxOracleDepth) + ")");
}

}  // namespace

std::vector<PathStep> decode_path(std::uint64_t code, int depth) {
  std::vector<PathStep> steps(depth);
  for (int i = depth - 1; i >= 0; --i) {
    steps[i] = step_of_digit(static_cast<unsigned>(code & 3u));
    code >>= 2;
  }
  return steps;
}

double path_probability(const GridSpec& grid, std::span<const PathStep> steps) {
  double prob = 1.0;
  for (const PathStep& s : steps)
    prob *= s.jump ? 0.5 * (1.0 - grid.kappa) : 0.5 * grid.kappa;
  return prob;
}

double path_w_value(const GridSpec& grid, std::span<const PathStep> steps) {
  double sum = 0.0;
  for (const PathStep& s : steps) sum += s.e;
  return std::sqrt(grid.delta) * sum;
}

double path_ntilde_value(const GridSpec& grid, std::span<const PathStep> steps) {
  double sum = 0.0;
  for (const PathStep& s : steps) sum += s.jump ? grid.kappa : grid.kappa - 1.0;
  return sum;
}

PathProblem to_path_problem(const ProblemSpec& prob) {
  PathProblem pp;
  pp.driver = prob.driver;
  pp.p = prob.p;
  pp.lower = [lower = prob.barriers.lower](const GridSpec& g, std::span<const PathStep> steps) {
    return lower(t_value(g, static_cast<int>(steps.size())), path_w_value(g, steps),
                 path_ntilde_value(g, steps));
  };
  pp.upper = [upper = prob.barriers.upper](const GridSpec& g, std::span<const PathStep> steps) {
    return upper(t_value(g, static_cast<int>(steps.size())), path_w_value(g, steps),
                 path_ntilde_value(g, steps));
  };
  return pp;
}

OracleSolution oracle_solve(const GridSpec& grid, const PathProblem& prob, Scheme scheme,
                            const SolveOptions& opts) {
  check_depth(grid.n);
  if (prob.p < 0.0) throw config_error("oracle_solve: p must be >= 0");
  const int n = grid.n;

  OracleSolution sol;
  sol.y.resize(n + 1);
  for (int j = 0; j <= n; ++j) sol.y[j].resize(std::size_t{1} << (2 * j));

  // Terminal layer.
  {
    auto& leaf = sol.y[n];
    for (std::uint64_t code = 0; code < leaf.size(); ++code) {
      const auto steps = decode_path(code, n);
      const double lo = prob.lower(grid, steps);
      const double hi = prob.upper(grid, steps);
      if (lo != hi)
        throw model_error("oracle: terminal barriers differ at path code " + std::to_string(code));
      leaf[code] = lo;
    }
  }

  for (int j = n - 1; j >= 0; --j) {
    const auto& next = sol.y[j + 1];
    auto& cur = sol.y[j];
    const double t = t_value(grid, j);
    for (std::uint64_t code = 0; code < cur.size(); ++code) {
      const auto steps = decode_path(code, j);
      const double xi = prob.lower(grid, steps);
      const double zeta = prob.upper(grid, steps);
      if (xi > zeta)
        throw model_error("oracle: barrier violation xi > zeta at depth " + std::to_string(j) +
                          ", path code " + std::to_string(code));
      const StepValues sv{next[code * 4 + 0], next[code * 4 + 1], next[code * 4 + 2],
                          next[code * 4 + 3]};
      NodeUpdate nu;
      if (scheme == Scheme::Explicit) {
        nu = explicit_node_update(grid, prob.driver, prob.p, opts.literal_penalty, t, xi, zeta,
                                  sv);
      } else {
        nu = implicit_node_update(grid, prob.driver, prob.p, opts.rootfind, t, xi, zeta, sv);
      }
      cur[code] = nu.y;
    }
  }
  sol.root = sol.y[0][0];
  return sol;
}

double oracle_cond_exp_check(const GridSpec& grid, int depth, const PathFunctional& functional) {
  check_depth(grid.n);
  if (depth < 0 || depth >= grid.n)
    throw config_error("oracle_cond_exp_check: depth out of range");
  double worst = 0.0;
  const std::uint64_t count = std::uint64_t{1} << (2 * depth);
  std::vector<PathStep> steps(depth + 1);
  for (std::uint64_t code = 0; code < count; ++code) {
    const auto prefix = decode_path(code, depth);
    std::copy(prefix.begin(), prefix.end(), steps.begin());
    double child[4];
    for (unsigned d = 0; d < 4; ++d) {
      steps[depth] = step_of_digit(d);
      child[d] = functional(grid, steps);
    }
    const double kernel = cond_exp(grid, StepValues{child[0], child[1], child[2], child[3]});
    double direct = 0.0;
    for (int d = 3; d >= 0; --d)
      direct += digit_probability(grid, static_cast<unsigned>(d)) * child[d];
    worst = std::max(worst, std::abs(kernel - direct));
  }
  return worst;
}

}  // namespace dbsde
