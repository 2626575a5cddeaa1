#include "dbsde/lattice.hpp"

#include <cmath>
#include <string>

#include "dbsde/errors.hpp"

namespace dbsde {

GridSpec make_grid(int n, double T, double lambda) {
  if (n < 1) throw config_error("make_grid: n must be >= 1, got " + std::to_string(n));
  if (!(T > 0.0)) throw config_error("make_grid: T must be > 0, got " + std::to_string(T));
  if (!(lambda > 0.0))
    throw config_error("make_grid: lambda must be > 0, got " + std::to_string(lambda));
  GridSpec g;
  g.n = n;
  g.T = T;
  g.lambda = lambda;
  g.delta = T / n;
  g.kappa = std::exp(-lambda * g.delta);
  if (!(g.kappa > 0.0 && g.kappa < 1.0))
    throw config_error("make_grid: kappa = exp(-lambda*delta) degenerates at lambda*delta = " +
                       std::to_string(lambda * g.delta));
  return g;
}

// T*(j/n) rather than j*delta so that t_value(n) == T exactly; the terminal
// barrier equality xi_T = zeta_T then holds bit-for-bit.
double t_value(const GridSpec& g, int j) {
  return g.T * (static_cast<double>(j) / static_cast<double>(g.n));
}

double w_value(const GridSpec& g, const Node& node) {
  return std::sqrt(g.delta) * (2.0 * node.up - node.j);
}

double ntilde_value(const GridSpec& g, const Node& node) {
  return node.jumps + node.j * (g.kappa - 1.0);
}

double eta_value(const GridSpec& g, const Branch& b) {
  return b.jump ? g.kappa : g.kappa - 1.0;
}

std::array<Successor, 4> successors(const GridSpec& g, const Node& node) {
  if (node.j >= g.n)
    throw config_error("successors: node at terminal layer j = " + std::to_string(node.j));
  const double half_nojump = 0.5 * g.kappa;
  const double half_jump = 0.5 * (1.0 - g.kappa);
  const int j1 = node.j + 1;
  return {{
      {{+1, false, half_nojump}, {j1, node.up + 1, node.jumps}},
      {{-1, false, half_nojump}, {j1, node.up, node.jumps}},
      {{+1, true, half_jump}, {j1, node.up + 1, node.jumps + 1}},
      {{-1, true, half_jump}, {j1, node.up, node.jumps + 1}},
  }};
}

MomentReport increment_moments(const GridSpec& g) {
  MomentReport r;
  const Node root{0, 0, 0};
  for (const auto& [b, child] : successors(g, root)) {
    const double e = static_cast<double>(b.e);
    const double eta = eta_value(g, b);
    const double mu = e * eta;
    r.e += b.prob * e;
    r.eta += b.prob * eta;
    r.mu += b.prob * mu;
    r.e_sq += b.prob * e * e;
    r.eta_sq += b.prob * eta * eta;
    r.mu_sq += b.prob * mu * mu;
    r.e_eta += b.prob * e * eta;
    r.e_mu += b.prob * e * mu;
    r.eta_mu += b.prob * eta * mu;
  }
  return r;
}

std::size_t total_node_count(int n) {
  std::size_t total = 0;
  for (int j = 0; j <= n; ++j) total += layer_size(j);
  return total;
}

ForwardWeights::ForwardWeights(const GridSpec& g) {
  up_.resize(g.n + 1);
  jump_.resize(g.n + 1);
  up_[0] = {1.0};
  jump_[0] = {1.0};
  for (int j = 1; j <= g.n; ++j) {
    const auto& bu = up_[j - 1];
    const auto& bq = jump_[j - 1];
    std::vector<double> nu(j + 1, 0.0), nq(j + 1, 0.0);
    for (int i = 0; i < j; ++i) {
      nu[i] += 0.5 * bu[i];
      nu[i + 1] += 0.5 * bu[i];
      nq[i] += g.kappa * bq[i];
      nq[i + 1] += (1.0 - g.kappa) * bq[i];
    }
    up_[j] = std::move(nu);
    jump_[j] = std::move(nq);
  }
}

}  // namespace dbsde
