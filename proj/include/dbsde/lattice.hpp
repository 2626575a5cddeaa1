#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace dbsde {

// Discrete time/probability structure of the joint random walk approximating
// (W, Ntilde): n uniform steps of size delta = T/n, Brownian increments
// sqrt(delta)*e with e = +/-1 equiprobable, and compensated Poisson increments
// eta in {kappa-1 (no jump), kappa (jump)} with no-jump probability
// kappa = exp(-lambda*delta).
struct GridSpec {
  int n = 0;
  double T = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
};

// Validates inputs and computes the derived fields once.
GridSpec make_grid(int n, double T, double lambda);

// Markovian lattice state after j steps: `up` of the j Brownian increments
// were +1, `jumps` of the j Poisson increments were jumps. All built-in
// problems depend on the path only through (t, W, Ntilde), so states
// recombine and layer j holds (j+1)^2 nodes.
struct Node {
  int j = 0;
  int up = 0;
  int jumps = 0;
};

double t_value(const GridSpec& g, int j);
double w_value(const GridSpec& g, const Node& node);
double ntilde_value(const GridSpec& g, const Node& node);

// One of the four one-step transitions.
struct Branch {
  int e = 1;          // Brownian increment sign
  bool jump = false;  // eta = kappa if jump, kappa-1 otherwise
  double prob = 0.0;
};

double eta_value(const GridSpec& g, const Branch& b);

struct Successor {
  Branch branch;
  Node node;
};

// The four children of a non-terminal node, in the canonical order
// (+1,no-jump), (-1,no-jump), (+1,jump), (-1,jump).
std::array<Successor, 4> successors(const GridSpec& g, const Node& node);

// Exact moments of (e, eta, mu = e*eta) over the four branches.
struct MomentReport {
  double e = 0, eta = 0, mu = 0;
  double e_sq = 0, eta_sq = 0, mu_sq = 0;
  double e_eta = 0, e_mu = 0, eta_mu = 0;
};

MomentReport increment_moments(const GridSpec& g);

inline std::size_t layer_size(int j) {
  return static_cast<std::size_t>(j + 1) * static_cast<std::size_t>(j + 1);
}

std::size_t total_node_count(int n);

// Row-major index of (up, jumps) within layer j.
inline std::size_t node_index(int j, int up, int jumps) {
  return static_cast<std::size_t>(up) * static_cast<std::size_t>(j + 1) +
         static_cast<std::size_t>(jumps);
}

// Exact reach probabilities of lattice nodes. The up-count and jump-count are
// independent, so the mass of (j, up, jumps) factorizes into a symmetric
// binomial weight and a kappa-Bernoulli binomial weight; both families are
// built once by convolution recurrences.
class ForwardWeights {
 public:
  explicit ForwardWeights(const GridSpec& g);

  std::span<const double> up_weights(int j) const { return up_[j]; }
  std::span<const double> jump_weights(int j) const { return jump_[j]; }

  double weight(const Node& node) const {
    return up_[node.j][node.up] * jump_[node.j][node.jumps];
  }

 private:
  std::vector<std::vector<double>> up_;
  std::vector<std::vector<double>> jump_;
};

}  // namespace dbsde
