#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbsde/conditional.hpp"
#include "dbsde/errors.hpp"
#include "dbsde/lattice.hpp"
#include "dbsde/model.hpp"

namespace dbsde {

enum class Scheme { Explicit, Implicit };

enum class Storage {
  RootOnly,  // rolling two-layer storage; diagnostics still accumulated
  Full       // keep (y, z, u, v, a, k) at every node, O(n^3) memory
};

struct RootFindConfig {
  double abs_tol = 1e-13;
  int max_iter = 200;
  double bracket_pad = 1.0;
};

struct SolveOptions {
  Storage storage = Storage::RootOnly;
  int threads = 1;
  // Reproduces the uncorrected closed form of the penalty increments, where
  // the driver value enters undamped by delta. Diagnostic only: it diverges
  // once p*delta is order one. The default form keeps the fixed-point
  // identities a = p*delta*(y-xi)^- and k = p*delta*(zeta-y)^- exact.
  bool literal_penalty = false;
  RootFindConfig rootfind{};
};

// y - g(t,y,z,u)*delta - p*delta*(y-xi)^- + p*delta*(zeta-y)^- as a function
// of y, with everything else frozen at one node. Strictly increasing when
// C_g*delta < 1, since both penalty terms contribute nonnegative slope.
struct ThetaOperator {
  const Driver* driver = nullptr;
  double delta = 0, p_delta = 0, t = 0, xi = 0, zeta = 0, z = 0, u = 0;

  double operator()(double y) const;
};

// Expanding bracket around the target followed by bisection; monotonicity
// makes the root unique. Throws numerical_error on non-convergence and
// config_error when C_g*delta >= 1 (monotonicity lost).
double invert_theta(const ThetaOperator& theta, double target, const RootFindConfig& cfg);

// One-node outputs shared by both backends.
struct NodeUpdate {
  double y = 0, z = 0, u = 0, v = 0, a = 0, k = 0;
};

// Explicit update: m = cond_exp(children), (z,u,v) = repr_coeffs,
// q = m + g(t,m,z,u)*delta, a = (pd/(1+pd))(q-xi)^-, k = (pd/(1+pd))(zeta-q)^-,
// y = q + a - k.
NodeUpdate explicit_node_update(const GridSpec& g, const Driver& driver, double p, bool literal,
                                double t, double xi, double zeta, const StepValues& sv);

// Implicit update: y solves Theta(y) = m by bracketed bisection, then
// a = p*delta*(y-xi)^-, k = p*delta*(zeta-y)^-.
NodeUpdate implicit_node_update(const GridSpec& g, const Driver& driver, double p,
                                const RootFindConfig& cfg, double t, double xi, double zeta,
                                const StepValues& sv);

// Dense per-node arrays of one layer, indexed node_index(j, up, jumps).
struct LayerFields {
  std::vector<double> y, z, u, v, a, k;
};

struct SolveDiagnostics {
  // sup_j E[y_j^2] + delta*sum_j E[z_j^2] + kappa(1-kappa)*sum_j E[u_j^2],
  // expectations taken with exact forward lattice probabilities.
  double energy = 0;
  double max_lower_violation = 0;  // max over nodes of (xi - y)^+
  double max_upper_violation = 0;  // max over nodes of (y - zeta)^+
  Node worst_lower{}, worst_upper{};
  // max over nodes of the relative residuals of a = p*delta*(y-xi)^- and
  // k = p*delta*(zeta-y)^-.
  double max_fixed_point_resid = 0;
  Node worst_fixed_point{};
  double max_complementarity = 0;  // max over nodes of |a*k|
  double max_a = 0, max_k = 0;     // largest penalty increments seen
  double stability_lhs = 0;
  bool stability_ok = true;
};

struct SchemeSolution {
  Scheme scheme = Scheme::Explicit;
  GridSpec grid;
  double p = 0;
  double y0 = 0;
  SolveDiagnostics diag;
  std::vector<std::string> warnings;

  bool has_layers = false;
  std::vector<LayerFields> layers;  // size n+1 when full; only y at j = n

  const LayerFields& layer(int j) const;
};

// Drives one scheme backward layer by layer with rolling storage; used
// directly for lockstep explicit/implicit comparisons.
class BackwardSweep {
 public:
  BackwardSweep(const ProblemSpec& prob, Scheme scheme, const SolveOptions& opts);

  int j() const { return j_; }
  bool done() const { return j_ == 0; }
  void step();  // computes layer j-1

  std::span<const double> y() const { return y_cur_; }
  std::span<const double> z() const { return z_cur_; }
  std::span<const double> u() const { return u_cur_; }
  std::span<const double> v() const { return v_cur_; }
  std::span<const double> a() const { return a_cur_; }
  std::span<const double> k() const { return k_cur_; }

  const SolveDiagnostics& diagnostics() const { return diag_; }
  const ForwardWeights& weights() const { return weights_; }

 private:
  const ProblemSpec& prob_;
  Scheme scheme_;
  SolveOptions opts_;
  ForwardWeights weights_;
  int j_;
  std::vector<double> y_cur_, y_next_;
  std::vector<double> z_cur_, u_cur_, v_cur_, a_cur_, k_cur_;
  SolveDiagnostics diag_;
  double sup_ey2_ = 0, sum_ez2_ = 0, sum_eu2_ = 0;

  void fill_terminal();
  void accumulate_energy(int j, bool terminal);
};

// Full backward sweep j = n-1..0. Aborts with model_error if xi > zeta at any
// node or xi != zeta at a terminal node. Warns (does not abort) when the
// step-size smallness condition fails.
SchemeSolution solve_explicit(const ProblemSpec& prob, const SolveOptions& opts = {});
SchemeSolution solve_implicit(const ProblemSpec& prob, const SolveOptions& opts = {});
SchemeSolution solve_scheme(const ProblemSpec& prob, Scheme scheme,
                            const SolveOptions& opts = {});

// Single-layer operation: given y over layer j+1, produce layer j fields.
LayerFields scheme_step(const ProblemSpec& prob, Scheme scheme, int j,
                        std::span<const double> next_y, const SolveOptions& opts = {});

}  // namespace dbsde
