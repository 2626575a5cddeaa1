#include "dbsde/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>

namespace dbsde {

namespace {

inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

// Max tracking with a deterministic tie-break on the node index, so that
// chunked parallel sweeps merge to the same argmax as a serial sweep.
struct TrackedMax {
  double value = 0.0;
  std::size_t index = 0;

  void update(double val, std::size_t idx) {
    if (val > value || (val == value && idx < index)) {
      value = val;
      index = idx;
    }
  }
  void merge(const TrackedMax& other) { update(other.value, other.index); }
};

struct LayerStats {
  TrackedMax lower_violation, upper_violation, fixed_point, complementarity;
  double max_a = 0.0, max_k = 0.0;
};

Node node_at(int j, std::size_t idx) {
  const int width = j + 1;
  return Node{j, static_cast<int>(idx / width), static_cast<int>(idx % width)};
}

void compute_node_range(const ProblemSpec& prob, Scheme scheme, const SolveOptions& opts, int j,
                        std::span<const double> next_y, LayerFields& out, LayerStats& stats,
                        std::size_t lo, std::size_t hi) {
  const GridSpec& g = prob.grid;
  const int width = j + 1;
  const int next_width = j + 2;
  const double t = t_value(g, j);
  const double sqrt_delta = std::sqrt(g.delta);
  const double p_delta = prob.p * g.delta;

  for (std::size_t idx = lo; idx < hi; ++idx) {
    const int up = static_cast<int>(idx) / width;
    const int jumps = static_cast<int>(idx) % width;
    const std::size_t base = static_cast<std::size_t>(up) * next_width + jumps;
    const StepValues sv{next_y[base + next_width], next_y[base],
                        next_y[base + next_width + 1], next_y[base + 1]};

    const double w = sqrt_delta * (2.0 * up - j);
    const double nt = jumps + j * (g.kappa - 1.0);
    const double xi = prob.barriers.lower(t, w, nt);
    const double zeta = prob.barriers.upper(t, w, nt);
    if (xi > zeta)
      throw model_error("barrier violation xi > zeta at node (j=" + std::to_string(j) +
                        ", up=" + std::to_string(up) + ", jumps=" + std::to_string(jumps) + ")");

    NodeUpdate nu;
    if (scheme == Scheme::Explicit) {
      nu = explicit_node_update(g, prob.driver, prob.p, opts.literal_penalty, t, xi, zeta, sv);
    } else {
      try {
        nu = implicit_node_update(g, prob.driver, prob.p, opts.rootfind, t, xi, zeta, sv);
      } catch (const numerical_error& e) {
        throw numerical_error(std::string(e.what()) + " at node (j=" + std::to_string(j) +
                              ", up=" + std::to_string(up) +
                              ", jumps=" + std::to_string(jumps) + ")");
      }
    }

    out.y[idx] = nu.y;
    out.z[idx] = nu.z;
    out.u[idx] = nu.u;
    out.v[idx] = nu.v;
    out.a[idx] = nu.a;
    out.k[idx] = nu.k;

    stats.lower_violation.update(neg_part(nu.y - xi), idx);
    stats.upper_violation.update(neg_part(zeta - nu.y), idx);
    const double ra = std::abs(nu.a - p_delta * neg_part(nu.y - xi)) / (1.0 + std::abs(nu.a));
    const double rk = std::abs(nu.k - p_delta * neg_part(zeta - nu.y)) / (1.0 + std::abs(nu.k));
    stats.fixed_point.update(std::max(ra, rk), idx);
    stats.complementarity.update(std::abs(nu.a * nu.k), idx);
    stats.max_a = std::max(stats.max_a, nu.a);
    stats.max_k = std::max(stats.max_k, nu.k);
  }
}

void compute_layer(const ProblemSpec& prob, Scheme scheme, const SolveOptions& opts, int j,
                   std::span<const double> next_y, LayerFields& out, LayerStats& stats) {
  const std::size_t count = layer_size(j);
  const int threads = std::max(1, opts.threads);
  if (threads == 1 || count < 2048) {
    compute_node_range(prob, scheme, opts, j, next_y, out, stats, 0, count);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(threads, count);
  std::vector<LayerStats> chunk_stats(chunks);
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = count * c / chunks;
    const std::size_t hi = count * (c + 1) / chunks;
    pool.emplace_back([&, c, lo, hi] {
      try {
        compute_node_range(prob, scheme, opts, j, next_y, out, chunk_stats[c], lo, hi);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  for (const auto& cs : chunk_stats) {
    stats.lower_violation.merge(cs.lower_violation);
    stats.upper_violation.merge(cs.upper_violation);
    stats.fixed_point.merge(cs.fixed_point);
    stats.complementarity.merge(cs.complementarity);
    stats.max_a = std::max(stats.max_a, cs.max_a);
    stats.max_k = std::max(stats.max_k, cs.max_k);
  }
}

void resize_layer(LayerFields& f, std::size_t count) {
  f.y.resize(count);
  f.z.resize(count);
  f.u.resize(count);
  f.v.resize(count);
  f.a.resize(count);
  f.k.resize(count);
}

constexpr std::size_t kMaxFullStorageNodes = 10'000'000;

}  // namespace

double ThetaOperator::operator()(double y) const {
  return y - driver->eval(t, y, z, u) * delta - p_delta * neg_part(y - xi) +
         p_delta * neg_part(zeta - y);
}

double invert_theta(const ThetaOperator& theta, double target, const RootFindConfig& cfg) {
  if (!(cfg.abs_tol > 0.0) || cfg.max_iter < 1)
    throw config_error("invert_theta: abs_tol must be > 0 and max_iter >= 1");
  const double cg_delta = theta.driver->lipschitz * theta.delta;
  if (cg_delta >= 1.0)
    throw config_error("invert_theta: C_g*delta = " + std::to_string(cg_delta) +
                       " >= 1, Theta may fail to be increasing");

  double half = cfg.bracket_pad * (1.0 + std::abs(target)) * (1.0 + theta.p_delta);
  double lo = target - half;
  double hi = target + half;
  for (int guard = 0; theta(lo) > target; ++guard) {
    if (guard >= cfg.max_iter)
      throw numerical_error("invert_theta: bracket expansion failed below target");
    lo -= (hi - lo);
  }
  for (int guard = 0; theta(hi) < target; ++guard) {
    if (guard >= cfg.max_iter)
      throw numerical_error("invert_theta: bracket expansion failed above target");
    hi += (hi - lo);
  }
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = theta(mid);
    if (std::abs(f - target) <= cfg.abs_tol) return mid;
    if (f < target)
      lo = mid;
    else
      hi = mid;
  }
  throw numerical_error("invert_theta: no convergence within max_iter = " +
                        std::to_string(cfg.max_iter));
}

NodeUpdate explicit_node_update(const GridSpec& g, const Driver& driver, double p, bool literal,
                                double t, double xi, double zeta, const StepValues& sv) {
  const ReprCoeffs rc = repr_coeffs(g, sv);
  const double gval = driver.eval(t, rc.m, rc.z, rc.u);
  const double q = rc.m + gval * g.delta;
  const double p_delta = p * g.delta;
  const double fac = p_delta / (1.0 + p_delta);
  const double penalty_base = literal ? rc.m + gval : q;

  NodeUpdate nu;
  nu.z = rc.z;
  nu.u = rc.u;
  nu.v = rc.v;
  nu.a = fac * neg_part(penalty_base - xi);
  nu.k = fac * neg_part(zeta - penalty_base);
  nu.y = q + nu.a - nu.k;
  return nu;
}

NodeUpdate implicit_node_update(const GridSpec& g, const Driver& driver, double p,
                                const RootFindConfig& cfg, double t, double xi, double zeta,
                                const StepValues& sv) {
  const ReprCoeffs rc = repr_coeffs(g, sv);
  const double p_delta = p * g.delta;
  const ThetaOperator theta{&driver, g.delta, p_delta, t, xi, zeta, rc.z, rc.u};

  NodeUpdate nu;
  nu.z = rc.z;
  nu.u = rc.u;
  nu.v = rc.v;
  nu.y = invert_theta(theta, rc.m, cfg);
  nu.a = p_delta * neg_part(nu.y - xi);
  nu.k = p_delta * neg_part(zeta - nu.y);
  return nu;
}

const LayerFields& SchemeSolution::layer(int j) const {
  if (!has_layers)
    throw config_error("SchemeSolution::layer: solve was run without full storage");
  if (j < 0 || j > grid.n)
    throw config_error("SchemeSolution::layer: index " + std::to_string(j) + " out of range");
  return layers[j];
}

BackwardSweep::BackwardSweep(const ProblemSpec& prob, Scheme scheme, const SolveOptions& opts)
    : prob_(prob), scheme_(scheme), opts_(opts), weights_(prob.grid), j_(prob.grid.n) {
  if (prob.grid.n < 1 || !(prob.grid.delta > 0.0))
    throw config_error("BackwardSweep: invalid grid");
  if (prob.p < 0.0) throw config_error("BackwardSweep: p must be >= 0");
  if (opts.threads < 1) throw config_error("BackwardSweep: threads must be >= 1");
  diag_.stability_lhs = stability_lhs(prob.grid, prob.p, prob.driver.lipschitz);
  diag_.stability_ok = diag_.stability_lhs < 1.0;
  const std::size_t cap = layer_size(prob.grid.n);
  y_cur_.reserve(cap);
  y_next_.reserve(cap);
  z_cur_.reserve(cap);
  u_cur_.reserve(cap);
  v_cur_.reserve(cap);
  a_cur_.reserve(cap);
  k_cur_.reserve(cap);
  fill_terminal();
}

void BackwardSweep::fill_terminal() {
  const GridSpec& g = prob_.grid;
  const int n = g.n;
  const double t = t_value(g, n);
  y_cur_.resize(layer_size(n));
  for (std::size_t idx = 0; idx < y_cur_.size(); ++idx) {
    const Node node = node_at(n, idx);
    const double w = w_value(g, node);
    const double nt = ntilde_value(g, node);
    const double lo = prob_.barriers.lower(t, w, nt);
    const double hi = prob_.barriers.upper(t, w, nt);
    if (lo != hi)
      throw model_error("terminal barriers differ (xi_T != zeta_T) at node (j=" +
                        std::to_string(n) + ", up=" + std::to_string(node.up) +
                        ", jumps=" + std::to_string(node.jumps) + ")");
    y_cur_[idx] = lo;
  }
  accumulate_energy(n, /*terminal=*/true);
}

void BackwardSweep::accumulate_energy(int j, bool terminal) {
  const GridSpec& g = prob_.grid;
  const auto uw = weights_.up_weights(j);
  const auto jw = weights_.jump_weights(j);
  const int width = j + 1;
  double ey2 = 0.0, ez2 = 0.0, eu2 = 0.0;
  for (int up = 0; up < width; ++up) {
    const std::size_t row = static_cast<std::size_t>(up) * width;
    for (int jumps = 0; jumps < width; ++jumps) {
      const double wgt = uw[up] * jw[jumps];
      const std::size_t idx = row + jumps;
      ey2 += wgt * y_cur_[idx] * y_cur_[idx];
      if (!terminal) {
        ez2 += wgt * z_cur_[idx] * z_cur_[idx];
        eu2 += wgt * u_cur_[idx] * u_cur_[idx];
      }
    }
  }
  sup_ey2_ = std::max(sup_ey2_, ey2);
  sum_ez2_ += ez2;
  sum_eu2_ += eu2;
  diag_.energy =
      sup_ey2_ + g.delta * sum_ez2_ + g.kappa * (1.0 - g.kappa) * sum_eu2_;
}

void BackwardSweep::step() {
  if (j_ == 0) throw config_error("BackwardSweep::step: already at the root layer");
  const int j = j_ - 1;
  const std::size_t count = layer_size(j);
  y_next_.resize(count);
  z_cur_.resize(count);
  u_cur_.resize(count);
  v_cur_.resize(count);
  a_cur_.resize(count);
  k_cur_.resize(count);

  LayerFields out;  // spans into the sweep buffers would be nicer; reuse via move below
  out.y = std::move(y_next_);
  out.z = std::move(z_cur_);
  out.u = std::move(u_cur_);
  out.v = std::move(v_cur_);
  out.a = std::move(a_cur_);
  out.k = std::move(k_cur_);

  LayerStats stats;
  compute_layer(prob_, scheme_, opts_, j, y_cur_, out, stats);

  y_next_ = std::move(y_cur_);
  y_cur_ = std::move(out.y);
  z_cur_ = std::move(out.z);
  u_cur_ = std::move(out.u);
  v_cur_ = std::move(out.v);
  a_cur_ = std::move(out.a);
  k_cur_ = std::move(out.k);
  j_ = j;

  if (stats.lower_violation.value > diag_.max_lower_violation) {
    diag_.max_lower_violation = stats.lower_violation.value;
    diag_.worst_lower = node_at(j, stats.lower_violation.index);
  }
  if (stats.upper_violation.value > diag_.max_upper_violation) {
    diag_.max_upper_violation = stats.upper_violation.value;
    diag_.worst_upper = node_at(j, stats.upper_violation.index);
  }
  if (stats.fixed_point.value > diag_.max_fixed_point_resid) {
    diag_.max_fixed_point_resid = stats.fixed_point.value;
    diag_.worst_fixed_point = node_at(j, stats.fixed_point.index);
  }
  diag_.max_complementarity = std::max(diag_.max_complementarity, stats.complementarity.value);
  diag_.max_a = std::max(diag_.max_a, stats.max_a);
  diag_.max_k = std::max(diag_.max_k, stats.max_k);

  accumulate_energy(j, /*terminal=*/false);
}

SchemeSolution solve_scheme(const ProblemSpec& prob, Scheme scheme, const SolveOptions& opts) {
  const int n = prob.grid.n;
  if (opts.storage == Storage::Full && total_node_count(n) > kMaxFullStorageNodes)
    throw config_error("solve_scheme: full storage needs " +
                       std::to_string(total_node_count(n)) +
                       " nodes; limit is " + std::to_string(kMaxFullStorageNodes) +
                       " (use Storage::RootOnly)");

  BackwardSweep sweep(prob, scheme, opts);

  SchemeSolution sol;
  sol.scheme = scheme;
  sol.grid = prob.grid;
  sol.p = prob.p;
  if (opts.storage == Storage::Full) {
    sol.has_layers = true;
    sol.layers.resize(n + 1);
    sol.layers[n].y.assign(sweep.y().begin(), sweep.y().end());
  }
  while (!sweep.done()) {
    sweep.step();
    if (opts.storage == Storage::Full) {
      LayerFields& f = sol.layers[sweep.j()];
      f.y.assign(sweep.y().begin(), sweep.y().end());
      f.z.assign(sweep.z().begin(), sweep.z().end());
      f.u.assign(sweep.u().begin(), sweep.u().end());
      f.v.assign(sweep.v().begin(), sweep.v().end());
      f.a.assign(sweep.a().begin(), sweep.a().end());
      f.k.assign(sweep.k().begin(), sweep.k().end());
    }
  }
  sol.y0 = sweep.y()[0];
  sol.diag = sweep.diagnostics();
  if (!sol.diag.stability_ok)
    sol.warnings.push_back(
        "step-size smallness condition violated: (3+2p+2C_g+2C_g^2(1+exp(2*lambda*T)/lambda))"
        "*delta = " +
        std::to_string(sol.diag.stability_lhs) + " >= 1; proceeding anyway");
  return sol;
}

SchemeSolution solve_explicit(const ProblemSpec& prob, const SolveOptions& opts) {
  return solve_scheme(prob, Scheme::Explicit, opts);
}

SchemeSolution solve_implicit(const ProblemSpec& prob, const SolveOptions& opts) {
  return solve_scheme(prob, Scheme::Implicit, opts);
}

LayerFields scheme_step(const ProblemSpec& prob, Scheme scheme, int j,
                        std::span<const double> next_y, const SolveOptions& opts) {
  if (j < 0 || j >= prob.grid.n)
    throw config_error("scheme_step: layer index " + std::to_string(j) + " out of range");
  if (next_y.size() != layer_size(j + 1))
    throw config_error("scheme_step: next layer has wrong size");
  LayerFields out;
  resize_layer(out, layer_size(j));
  LayerStats stats;
  compute_layer(prob, scheme, opts, j, next_y, out, stats);
  return out;
}

}  // namespace dbsde
