#include <cmath>

#include "dbsde/errors.hpp"
#include "dbsde/model.hpp"
#include "dbsde/scheme.hpp"
#include "doctest.h"

using namespace dbsde;

namespace {

Driver zero_driver() {
  return Driver{[](double, double, double, double) { return 0.0; }, 0.0};
}

// constant obstacle band [0, 1] with p*delta = 1 (n = 4, T = 1, p = 4)
ProblemSpec band_problem() {
  ProblemSpec prob;
  prob.grid = make_grid(4, 1.0, 5.0);
  prob.driver = zero_driver();
  prob.barriers.lower = [](double, double, double) { return 0.0; };
  prob.barriers.upper = [](double, double, double) { return 1.0; };
  prob.p = 4.0;
  return prob;
}

}  // namespace

TEST_CASE("explicit step: lower penalty active") {
  const ProblemSpec prob = band_problem();
  const std::vector<double> next_y(layer_size(1), -1.0);  // m + G*delta = -1
  const LayerFields f = scheme_step(prob, Scheme::Explicit, 0, next_y);
  CHECK(f.a[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f.k[0] == 0.0);
  CHECK(f.y[0] == doctest::Approx(-0.5).epsilon(1e-15));
  // fixed point: a = p*delta*(y - xi)^-
  CHECK(f.a[0] == doctest::Approx(1.0 * 0.5).epsilon(1e-15));
}

TEST_CASE("explicit step: upper penalty active") {
  const ProblemSpec prob = band_problem();
  const std::vector<double> next_y(layer_size(1), 2.0);
  const LayerFields f = scheme_step(prob, Scheme::Explicit, 0, next_y);
  CHECK(f.k[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f.a[0] == 0.0);
  CHECK(f.y[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(f.k[0] == doctest::Approx(1.0 * 0.5).epsilon(1e-15));
}

TEST_CASE("explicit step: penalty inactive inside the band") {
  const ProblemSpec prob = band_problem();
  const std::vector<double> next_y(layer_size(1), 0.5);
  const LayerFields f = scheme_step(prob, Scheme::Explicit, 0, next_y);
  CHECK(f.a[0] == 0.0);
  CHECK(f.k[0] == 0.0);
  CHECK(f.y[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero problem propagates zero") {
  const GridSpec g = make_grid(16, 1.0, 5.0);
  const ProblemSpec prob =
      unconstrained(g, [](double, double, double) { return 0.0; }, zero_driver());
  const SchemeSolution sol = solve_explicit(prob);
  CHECK(sol.y0 == 0.0);
  CHECK(sol.diag.max_a == 0.0);
  CHECK(sol.diag.max_k == 0.0);
  CHECK(sol.diag.max_complementarity == 0.0);
}

TEST_CASE("terminal W^2 with zero driver prices the quadratic variation") {
  const GridSpec g = make_grid(2, 1.0, 5.0);
  const ProblemSpec prob =
      unconstrained(g, [](double, double w, double) { return w * w; }, zero_driver());
  const SchemeSolution sol = solve_explicit(prob);
  CHECK(sol.y0 == doctest::Approx(1.0).epsilon(1e-12));  // E[delta (e1+e2)^2] = 2*delta
}

TEST_CASE("terminal Ntilde with zero driver is a martingale") {
  const GridSpec g = make_grid(12, 1.0, 5.0);
  const ProblemSpec prob =
      unconstrained(g, [](double, double, double nt) { return nt; }, zero_driver());
  const SchemeSolution sol = solve_explicit(prob);
  CHECK(std::abs(sol.y0) <= 1e-12);
}

TEST_CASE("example 1 solve: invariants and regression value") {
  const GridSpec g = make_grid(100, 1.0, 5.0);
  const ProblemSpec prob = example1(g, 20.0);
  const SchemeSolution sol = solve_explicit(prob);
  CHECK(sol.y0 > 1.0);
  CHECK(sol.y0 < 3.0);
  // regression guard for this implementation; the published table reports
  // 1.2181 here, see the acceptance suite for the tracked divergence
  CHECK(sol.y0 == doctest::Approx(1.3369918662).epsilon(1e-6));
  CHECK(sol.diag.max_fixed_point_resid <= 1e-12);
  CHECK(sol.diag.max_complementarity == 0.0);
  CHECK_FALSE(sol.warnings.empty());  // smallness condition violated at this scale
  CHECK(std::isfinite(sol.diag.energy));
  CHECK(sol.diag.energy > 0.0);
}

TEST_CASE("barrier violation is non-increasing in p") {
  const GridSpec g = make_grid(100, 1.0, 5.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double p : {20.0, 50.0, 100.0, 500.0, 1000.0, 5000.0, 20000.0}) {
    const SchemeSolution sol = solve_explicit(example1(g, p));
    const double viol = std::max(sol.diag.max_lower_violation, sol.diag.max_upper_violation);
    CHECK(viol <= prev);
    prev = viol;
  }
}

TEST_CASE("fixed-point identities hold for every table p") {
  const GridSpec g = make_grid(100, 1.0, 5.0);
  for (double p : {20.0, 500.0, 20000.0}) {
    const SchemeSolution sol = solve_explicit(example1(g, p));
    CHECK(sol.diag.max_fixed_point_resid <= 1e-12);
    CHECK(sol.diag.max_complementarity == 0.0);
  }
}

TEST_CASE("energy diagnostic is stable when n doubles") {
  const SchemeSolution a = solve_explicit(example1(make_grid(100, 1.0, 5.0), 100.0));
  const SchemeSolution b = solve_explicit(example1(make_grid(200, 1.0, 5.0), 100.0));
  CHECK(std::abs(b.diag.energy - a.diag.energy) / a.diag.energy < 0.5);
}

TEST_CASE("literal penalty closed form diverges at large p*delta") {
  const GridSpec g = make_grid(50, 1.0, 5.0);
  SolveOptions literal;
  literal.literal_penalty = true;
  const SchemeSolution sol = solve_explicit(example1(g, 2000.0), literal);
  CHECK((!std::isfinite(sol.y0) || std::abs(sol.y0) > 10.0));
}

TEST_CASE("solver rejects inverted barriers") {
  ProblemSpec prob;
  prob.grid = make_grid(4, 1.0, 5.0);
  prob.driver = zero_driver();
  prob.barriers.lower = [](double t, double, double) { return t >= 1.0 ? 0.0 : 1.0; };
  prob.barriers.upper = [](double t, double, double) { return t >= 1.0 ? 0.0 : -1.0; };
  prob.p = 1.0;
  CHECK_THROWS_AS(solve_explicit(prob), model_error);
}

TEST_CASE("solver rejects terminal mismatch") {
  ProblemSpec prob;
  prob.grid = make_grid(4, 1.0, 5.0);
  prob.driver = zero_driver();
  prob.barriers.lower = [](double, double, double) { return 0.0; };
  prob.barriers.upper = [](double, double, double) { return 1.0; };
  prob.p = 1.0;
  CHECK_THROWS_AS(solve_explicit(prob), model_error);
}

TEST_CASE("thread count does not change results") {
  const GridSpec g = make_grid(72, 1.0, 5.0);
  const ProblemSpec prob = example1(g, 100.0);
  SolveOptions serial, parallel;
  parallel.threads = 4;
  const SchemeSolution a = solve_explicit(prob, serial);
  const SchemeSolution b = solve_explicit(prob, parallel);
  CHECK(a.y0 == b.y0);
  CHECK(a.diag.max_lower_violation == b.diag.max_lower_violation);
  CHECK(a.diag.worst_lower.j == b.diag.worst_lower.j);
  CHECK(a.diag.worst_lower.up == b.diag.worst_lower.up);
  CHECK(a.diag.energy == b.diag.energy);
}

TEST_CASE("full storage exposes per-layer fields") {
  const GridSpec g = make_grid(10, 1.0, 5.0);
  const ProblemSpec prob = example1(g, 50.0);
  SolveOptions opts;
  opts.storage = Storage::Full;
  const SchemeSolution sol = solve_explicit(prob, opts);
  REQUIRE(sol.has_layers);
  CHECK(sol.layer(0).y.size() == 1);
  CHECK(sol.layer(0).y[0] == sol.y0);
  CHECK(sol.layer(10).y.size() == layer_size(10));
  CHECK(sol.layer(5).a.size() == layer_size(5));
  const SchemeSolution light = solve_explicit(prob);
  CHECK_THROWS_AS(light.layer(0), config_error);
  CHECK(light.y0 == sol.y0);
}
