#include <cmath>

#include "dbsde/model.hpp"
#include "dbsde/trajectory.hpp"
#include "doctest.h"

using namespace dbsde;

TEST_CASE("example1 barriers and driver") {
  const GridSpec g = make_grid(100, 1.0, 5.0);
  const ProblemSpec prob = example1(g, 20.0);
  CHECK(prob.barriers.lower(0.0, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(prob.barriers.upper(0.0, 0.0, 0.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(prob.driver.eval(0.3, 1.0, -1.0, 0.5) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(prob.driver.lipschitz == 6.0);
  CHECK(prob.p == 20.0);

  // terminal: the (T-t) cushions vanish, xi = zeta = W^2 + Ntilde
  for (double w : {-2.0, 0.0, 1.5}) {
    for (double nt : {-0.3, 0.0, 2.0}) {
      CHECK(prob.barriers.lower(1.0, w, nt) == w * w + nt);
      CHECK(prob.barriers.lower(1.0, w, nt) == prob.barriers.upper(1.0, w, nt));
    }
  }
}

TEST_CASE("example2 barriers track the indicator") {
  const GridSpec g = make_grid(100, 1.0, 5.0);
  const ProblemSpec below = example2(g, -1.0, 20.0);
  CHECK(below.barriers.lower(0.0, 0.0, 0.0) == 0.0);  // W=0 >= -1
  CHECK(below.barriers.upper(0.0, 0.0, 0.0) == doctest::Approx(3.0).epsilon(1e-15));

  const ProblemSpec above = example2(g, 1.0, 20.0);
  CHECK(above.barriers.lower(0.0, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(above.barriers.upper(0.0, 0.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));

  for (double w : {-2.0, 1.0, 2.0}) {
    CHECK(above.barriers.lower(1.0, w, 0.5) == above.barriers.upper(1.0, w, 0.5));
  }
}

TEST_CASE("barrier ordering holds at every lattice node") {
  const GridSpec g = make_grid(24, 1.0, 5.0);
  for (const ProblemSpec& prob :
       {example1(g, 100.0), example2(g, -1.0, 100.0), example2(g, 1.0, 100.0)}) {
    for (int j = 0; j <= g.n; ++j) {
      const double t = t_value(g, j);
      for (int up = 0; up <= j; ++up) {
        for (int jumps = 0; jumps <= j; ++jumps) {
          const Node node{j, up, jumps};
          const double lo = prob.barriers.lower(t, w_value(g, node), ntilde_value(g, node));
          const double hi = prob.barriers.upper(t, w_value(g, node), ntilde_value(g, node));
          REQUIRE(lo <= hi);
          if (j == g.n) REQUIRE(lo == hi);
        }
      }
    }
  }
}

TEST_CASE("declared Lipschitz bound holds on random samples") {
  const GridSpec g = make_grid(10, 1.0, 5.0);
  const Driver driver = example1(g, 0.0).driver;
  SplitMix64 gen(11);
  auto draw = [&] { return 10.0 * (2.0 * gen.uniform() - 1.0); };
  for (int trial = 0; trial < 10000; ++trial) {
    const double t = gen.uniform();
    const double y1 = draw(), z1 = draw(), u1 = draw();
    const double y2 = draw(), z2 = draw(), u2 = draw();
    const double lhs = std::abs(driver.eval(t, y1, z1, u1) - driver.eval(t, y2, z2, u2));
    const double rhs =
        driver.lipschitz * (std::abs(y1 - y2) + std::abs(z1 - z2) + std::abs(u1 - u2));
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("unconstrained fixture pins the terminal and opens the band") {
  const GridSpec g = make_grid(8, 1.0, 5.0);
  const ProblemSpec prob = unconstrained(
      g, [](double, double w, double) { return w * w; },
      Driver{[](double, double, double, double) { return 0.0; }, 0.0}, 1e6);
  CHECK(prob.barriers.lower(t_value(g, 3), 0.7, 0.1) == -1e6);
  CHECK(prob.barriers.upper(t_value(g, 3), 0.7, 0.1) == 1e6);
  CHECK(prob.barriers.lower(t_value(g, g.n), 0.7, 0.1) == doctest::Approx(0.49).epsilon(1e-15));
  CHECK(prob.barriers.lower(t_value(g, g.n), 0.7, 0.1) ==
        prob.barriers.upper(t_value(g, g.n), 0.7, 0.1));
}

TEST_CASE("stability predicate") {
  // paper-scale parameters violate the smallness condition by orders of magnitude
  const GridSpec g = make_grid(100, 1.0, 5.0);
  CHECK_FALSE(stability_ok(g, 20.0, 6.0));
  CHECK(stability_lhs(g, 20.0, 6.0) > 1.0);

  // a tame configuration satisfies it
  const GridSpec tame = make_grid(100, 1.0, 1.0);
  CHECK(stability_ok(tame, 0.0, 0.0));
  CHECK(stability_lhs(tame, 0.0, 0.0) == doctest::Approx(0.03).epsilon(1e-12));
}
