#include "dbsde/model.hpp"

#include <cmath>
#include <utility>

namespace dbsde {

namespace {

Driver section5_driver() {
  return Driver{
      [](double, double y, double z, double u) { return -5.0 * std::abs(y + z) + 6.0 * u; },
      // 5-Lipschitz in (y,z) jointly, 6-Lipschitz in u; declare the max.
      6.0};
}

}  // namespace

ProblemSpec example1(const GridSpec& grid, double p) {
  const double T = grid.T;
  ProblemSpec prob;
  prob.grid = grid;
  prob.driver = section5_driver();
  prob.barriers.lower = [T](double t, double w, double nt) { return w * w + nt + (T - t); };
  prob.barriers.upper = [T](double t, double w, double nt) {
    return w * w + nt + 3.0 * (T - t);
  };
  prob.p = p;
  return prob;
}

ProblemSpec example2(const GridSpec& grid, double a, double p) {
  const double T = grid.T;
  ProblemSpec prob;
  prob.grid = grid;
  prob.driver = section5_driver();
  prob.barriers.lower = [T, a](double t, double w, double nt) {
    const double ind = w >= a ? 1.0 : 0.0;
    return w * w + nt + (T - t) * (1.0 - ind);
  };
  prob.barriers.upper = [T, a](double t, double w, double nt) {
    const double ind = w >= a ? 1.0 : 0.0;
    return w * w + nt + (T - t) * (2.0 + ind);
  };
  prob.p = p;
  return prob;
}

ProblemSpec unconstrained(const GridSpec& grid,
                          std::function<double(double, double, double)> terminal, Driver driver,
                          double bound, double p) {
  const double T = grid.T;
  ProblemSpec prob;
  prob.grid = grid;
  prob.driver = std::move(driver);
  // t_value(n) == T exactly, so the terminal test is a plain comparison.
  prob.barriers.lower = [T, bound, terminal](double t, double w, double nt) {
    return t >= T ? terminal(t, w, nt) : -bound;
  };
  prob.barriers.upper = [T, bound, terminal](double t, double w, double nt) {
    return t >= T ? terminal(t, w, nt) : bound;
  };
  prob.p = p;
  return prob;
}

double stability_lhs(const GridSpec& grid, double p, double lipschitz) {
  const double cg = lipschitz;
  const double factor =
      3.0 + 2.0 * p + 2.0 * cg +
      2.0 * cg * cg * (1.0 + std::exp(2.0 * grid.lambda * grid.T) / grid.lambda);
  return factor * grid.delta;
}

}  // namespace dbsde
