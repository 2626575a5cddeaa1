#pragma once

#include <functional>

#include "dbsde/lattice.hpp"

namespace dbsde {

// Generator g(t, y, z, u) with a declared Lipschitz bound in (y, z, u).
struct Driver {
  std::function<double(double t, double y, double z, double u)> eval;
  double lipschitz = 0.0;
};

// Lower/upper obstacle pair evaluated at (t, W, Ntilde). Must satisfy
// lower <= upper at every lattice node and lower == upper at t = T;
// both are checked during the backward sweep.
struct BarrierPair {
  std::function<double(double t, double w, double ntilde)> lower;
  std::function<double(double t, double w, double ntilde)> upper;
};

struct ProblemSpec {
  GridSpec grid;
  Driver driver;
  BarrierPair barriers;
  double p = 0.0;  // penalization parameter, >= 0
};

// xi = W^2 + Ntilde + (T-t), zeta = W^2 + Ntilde + 3(T-t),
// g = -5|y+z| + 6u. The obstacles jump only where the Poisson part jumps.
ProblemSpec example1(const GridSpec& grid, double p);

// xi = W^2 + Ntilde + (T-t)(1 - 1{W>=a}), zeta = W^2 + Ntilde + (T-t)(2 + 1{W>=a}),
// same driver. The indicator adds predictable jumps to the obstacles.
ProblemSpec example2(const GridSpec& grid, double a, double p);

// Test fixture with barriers wide enough (+/- bound off-terminal) that the
// penalization terms stay identically zero along the sweep; at j = n both
// barriers equal the given terminal function.
ProblemSpec unconstrained(const GridSpec& grid,
                          std::function<double(double t, double w, double ntilde)> terminal,
                          Driver driver, double bound = 1e6, double p = 0.0);

// Left side of the step-size smallness condition
// (3 + 2p + 2C_g + 2C_g^2(1 + exp(2 lambda T)/lambda)) * delta; the schemes
// warn and proceed when it reaches 1 (the paper-scale runs with p >> 1/delta
// all violate it).
double stability_lhs(const GridSpec& grid, double p, double lipschitz);

inline bool stability_ok(const GridSpec& grid, double p, double lipschitz) {
  return stability_lhs(grid, p, lipschitz) < 1.0;
}

}  // namespace dbsde
