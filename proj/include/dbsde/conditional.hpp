#pragma once

#include <cmath>

#include "dbsde/lattice.hpp"

namespace dbsde {

// Values of a layer-(j+1) quantity at the four children of a node, in the
// canonical branch order: (+1,no-jump), (-1,no-jump), (+1,jump), (-1,jump).
struct StepValues {
  double vpp = 0, vpm = 0, vjp = 0, vjm = 0;
};

// One-step martingale representation coefficients: the increment
// Y - E[Y] decomposes exactly onto the orthogonal basis (e, eta, mu) as
// sqrt(delta)*z*e + u*eta + v*mu.
struct ReprCoeffs {
  double m = 0;  // conditional mean E[Y]
  double z = 0;  // (1/sqrt(delta)) E[Y e]
  double u = 0;  // E[Y eta] / (kappa (1-kappa))
  double v = 0;  // E[Y mu]  / (kappa (1-kappa))
};

// Four-branch conditional expectation kernel. Every backend (lattice sweep,
// path-tree oracle) routes one-step expectations through this function so
// that they agree bit-for-bit.
inline double cond_exp(const GridSpec& g, const StepValues& sv) {
  return 0.5 * g.kappa * (sv.vpp + sv.vpm) + 0.5 * (1.0 - g.kappa) * (sv.vjp + sv.vjm);
}

// u and v are written with the kappa(1-kappa) factor cancelled algebraically:
// E[Y eta] = kappa(1-kappa)/2 * ((vjp+vjm) - (vpp+vpm)), and likewise for mu.
inline ReprCoeffs repr_coeffs(const GridSpec& g, const StepValues& sv) {
  ReprCoeffs rc;
  rc.m = cond_exp(g, sv);
  const double ye =
      0.5 * g.kappa * (sv.vpp - sv.vpm) + 0.5 * (1.0 - g.kappa) * (sv.vjp - sv.vjm);
  rc.z = ye / std::sqrt(g.delta);
  rc.u = 0.5 * ((sv.vjp + sv.vjm) - (sv.vpp + sv.vpm));
  rc.v = 0.5 * ((sv.vjp - sv.vjm) - (sv.vpp - sv.vpm));
  return rc;
}

// Reconstructs the branch value m + sqrt(delta)*z*e + u*eta + v*mu.
inline double reconstruct(const GridSpec& g, const ReprCoeffs& rc, const Branch& b) {
  return rc.m + std::sqrt(g.delta) * rc.z * b.e + rc.u * eta_value(g, b) +
         rc.v * b.e * eta_value(g, b);
}

}  // namespace dbsde
