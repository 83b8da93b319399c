#pragma once

// Closed-form best responses and the symmetric Nash fixed point of the two
// market makers given contract sensitivities Z.

#include <cmath>
#include <stdexcept>
#include <string>

#include "alab/ad.hpp"
#include "alab/model.hpp"
#include "alab/zmatrix.hpp"

namespace alab {

struct NoPositiveRoot : std::runtime_error {
  NoPositiveRoot(double a, double b, double zt)
      : std::runtime_error("no positive gamma root (dg1+z1=" + std::to_string(a) +
                           ", dg2+z2=" + std::to_string(b) +
                           ", z_tilde=" + std::to_string(zt) + ")"),
        dg1_plus_z1(a),
        dg2_plus_z2(b),
        z_tilde(zt) {}
  double dg1_plus_z1, dg2_plus_z2, z_tilde;
};

struct EquilibriumNotFound : std::runtime_error {
  EquilibriumNotFound(double a, double b, int path = -1, int step = -1)
      : std::runtime_error("no symmetric Nash equilibrium (Dg1+z1=" + std::to_string(a) +
                           ", Dg2+z2=" + std::to_string(b) + ", path=" + std::to_string(path) +
                           ", step=" + std::to_string(step) + ")"),
        dg1_plus_z1(a),
        dg2_plus_z2(b),
        path(path),
        step(step) {}
  EquilibriumNotFound with_coordinates(int p, int s) const {
    return EquilibriumNotFound(dg1_plus_z1, dg2_plus_z2, p, s);
  }
  double dg1_plus_z1, dg2_plus_z2;
  int path, step;
};

template <class R>
struct ControlPairT {
  R mu_p{};
  R mu_q{};
  R lam_p{};
  R lam_q{};
  R gamma{1.0};
  bool has_gamma = false;
  bool mu_clipped = false;
  bool lam_p_clipped = false;
  bool lam_q_clipped = false;
  bool fallback = false;  // zero-contract no-spread fallback engaged
};

using ControlPair = ControlPairT<double>;

// Intensity best response: clip(lambda0 + z_own + Dg_own, 0, lambda_inf).
// z_own is z^{4,p} for maker p and z^{6,q} for maker q.
template <class R>
R best_response_lambda(Maker i, const MarketStateT<R>& s, const R& z_own,
                       const ModelParams& pr, bool* clipped = nullptr) {
  const R raw = pr.lambda0 + z_own + delta_g(i, s, own_jump(i), pr);
  return clamp_scalar(raw, 0.0, pr.lambda_inf, clipped);
}

// Positive root of c*(dg2+z2)*gamma^2 - (z_tilde/sigma)*gamma - c*(dg1+z1) = 0,
// the symmetric first-order condition for the combined spread. Within the
// valid region (both sums negative) the quadratic has exactly one positive
// root; outside it, any positive root that is a local maximum of the spread
// objective is still returned, and NoPositiveRoot is thrown when none exists.
template <class R>
R solve_symmetric_gamma(const R& dg1_plus_z1, const R& dg2_plus_z2, const R& z_tilde,
                        double sigma, double c) {
  using std::sqrt;
  const R a = c * dg2_plus_z2;
  const R b = -z_tilde / sigma;
  const R e = -(c * dg1_plus_z1);
  const double av = value_of(a);
  const double bv = value_of(b);

  auto fail = [&]() -> NoPositiveRoot {
    return NoPositiveRoot(value_of(dg1_plus_z1), value_of(dg2_plus_z2), value_of(z_tilde));
  };

  if (av == 0.0) {
    if (bv == 0.0) throw fail();
    const R root = -(e / b);  // b*gamma + e = 0
    if (value_of(root) > 0.0) return root;
    throw fail();
  }

  const R disc = b * b - 4.0 * (a * e);
  if (value_of(disc) < 0.0) throw fail();
  const R sq = sqrt(disc);

  // Citardauq split avoids cancellation: q = -(b + sign(b)|sq|)/2, roots q/a, e/q.
  const R q = (bv >= 0.0) ? (b + sq) * (-0.5) : (b - sq) * (-0.5);
  const double qv = value_of(q);

  const R r1 = q / a;
  const bool ok1 = value_of(r1) > 0.0;
  if (qv == 0.0) {
    if (ok1) return r1;
    throw fail();
  }
  const R r2 = e / q;
  const bool ok2 = value_of(r2) > 0.0;
  if (ok1 && ok2 && value_of(r1) != value_of(r2)) {
    // Two positive stationary points only happen outside the valid region
    // (a > 0); the smaller one is the local maximum of the spread objective.
    return value_of(r1) <= value_of(r2) ? r1 : r2;
  }
  if (ok1) return r1;
  if (ok2) return r2;
  throw fail();
}

// Residual of the first-order condition at gamma, relative to its term scale.
inline double symmetric_gamma_residual(double dg1_plus_z1, double dg2_plus_z2,
                                       double z_tilde, double sigma, double c,
                                       double gamma) {
  const double t1 = -z_tilde / sigma;
  const double t2 = -c * dg1_plus_z1 / gamma;
  const double t3 = c * dg2_plus_z2 * gamma;
  const double scale = std::max(1.0, std::fabs(t1) + std::fabs(t2) + std::fabs(t3));
  return std::fabs(t1 + t2 + t3) / scale;
}

// Symmetric Nash controls for tied Z. The buyer/seller payoff increments
// entering the shared gamma equation are averaged over the two makers so the
// solve is invariant under relabeling; at mirrored states the two coincide
// and the fixed point is exact. The spread condition keeps the
// lambda0 e^{-d} factor multiplying the intensity derivatives, so z5 is
// rescaled by e^{d}/lambda0 before entering the quadratic.
template <class R>
ControlPairT<R> nash_fixed_point(const MarketStateT<R>& s, const ZMatrixT<R>& Z,
                                 const ModelParams& pr) {
  using std::log;
  const R dg1 = 0.5 * (delta_g(Maker::p, s, JumpKind::BuyerArrival, pr) +
                       delta_g(Maker::q, s, JumpKind::BuyerArrival, pr));
  const R dg2 = 0.5 * (delta_g(Maker::p, s, JumpKind::SellerArrival, pr) +
                       delta_g(Maker::q, s, JumpKind::SellerArrival, pr));
  const R sum1 = dg1 + Z(1, Maker::p);
  const R sum2 = dg2 + Z(2, Maker::p);
  if (!(value_of(sum1) < 0.0) || !(value_of(sum2) < 0.0)) {
    throw EquilibriumNotFound(value_of(sum1), value_of(sum2));
  }

  ControlPairT<R> ctrl;
  const R z_tilde = Z(5, Maker::p) * (std::exp(pr.d) / pr.lambda0);
  try {
    ctrl.gamma = solve_symmetric_gamma(sum1, sum2, z_tilde, pr.sigma, pr.c);
  } catch (const NoPositiveRoot&) {
    throw EquilibriumNotFound(value_of(sum1), value_of(sum2));
  }
  ctrl.has_gamma = true;

  if (pr.c > 0.0) {
    const R half = 0.5 * log(ctrl.gamma) / pr.c;
    ctrl.mu_p = clamp_scalar(half, -pr.mu_inf, pr.mu_inf, &ctrl.mu_clipped);
    ctrl.mu_q = ctrl.mu_p;
  }
  ctrl.lam_p = best_response_lambda(Maker::p, s, Z(4, Maker::p), pr, &ctrl.lam_p_clipped);
  ctrl.lam_q = best_response_lambda(Maker::q, s, Z(6, Maker::q), pr, &ctrl.lam_q_clipped);
  return ctrl;
}

// Zero-contract fallback: when the spread condition fails the makers keep
// zero spreads and the clipped intensity best response.
template <class R>
ControlPairT<R> nash_or_zero_spread(const MarketStateT<R>& s, const ZMatrixT<R>& Z,
                                    const ModelParams& pr) {
  try {
    return nash_fixed_point(s, Z, pr);
  } catch (const EquilibriumNotFound&) {
    ControlPairT<R> ctrl;
    ctrl.fallback = true;
    ctrl.lam_p = best_response_lambda(Maker::p, s, Z(4, Maker::p), pr, &ctrl.lam_p_clipped);
    ctrl.lam_q = best_response_lambda(Maker::q, s, Z(6, Maker::q), pr, &ctrl.lam_q_clipped);
    return ctrl;
  }
}

}  // namespace alab
