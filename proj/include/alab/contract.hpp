#pragma once

// Contract machinery: the generator F^i driving the rebate process Y^i, the
// one-step Y update, and the exchange-side report built from simulated
// batches. Rebates are never materialized in closed form; xi^i is R0_i plus
// the terminal value of Y started at zero.

#include <cmath>

#include "alab/equilibrium.hpp"

namespace alab {

// Drift functional of Y^i. Jump sensitivities pair with the canonical
// process intensities (z4 with N^p, z6 with N^q for both makers); the
// mu z / sigma terms convert the raw Brownian integrals in Y into
// drift-free integrals under the controlled measure.
template <class R>
R generator_F(Maker i, const MarketStateT<R>& s, const ZMatrixT<R>& Z,
              const ControlPairT<R>& ctrl, double d, const ModelParams& pr) {
  const auto rates = investor_intensities(ctrl.mu_p, ctrl.mu_q, d, pr);
  const R dg_a = delta_g(i, s, JumpKind::BuyerArrival, pr);
  const R dg_b = delta_g(i, s, JumpKind::SellerArrival, pr);
  const R dg_p = delta_g(i, s, JumpKind::MakerP, pr);
  const R dg_q = delta_g(i, s, JumpKind::MakerQ, pr);
  const R& own_lam = (i == Maker::p) ? ctrl.lam_p : ctrl.lam_q;
  const R dev = own_lam - pr.lambda0;

  return dg_a * rates.rate_a + dg_b * rates.rate_b + dg_p * ctrl.lam_p + dg_q * ctrl.lam_q -
         0.5 * (dev * dev) -
         Z(1, i) * (pr.lambda0 - rates.rate_a) - Z(2, i) * (pr.lambda0 - rates.rate_b) -
         Z(4, i) * (pr.lambda0 - ctrl.lam_p) - Z(6, i) * (pr.lambda0 - ctrl.lam_q) -
         (ctrl.mu_p / pr.sigma) * Z(5, i) - (ctrl.mu_q / pr.sigma) * Z(7, i);
}

// One-step jump/Brownian realizations shared between the state update and
// the Y update. The Brownian increments are those of the simulated
// (controlled-measure) motions.
struct StepDraws {
  double dW = 0.0;    // efficient-price Brownian increment
  double dWp = 0.0;   // maker p price Brownian increment
  double dWq = 0.0;   // maker q price Brownian increment
  bool jump_a = false;
  bool jump_b = false;
  bool jump_p = false;
  bool jump_q = false;
};

// Y update with precomputed generator values. The contract identity
// V0 = R0 + Y0 requires Y's Brownian integrals taken against the simulated
// increments with no spread drift in Y's own dynamics, so the mu z / sigma
// terms of F cancel out of the update:
//   dY = sum_k z_k (dN_k - lambda0 dt) + z3 dW + z5 dW^p + z7 dW^q
//        - (F + (mu_p/sigma) z5 + (mu_q/sigma) z7) dt.
template <class R>
YPairT<R> step_Y(const YPairT<R>& Y, const MarketStateT<R>& s, const ZMatrixT<R>& Z,
                 const ControlPairT<R>& ctrl, const StepDraws& dr, double dt, double d,
                 const ModelParams& pr, const R* F_p = nullptr, const R* F_q = nullptr) {
  const double ia = dr.jump_a ? 1.0 : 0.0;
  const double ib = dr.jump_b ? 1.0 : 0.0;
  const double ip = dr.jump_p ? 1.0 : 0.0;
  const double iq = dr.jump_q ? 1.0 : 0.0;
  const double comp = pr.lambda0 * dt;

  YPairT<R> out;
  for (Maker i : {Maker::p, Maker::q}) {
    const R* given = (i == Maker::p) ? F_p : F_q;
    const R F = given ? *given : generator_F(i, s, Z, ctrl, d, pr);
    const R drift = F + (ctrl.mu_p / pr.sigma) * Z(5, i) + (ctrl.mu_q / pr.sigma) * Z(7, i);
    const R dy = Z(1, i) * (ia - comp) + Z(2, i) * (ib - comp) + Z(4, i) * (ip - comp) +
                 Z(6, i) * (iq - comp) + Z(3, i) * dr.dW + Z(5, i) * dr.dWp +
                 Z(7, i) * dr.dWq - drift * dt;
    if (i == Maker::p) {
      out.p = Y.p + dy;
    } else {
      out.q = Y.q + dy;
    }
  }
  return out;
}

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

// Exchange-side summary of one simulated batch under the saturated
// convention: xi^i = R0_i + Y^i_T with Y started at zero.
struct RebateReport {
  int m = 0;
  int n_failed = 0;
  bool fallback_used = false;   // zero-spread fallback engaged on some step
  bool penalty_active = false;  // estimated V0 below R0 for either maker
  Estimate xi_p, xi_q;          // mean rebate per maker
  Estimate V0_p, V0_q;          // maker value estimates
  Estimate spread_sq;           // E |P^cl_T - P*_T|^2
  Estimate fee_revenue;         // d * E[X1_T + X2_T]
  Estimate rho;                 // exchange objective
};

}  // namespace alab
