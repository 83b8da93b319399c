#include "alab/nash_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace alab {

namespace {

// F^i as a function of maker i's own controls, opponent fixed.
double F_of(Maker i, const MarketState& s, const ZMatrix& Z, const ControlPair& base,
            double mu, double lam, double d, const ModelParams& pr) {
  ControlPair ctrl = base;
  if (i == Maker::p) {
    ctrl.mu_p = mu;
    ctrl.lam_p = lam;
  } else {
    ctrl.mu_q = mu;
    ctrl.lam_q = lam;
  }
  return generator_F(i, s, Z, ctrl, d, pr);
}

// Candidate interior stationary points of maker i's spread objective with
// the opponent's spread fixed: roots of the gamma quadratic in
// u = e^{c (mu^i + mu^j)} built from i's own increments.
void interior_mu_candidates(Maker i, const MarketState& s, const ZMatrix& Z,
                            double mu_opponent, const ModelParams& pr,
                            std::vector<double>& out) {
  if (pr.c <= 0.0) return;
  const double dg1 = delta_g(i, s, JumpKind::BuyerArrival, pr);
  const double dg2 = delta_g(i, s, JumpKind::SellerArrival, pr);
  const double z1 = Z(1, i), z2 = Z(2, i);
  const double z_own_brownian = (i == Maker::p) ? Z(5, Maker::p) : Z(7, Maker::q);
  const double scale = pr.lambda0 * std::exp(-pr.d);
  if (scale <= 0.0) return;

  // c*B*u^2 - (zt/sigma)*u - c*A = 0 with A = dg1+z1, B = dg2+z2
  const double a = pr.c * (dg2 + z2);
  const double b = -(z_own_brownian / scale) / pr.sigma;
  const double e = -pr.c * (dg1 + z1);
  auto push = [&](double u) {
    if (u > 0.0 && std::isfinite(u)) out.push_back(std::log(u) / pr.c - mu_opponent);
  };
  if (a == 0.0) {
    if (b != 0.0) push(-e / b);
    return;
  }
  const double disc = b * b - 4.0 * a * e;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  const double q = (b >= 0.0) ? -(b + sq) * 0.5 : -(b - sq) * 0.5;
  push(q / a);
  if (q != 0.0) push(e / q);
}

}  // namespace

bool verify_nash(const MarketState& s, const ZMatrix& Z, const ControlPair& ctrl,
                 const ModelParams& pr, double mu_grid_step, double tol,
                 double lam_grid_step, double* worst_improvement) {
  if (lam_grid_step <= 0.0) lam_grid_step = 10.0 * mu_grid_step;
  double worst = 0.0;

  for (Maker i : {Maker::p, Maker::q}) {
    const double mu_hat = (i == Maker::p) ? ctrl.mu_p : ctrl.mu_q;
    const double lam_hat = (i == Maker::p) ? ctrl.lam_p : ctrl.lam_q;
    const double f_hat = F_of(i, s, Z, ctrl, mu_hat, lam_hat, pr.d, pr);

    double best_mu = f_hat;
    const long n_mu = std::lround(2.0 * pr.mu_inf / mu_grid_step);
    for (long k = 0; k <= n_mu; ++k) {
      const double mu = -pr.mu_inf + k * mu_grid_step;
      best_mu = std::max(best_mu, F_of(i, s, Z, ctrl, mu, lam_hat, pr.d, pr));
    }
    double best_lam = f_hat;
    const long n_lam = std::lround(pr.lambda_inf / lam_grid_step);
    for (long k = 0; k <= n_lam; ++k) {
      const double lam = k * lam_grid_step;
      best_lam = std::max(best_lam, F_of(i, s, Z, ctrl, mu_hat, lam, pr.d, pr));
    }
    // additive separation: joint grid max = best_mu + best_lam - f_hat
    const double improvement = (best_mu - f_hat) + (best_lam - f_hat);
    worst = std::max(worst, improvement);
  }
  if (worst_improvement) *worst_improvement = worst;
  return worst <= tol;
}

ControlPair solve_nash_general(const MarketState& s, const ZMatrix& Z, const ModelParams& pr,
                               int max_iters, double tol, double damping) {
  ControlPair ctrl;
  ctrl.lam_p = best_response_lambda(Maker::p, s, Z(4, Maker::p), pr, &ctrl.lam_p_clipped);
  ctrl.lam_q = best_response_lambda(Maker::q, s, Z(6, Maker::q), pr, &ctrl.lam_q_clipped);

  auto best_mu = [&](Maker i, double mu_opponent) {
    std::vector<double> candidates{-pr.mu_inf, pr.mu_inf};
    interior_mu_candidates(i, s, Z, mu_opponent, pr, candidates);
    double best = -pr.mu_inf;
    double best_f = -std::numeric_limits<double>::infinity();
    const double lam_hat = (i == Maker::p) ? ctrl.lam_p : ctrl.lam_q;
    for (double mu : candidates) {
      mu = std::clamp(mu, -pr.mu_inf, pr.mu_inf);
      ControlPair probe = ctrl;
      if (i == Maker::p) probe.mu_q = mu_opponent;
      else probe.mu_p = mu_opponent;
      const double f = F_of(i, s, Z, probe, mu, lam_hat, pr.d, pr);
      if (f > best_f) {
        best_f = f;
        best = mu;
      }
    }
    return best;
  };

  for (int it = 0; it < max_iters; ++it) {
    const double next_p = best_mu(Maker::p, ctrl.mu_q);
    const double next_q = best_mu(Maker::q, ctrl.mu_p);
    const double new_p = (1.0 - damping) * ctrl.mu_p + damping * next_p;
    const double new_q = (1.0 - damping) * ctrl.mu_q + damping * next_q;
    const double delta = std::fabs(new_p - ctrl.mu_p) + std::fabs(new_q - ctrl.mu_q);
    ctrl.mu_p = new_p;
    ctrl.mu_q = new_q;
    if (delta < tol) return ctrl;
  }
  throw EquilibriumNotFound(0.0, 0.0);
}

}  // namespace alab
