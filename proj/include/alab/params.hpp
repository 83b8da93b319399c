#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace alab {

// Market, penalty and numerics constants for one auction experiment.
// Asymmetric demand slopes are kept even though the reference runs set
// K0 = Kp = Kq; formulas downstream treat them as distinct.
struct ModelParams {
  double T = 10.0;            // auction duration
  int n_steps = 50;           // Euler steps per path
  double K0 = 1.0;            // block-trade demand slope
  double Kp = 1.0;            // maker p demand slope
  double Kq = 1.0;            // maker q demand slope
  double P0_star = 184.39;    // initial efficient price
  double sigma = 1.76;        // efficient-price volatility
  double lambda0 = 100.0;     // anchor arrival intensity
  double lambda_inf = 200.0;  // maker intensity cap
  double mu_inf = 60.0;       // spread cap
  double c = 0.1;             // investor-intensity spread sensitivity
  double v_a = 1.0;           // buy order size
  double v_b = 1.0;           // sell order size
  double d = 0.0;             // flat transaction fee per investor order
  double epsilon = 1.0;       // reservation-penalty weight
  double R0_p = 100.0 - 35000.0;  // maker p reservation utility
  double R0_q = 100.0 - 35000.0;  // maker q reservation utility
  std::uint64_t rng_seed = 1;

  double dt() const { return T / static_cast<double>(n_steps); }

  // Hard errors make the parameter set unusable. Warnings flag regimes where
  // lambda*dt exceeds 1 and the per-step jump probability is clamped, so the
  // one-jump-per-step scheme undercounts arrivals.
  std::vector<std::string> errors() const;
  std::vector<std::string> warnings() const;
  void require_valid() const;  // throws std::invalid_argument on errors()

  static ModelParams apple();
  static ModelParams alphabet();
};

}  // namespace alab
