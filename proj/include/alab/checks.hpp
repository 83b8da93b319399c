#pragma once

// Oracle and property suites behind the acceptance binary and the CLI
// `verify` subcommand. The oracles here re-derive quantities from first
// principles (explicit order lists, bisection, finite differences) and never
// call the closed forms they are checking.

#include <string>
#include <vector>

#include "alab/nash_check.hpp"
#include "alab/rng.hpp"
#include "alab/sweep.hpp"

namespace alab::checks {

// Ground-truth market snapshot: an explicit list of executed maker orders
// and surviving investor volumes. The aggregated MarketState is derived from
// it; supply/demand and payoffs are evaluated by direct summation.
struct OrderList {
  std::vector<double> p_prices;
  std::vector<double> q_prices;
  double buy_volume = 0.0;
  double sell_volume = 0.0;
  double pstar = 0.0;
  double quote_p = 0.0;
  double quote_q = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double t = 0.0;

  MarketState to_state() const;
  // LM_T(x) + MO_T summed over the explicit orders.
  double lm_mo(double x, const ModelParams& pr) const;
  // Root of lm_mo by bisection (the supply/demand curve is strictly
  // decreasing in x).
  double bisect_clearing(const ModelParams& pr, double tol = 1e-12) const;
  // Payoff accumulated order by order at clearing price pcl.
  double pathwise_payoff(Maker i, double pcl, const ModelParams& pr) const;
};

OrderList random_order_list(PathRng& rng, const ModelParams& pr, bool mirrored);

// Bisection root of the spread first-order condition
// -zt/sigma - c*A/g + c*B*g = 0 on an expanding bracket inside (1e-8, 1e8).
double bisect_gamma(double A, double B, double zt, double sigma, double c);

// Random tied Z matrix; when `valid_at` is non-null, resampled until the
// spread condition holds at that state.
ZMatrix random_tied_z(PathRng& rng, const MarketState* valid_at, const ModelParams& pr);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

CheckResult criterion_1_clearing_oracle();
CheckResult criterion_2_best_response();
CheckResult criterion_3_gamma_root();
CheckResult criterion_4_martingale_contract();
CheckResult criterion_5_gradient_check();
CheckResult criterion_6_training_progress();

struct SweepArtifacts {
  ModelParams params;
  SweepResult sweep;
  BaselineComparison comparison;
  bool ok = false;
  std::string error;
};

// Shared by criteria 7 and 8: one fee sweep with per-point training plus the
// baseline comparison at the selected fee.
SweepArtifacts run_acceptance_sweep();

CheckResult criterion_7_fee_sweep(const SweepArtifacts& art);
CheckResult criterion_8_efficiency(const SweepArtifacts& art);
CheckResult criterion_9_determinism();

// quick = oracles and determinism only; full adds the Monte Carlo and
// training criteria.
std::vector<CheckResult> run_quick();
std::vector<CheckResult> run_full();

}  // namespace alab::checks
