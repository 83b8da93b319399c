#pragma once

// Outer search over the flat transaction fee: train a policy per grid point,
// evaluate the exchange objective on a fresh batch, and locate the grid
// minimizer. Also produces the zero-contract baseline comparison.

#include <optional>
#include <string>
#include <vector>

#include "alab/train.hpp"

namespace alab {

struct SweepPoint {
  double d = 0.0;
  bool failed = false;  // training diverged at this grid point
  Estimate rho;
  Estimate spread_sq;
  Estimate fee_revenue;
  bool penalty_active = false;
  int eval_failed_paths = 0;
  long train_failed_paths = 0;
  double final_loss = 0.0;
  PolicyNetwork net;
  std::vector<double> loss_history;
  std::vector<int> failed_per_iter;
  std::string checkpoint;  // file path when persisted by the driver
};

struct SweepResult {
  std::vector<SweepPoint> points;  // ordered by d
  int argmin = -1;                 // index into points, -1 if all failed
  bool argmin_interior = false;
  std::uint64_t seed = 0;
  int eval_m = 0;
};

inline std::vector<double> default_fee_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 12; ++i) g.push_back(0.5 * i);
  return g;
}

// Per-d training runs from scratch with a shared weight-init seed; each
// evaluation uses an independent seed stream and m >= the training batch.
SweepResult sweep_fee(const std::vector<double>& grid, const TrainConfig& train_budget,
                      int eval_m, std::uint64_t seed, const ModelParams& params);

// Zero-contract baseline (d = 0, Z = 0, no-spread fallback where the spread
// condition fails) against the trained policy at d_hat, on common seeds.
struct BaselineComparison {
  RebateReport no_incentive;
  RebateReport with_incentive;
  double d_hat = 0.0;
};

BaselineComparison baseline_comparison(const ModelParams& params, int m, std::uint64_t seed,
                                       const PolicyNetwork& trained, double d_hat);

PolicyFn make_network_policy(const PolicyNetwork& net, const ModelParams& params);

}  // namespace alab
