#include "alab/sweep.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace alab {

PolicyFn make_network_policy(const PolicyNetwork& net, const ModelParams& params) {
  auto weights = std::make_shared<std::vector<double>>(net.w);
  const FeatureScaler scaler = FeatureScaler::from_params(params);
  return [weights, scaler](double t, const MarketState& s, const YPair& y) {
    NetworkPolicy<double> p{weights->data(), scaler};
    return p(t, s, y);
  };
}

SweepResult sweep_fee(const std::vector<double>& grid, const TrainConfig& train_budget,
                      int eval_m, std::uint64_t seed, const ModelParams& params) {
  if (grid.empty()) throw std::invalid_argument("sweep_fee: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("sweep_fee: grid must be sorted");
  }

  SweepResult res;
  res.seed = seed;
  res.eval_m = std::max(eval_m, train_budget.batch_m);
  res.points.reserve(grid.size());

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    SweepPoint pt;
    pt.d = grid[gi];

    ModelParams pr = params;
    pr.d = pt.d;
    TrainConfig cfg = train_budget;
    cfg.seed = seed;  // shared init across grid points keeps them comparable

    try {
      TrainResult tr = train(pr, cfg);
      pt.net = tr.net;
      pt.train_failed_paths = tr.total_failed_paths;
      pt.final_loss = tr.loss_history.empty() ? 0.0 : tr.loss_history.back();
      pt.loss_history = std::move(tr.loss_history);
      pt.failed_per_iter = std::move(tr.failed_per_iter);

      SimOptions opt;
      opt.eq = EquilibriumHandling::Penalize;
      const std::uint64_t eval_seed = substream_seed(seed, kStreamEval, gi);
      const PathBatch batch = simulate_batch(make_network_policy(pt.net, pr), pr, res.eval_m,
                                             eval_seed, false, opt, train_budget.threads);
      const RebateReport rep = exchange_objective(batch, pr.d, pr);
      pt.rho = rep.rho;
      pt.spread_sq = rep.spread_sq;
      pt.fee_revenue = rep.fee_revenue;
      pt.penalty_active = rep.penalty_active;
      pt.eval_failed_paths = rep.n_failed;
    } catch (const TrainingDiverged&) {
      pt.failed = true;
    }
    res.points.push_back(std::move(pt));
  }

  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const auto& pt = res.points[i];
    if (pt.failed) continue;
    if (res.argmin < 0 || pt.rho.mean < res.points[res.argmin].rho.mean) {
      res.argmin = static_cast<int>(i);
    }
  }
  res.argmin_interior =
      res.argmin > 0 && res.argmin + 1 < static_cast<int>(res.points.size());
  return res;
}

BaselineComparison baseline_comparison(const ModelParams& params, int m, std::uint64_t seed,
                                       const PolicyNetwork& trained, double d_hat) {
  BaselineComparison out;
  out.d_hat = d_hat;

  ModelParams base = params;
  base.d = 0.0;
  SimOptions base_opt;
  base_opt.eq = EquilibriumHandling::ZeroSpreadFallback;
  const std::uint64_t eval_seed = substream_seed(seed, kStreamEval, 0xBA5Eu);
  const PathBatch base_batch =
      simulate_batch(zero_policy(), base, m, eval_seed, false, base_opt);
  out.no_incentive = exchange_objective(base_batch, base.d, base);

  ModelParams tuned = params;
  tuned.d = d_hat;
  SimOptions opt;
  opt.eq = EquilibriumHandling::Penalize;
  const PathBatch tuned_batch =
      simulate_batch(make_network_policy(trained, tuned), tuned, m, eval_seed, false, opt);
  out.with_incentive = exchange_objective(tuned_batch, tuned.d, tuned);
  return out;
}

}  // namespace alab
