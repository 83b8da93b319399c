#pragma once

// Deep-BSDE style training of the rebate policy: simulate a batch under the
// current network, evaluate the exchange loss at the terminal states, and
// backpropagate through the continuous dependencies (controls, drifts,
// compensators, prices) with jump realizations frozen per iteration.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "alab/network.hpp"
#include "alab/sim.hpp"

namespace alab {

struct TrainingDiverged : std::runtime_error {
  explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

struct TrainConfig {
  double learning_rate = 5e-4;  // paper menu: 1e-3 .. 1e-5
  int iterations = 200;
  int batch_m = 256;
  double epsilon = 1.0;  // reservation-penalty weight
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int threads = 0;  // 0 = hardware default
};

// Loss of one simulated batch:
//   mean(|P^cl - P*|^2 + Y^p_T + Y^q_T - d (X1 + X2))
//   + sum_i epsilon * max(-(mean(g^i + Y^i_T - penalty_i)), 0)
// Failed paths contribute a large finite constant to the first term and are
// excluded from the reservation means.
inline constexpr double kEquilibriumFailurePenalty = 1e6;

struct LossParts {
  double loss = 0.0;
  double main_mean = 0.0;   // exchange term, rho minus the R0 constants
  double v0_gap_p = 0.0;    // mean(g^p + Y^p_T - pen_p) = V0_p - R0_p
  double v0_gap_q = 0.0;
  bool penalty_p_active = false;
  bool penalty_q_active = false;
  int n_failed = 0;
};

LossParts loss_from_batch(const PathBatch& batch, double d, double epsilon);

struct GradEval {
  double loss = 0.0;
  std::vector<double> grad;  // kNetParams
  int n_failed = 0;
};

// Loss at the given weights under the iteration's frozen randomness.
// `replay`/`record` carry per-path jump-indicator buffers so finite
// differences can probe the same pathwise function the tape differentiates.
double loss_value(const std::vector<double>& weights, const ModelParams& pr,
                  const TrainConfig& cfg, std::uint64_t iter_seed,
                  const std::vector<std::vector<std::uint8_t>>* replay = nullptr,
                  std::vector<std::vector<std::uint8_t>>* record = nullptr,
                  LossParts* parts = nullptr);

// Reverse-mode loss gradient for every weight at the same frozen randomness.
GradEval loss_and_gradient(const std::vector<double>& weights, const ModelParams& pr,
                           const TrainConfig& cfg, std::uint64_t iter_seed);

struct TrainResult {
  PolicyNetwork net;
  std::vector<double> loss_history;   // one entry per iteration
  std::vector<int> failed_per_iter;   // equilibrium failures per iteration
  long total_failed_paths = 0;
};

TrainResult train(const ModelParams& pr, const TrainConfig& cfg);

}  // namespace alab
