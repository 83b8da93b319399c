#include <doctest.h>

#include <cmath>

#include "alab/train.hpp"

using namespace alab;

namespace {

ModelParams test_params() {
  ModelParams p;
  p.T = 1.0;
  p.n_steps = 20;
  p.lambda0 = 4.0;
  p.lambda_inf = 8.0;
  p.mu_inf = 5.0;
  p.P0_star = 100.0;
  p.sigma = 1.0;
  p.c = 0.1;
  p.R0_p = 0.0;
  p.R0_q = 0.0;
  return p;
}

PathBatch two_path_batch() {
  PathBatch b;
  b.m = 2;
  PathTerminal a;
  a.pcl_T = 102.0;
  a.pstar_T = 100.0;
  a.y_p_T = 1.0;
  a.y_q_T = -0.5;
  a.x1_T = 3.0;
  a.x2_T = 1.0;
  a.g_p_T = 2.0;
  a.g_q_T = 0.5;
  a.pen_p = 0.1;
  a.pen_q = 0.2;
  PathTerminal c;
  c.pcl_T = 99.0;
  c.pstar_T = 100.5;
  c.y_p_T = -2.0;
  c.y_q_T = 0.25;
  c.x1_T = 0.0;
  c.x2_T = 2.0;
  c.g_p_T = -1.0;
  c.g_q_T = 1.5;
  c.pen_p = 0.3;
  c.pen_q = 0.05;
  b.paths = {a, c};
  return b;
}

}  // namespace

TEST_CASE("two-path loss equals the hand computation") {
  const PathBatch b = two_path_batch();
  const double d = 0.5;
  // main terms
  const double m1 = 4.0 + 1.0 - 0.5 - d * 4.0;
  const double m2 = 2.25 - 2.0 + 0.25 - d * 2.0;
  // reservation gaps
  const double vp = ((2.0 + 1.0 - 0.1) + (-1.0 - 2.0 - 0.3)) / 2.0;
  const double vq = ((0.5 - 0.5 - 0.2) + (1.5 + 0.25 - 0.05)) / 2.0;
  const double eps = 2.0;
  const double want = (m1 + m2) / 2.0 + eps * std::max(-vp, 0.0) + eps * std::max(-vq, 0.0);

  const LossParts lp = loss_from_batch(b, d, eps);
  CHECK(lp.loss == doctest::Approx(want).epsilon(1e-14));
  CHECK(lp.penalty_p_active == (vp < 0.0));
  CHECK(lp.penalty_q_active == (vq < 0.0));
}

TEST_CASE("reservation penalty vanishes when both makers clear R0") {
  PathBatch b = two_path_batch();
  for (auto& p : b.paths) {
    p.g_p_T = 10.0;
    p.g_q_T = 10.0;
  }
  const LossParts lp = loss_from_batch(b, 0.0, 3.0);
  CHECK(!lp.penalty_p_active);
  CHECK(!lp.penalty_q_active);
  CHECK(lp.loss == doctest::Approx(lp.main_mean));
}

TEST_CASE("epsilon zero reduces the loss to the exchange term") {
  const PathBatch b = two_path_batch();
  const LossParts lp = loss_from_batch(b, 1.0, 0.0);
  CHECK(lp.loss == doctest::Approx(lp.main_mean));
}

TEST_CASE("failed paths contribute the fixed penalty to the exchange term") {
  PathBatch b = two_path_batch();
  b.paths[1].failed = 1;
  b.n_failed = 1;
  const LossParts lp = loss_from_batch(b, 0.0, 0.0);
  const double m1 = 4.0 + 1.0 - 0.5;
  CHECK(lp.loss == doctest::Approx((m1 + kEquilibriumFailurePenalty) / 2.0));
  CHECK(lp.n_failed == 1);
}

TEST_CASE("zero iterations return the freshly initialized network") {
  ModelParams pr = test_params();
  TrainConfig cfg;
  cfg.iterations = 0;
  cfg.seed = 99;
  const TrainResult tr = train(pr, cfg);
  const PolicyNetwork init =
      PolicyNetwork::uniform_init(substream_seed(cfg.seed, kStreamWeightInit, 0));
  CHECK(tr.loss_history.empty());
  REQUIRE(tr.net.w.size() == init.w.size());
  for (std::size_t i = 0; i < init.w.size(); ++i) CHECK(tr.net.w[i] == init.w[i]);
}

TEST_CASE("training is deterministic for a fixed seed") {
  ModelParams pr = test_params();
  TrainConfig cfg;
  cfg.iterations = 5;
  cfg.batch_m = 16;
  cfg.learning_rate = 1e-3;
  cfg.seed = 4242;
  cfg.threads = 2;
  const TrainResult a = train(pr, cfg);
  cfg.threads = 1;  // thread count must not matter
  const TrainResult b = train(pr, cfg);
  REQUIRE(a.loss_history.size() == b.loss_history.size());
  for (std::size_t i = 0; i < a.loss_history.size(); ++i) {
    CHECK(a.loss_history[i] == b.loss_history[i]);
  }
  for (std::size_t i = 0; i < a.net.w.size(); ++i) CHECK(a.net.w[i] == b.net.w[i]);
}

TEST_CASE("loss value is reproducible and replay freezes the jumps") {
  ModelParams pr = test_params();
  TrainConfig cfg;
  cfg.batch_m = 8;
  cfg.seed = 7;
  const PolicyNetwork net =
      PolicyNetwork::uniform_init(substream_seed(cfg.seed, kStreamWeightInit, 0));
  const std::uint64_t iter_seed = substream_seed(cfg.seed, kStreamTrainIter, 0);

  std::vector<std::vector<std::uint8_t>> ind;
  const double l1 = loss_value(net.w, pr, cfg, iter_seed, nullptr, &ind);
  const double l2 = loss_value(net.w, pr, cfg, iter_seed, &ind);
  const double l3 = loss_value(net.w, pr, cfg, iter_seed);
  CHECK(l1 == l2);
  CHECK(l1 == l3);
}

TEST_CASE("gradients are nonzero and finite on the training configuration") {
  ModelParams pr = test_params();
  TrainConfig cfg;
  cfg.batch_m = 8;
  cfg.seed = 7;
  const PolicyNetwork net =
      PolicyNetwork::uniform_init(substream_seed(cfg.seed, kStreamWeightInit, 0));
  const GradEval ge =
      loss_and_gradient(net.w, pr, cfg, substream_seed(cfg.seed, kStreamTrainIter, 0));
  CHECK(std::isfinite(ge.loss));
  double norm = 0.0;
  for (const double g : ge.grad) {
    CHECK(std::isfinite(g));
    norm += g * g;
  }
  CHECK(norm > 0.0);
}
