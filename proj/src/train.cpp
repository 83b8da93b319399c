#include "alab/train.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "alab/ad.hpp"

namespace alab {

namespace {

int resolve_threads(int requested, int m) {
  int t = requested;
  if (t <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    t = hw ? static_cast<int>(hw) : 1;
  }
  return std::max(1, std::min({t, m, 16}));
}

struct PathLossTerms {
  double main = 0.0;   // |P^cl - P*|^2 + Y^p + Y^q - d (X1 + X2)
  double v0_p = 0.0;   // g^p + Y^p - pen_p
  double v0_q = 0.0;
  bool failed = false;
};

LossParts assemble_loss(const std::vector<PathLossTerms>& terms, double epsilon) {
  LossParts out;
  const int m = static_cast<int>(terms.size());
  double main_sum = 0.0, vp_sum = 0.0, vq_sum = 0.0;
  for (const auto& t : terms) {
    if (t.failed) {
      main_sum += kEquilibriumFailurePenalty;
      ++out.n_failed;
      continue;
    }
    main_sum += t.main;
    vp_sum += t.v0_p;
    vq_sum += t.v0_q;
  }
  const int ok = m - out.n_failed;
  out.main_mean = main_sum / m;
  out.v0_gap_p = ok > 0 ? vp_sum / ok : 0.0;
  out.v0_gap_q = ok > 0 ? vq_sum / ok : 0.0;
  out.penalty_p_active = out.v0_gap_p < 0.0;
  out.penalty_q_active = out.v0_gap_q < 0.0;
  out.loss = out.main_mean + epsilon * std::max(-out.v0_gap_p, 0.0) +
             epsilon * std::max(-out.v0_gap_q, 0.0);
  return out;
}

template <class R>
PathLossTerms path_terms(const PathOutcome<R>& o, double d) {
  PathLossTerms t;
  if (o.failed) {
    t.failed = true;
    return t;
  }
  const double gap = value_of(o.pcl) - o.state.x3;
  t.main = gap * gap + value_of(o.Y.p) + value_of(o.Y.q) - d * (o.state.x1 + o.state.x2);
  t.v0_p = value_of(o.g_p) + value_of(o.Y.p) - value_of(o.pen_p);
  t.v0_q = value_of(o.g_q) + value_of(o.Y.q) - value_of(o.pen_q);
  return t;
}

}  // namespace

LossParts loss_from_batch(const PathBatch& batch, double d, double epsilon) {
  std::vector<PathLossTerms> terms(batch.paths.size());
  for (std::size_t k = 0; k < batch.paths.size(); ++k) {
    const auto& p = batch.paths[k];
    if (p.failed) {
      terms[k].failed = true;
      continue;
    }
    const double gap = p.pcl_T - p.pstar_T;
    terms[k].main = gap * gap + p.y_p_T + p.y_q_T - d * (p.x1_T + p.x2_T);
    terms[k].v0_p = p.g_p_T + p.y_p_T - p.pen_p;
    terms[k].v0_q = p.g_q_T + p.y_q_T - p.pen_q;
  }
  return assemble_loss(terms, epsilon);
}

double loss_value(const std::vector<double>& weights, const ModelParams& pr,
                  const TrainConfig& cfg, std::uint64_t iter_seed,
                  const std::vector<std::vector<std::uint8_t>>* replay,
                  std::vector<std::vector<std::uint8_t>>* record, LossParts* parts) {
  const FeatureScaler scaler = FeatureScaler::from_params(pr);
  NetworkPolicy<double> policy{weights.data(), scaler};
  if (record) record->assign(cfg.batch_m, {});

  std::vector<PathLossTerms> terms(cfg.batch_m);
  for (int k = 0; k < cfg.batch_m; ++k) {
    PathRng rng(substream_seed(iter_seed, kStreamPath, static_cast<std::uint64_t>(k)));
    SimOptions opt;
    opt.eq = EquilibriumHandling::Penalize;
    if (replay) opt.replay_indicators = &(*replay)[k];
    if (record) opt.record_indicators = &(*record)[k];
    const auto outcome = simulate_path<double>(policy, pr, rng, opt, nullptr, k);
    terms[k] = path_terms(outcome, pr.d);
  }
  const LossParts lp = assemble_loss(terms, cfg.epsilon);
  if (parts) *parts = lp;
  return lp.loss;
}

GradEval loss_and_gradient(const std::vector<double>& weights, const ModelParams& pr,
                           const TrainConfig& cfg, std::uint64_t iter_seed) {
  // Plain pass fixes the loss value and which reservation penalties are
  // active; the per-path tape pass then only needs one backward sweep each.
  LossParts parts;
  const double loss = loss_value(weights, pr, cfg, iter_seed, nullptr, nullptr, &parts);

  const int m = cfg.batch_m;
  const int ok = m - parts.n_failed;
  const double w_main = 1.0 / m;
  const double w_p = (parts.penalty_p_active && ok > 0) ? -cfg.epsilon / ok : 0.0;
  const double w_q = (parts.penalty_q_active && ok > 0) ? -cfg.epsilon / ok : 0.0;

  const FeatureScaler scaler = FeatureScaler::from_params(pr);
  std::vector<std::vector<double>> path_grads(m);

  auto run_range = [&](int worker, int stride) {
    ad::Tape tape;
    tape.reserve(1u << 16);
    std::vector<double> adj;
    std::vector<ad::Var> wvars(weights.size());
    for (int k = worker; k < m; k += stride) {
      tape.clear();
      ad::TapeScope scope(tape);
      for (std::size_t j = 0; j < weights.size(); ++j) wvars[j] = ad::Var::leaf(weights[j]);
      NetworkPolicy<ad::Var> policy{wvars.data(), scaler};

      PathRng rng(substream_seed(iter_seed, kStreamPath, static_cast<std::uint64_t>(k)));
      SimOptions opt;
      opt.eq = EquilibriumHandling::Penalize;
      const auto o = simulate_path<ad::Var>(policy, pr, rng, opt, nullptr, k);
      if (o.failed) continue;  // constant penalty, zero gradient

      const ad::Var gap = o.pcl - o.state.x3;
      const ad::Var main = gap * gap + o.Y.p + o.Y.q - pr.d * (o.state.x1 + o.state.x2);
      const ad::Var v0p = o.g_p + o.Y.p - o.pen_p;
      const ad::Var v0q = o.g_q + o.Y.q - o.pen_q;
      const ad::Var score = w_main * main + w_p * v0p + w_q * v0q;
      if (!score.on_tape()) continue;

      tape.backward(score.node(), adj);
      auto& g = path_grads[k];
      g.resize(weights.size());
      for (std::size_t j = 0; j < weights.size(); ++j) g[j] = adj[wvars[j].node()];
    }
  };

  const int nthreads = resolve_threads(cfg.threads, m);
  if (nthreads == 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(run_range, w, nthreads);
    for (auto& th : pool) th.join();
  }

  GradEval out;
  out.loss = loss;
  out.n_failed = parts.n_failed;
  out.grad.assign(weights.size(), 0.0);
  for (int k = 0; k < m; ++k) {  // fixed path order
    if (path_grads[k].empty()) continue;
    for (std::size_t j = 0; j < weights.size(); ++j) out.grad[j] += path_grads[k][j];
  }
  return out;
}

TrainResult train(const ModelParams& pr, const TrainConfig& cfg) {
  TrainResult res;
  res.net = PolicyNetwork::uniform_init(substream_seed(cfg.seed, kStreamWeightInit, 0));
  if (cfg.iterations <= 0) return res;

  std::vector<double> m1(res.net.w.size(), 0.0), m2(res.net.w.size(), 0.0);
  res.loss_history.reserve(cfg.iterations);
  res.failed_per_iter.reserve(cfg.iterations);

  for (int it = 0; it < cfg.iterations; ++it) {
    const std::uint64_t iter_seed = substream_seed(cfg.seed, kStreamTrainIter, it);
    const GradEval ge = loss_and_gradient(res.net.w, pr, cfg, iter_seed);
    if (!std::isfinite(ge.loss)) {
      throw TrainingDiverged("non-finite loss at iteration " + std::to_string(it));
    }
    res.loss_history.push_back(ge.loss);
    res.failed_per_iter.push_back(ge.n_failed);
    res.total_failed_paths += ge.n_failed;

    const double b1t = 1.0 - std::pow(cfg.adam_beta1, it + 1);
    const double b2t = 1.0 - std::pow(cfg.adam_beta2, it + 1);
    for (std::size_t j = 0; j < res.net.w.size(); ++j) {
      m1[j] = cfg.adam_beta1 * m1[j] + (1.0 - cfg.adam_beta1) * ge.grad[j];
      m2[j] = cfg.adam_beta2 * m2[j] + (1.0 - cfg.adam_beta2) * ge.grad[j] * ge.grad[j];
      const double mhat = m1[j] / b1t;
      const double vhat = m2[j] / b2t;
      res.net.w[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
  return res;
}

}  // namespace alab
