#pragma once

// Time-discretized simulation of the controlled market. Each step draws its
// randomness in a fixed order, resolves the Nash controls at the left
// endpoint, thins each jump process with probability min(1, lambda*dt), and
// advances the market tuple, the prices and the rebate processes with the
// same realizations.

#include <cstdint>
#include <functional>
#include <vector>

#include "alab/contract.hpp"
#include "alab/rng.hpp"

namespace alab {

enum class EquilibriumHandling {
  Strict,            // propagate EquilibriumNotFound with path/step coordinates
  Penalize,          // mark the path failed; caller assigns a loss penalty
  ZeroSpreadFallback,  // zero-contract baseline: no-spread fallback when the
                       // spread condition fails
  ForcedReference,   // all intensities pinned to lambda0, zero spreads
};

struct SimOptions {
  EquilibriumHandling eq = EquilibriumHandling::Strict;
  bool record_trajectories = false;
  // Gradient-check support: replay previously recorded jump indicators
  // instead of re-thinning, so finite differences probe the same pathwise
  // function the tape differentiates. 4 bytes per step (a, b, p, q).
  const std::vector<std::uint8_t>* replay_indicators = nullptr;
  std::vector<std::uint8_t>* record_indicators = nullptr;
};

template <class R>
struct StepRecord {
  ZMatrixT<R> Z;
  ControlPairT<R> ctrl;
  InvestorRatesT<R> rates;
  R F_p{}, F_q{};
  StepDraws draws;
  double prob_a = 0.0, prob_b = 0.0, prob_p = 0.0, prob_q = 0.0;
};

// Advances (state, Y) by one step. The candidate order sizes r1, r2 are
// resolved from this step's cancellation marks before the policy query; all
// controls, intensities and F are evaluated at the pre-jump state.
template <class R, class Policy>
StepRecord<R> simulate_step(MarketStateT<R>& s, YPairT<R>& Y, Policy&& policy,
                            const ModelParams& pr, const StepRandomness& rnd,
                            const SimOptions& opt, int step_index = -1) {
  const double dt = pr.dt();
  const double surv = cancellation_survival(pr.T - s.t);
  s.r1 = (rnd.ma <= surv) ? pr.v_a : 0.0;
  s.r2 = (rnd.mb <= surv) ? pr.v_b : 0.0;

  StepRecord<R> rec;
  rec.Z = policy(s.t, s, Y);

  switch (opt.eq) {
    case EquilibriumHandling::Strict:
    case EquilibriumHandling::Penalize:
      rec.ctrl = nash_fixed_point(s, rec.Z, pr);
      break;
    case EquilibriumHandling::ZeroSpreadFallback:
      rec.ctrl = nash_or_zero_spread(s, rec.Z, pr);
      break;
    case EquilibriumHandling::ForcedReference: {
      rec.ctrl.lam_p = R(pr.lambda0);
      rec.ctrl.lam_q = R(pr.lambda0);
      break;
    }
  }

  if (opt.eq == EquilibriumHandling::ForcedReference) {
    rec.rates.rate_a = R(pr.lambda0);
    rec.rates.rate_b = R(pr.lambda0);
  } else {
    rec.rates = investor_intensities(rec.ctrl.mu_p, rec.ctrl.mu_q, pr.d, pr);
  }

  auto prob = [dt](double lam) { return lam * dt < 1.0 ? lam * dt : 1.0; };
  rec.prob_a = prob(value_of(rec.rates.rate_a));
  rec.prob_b = prob(value_of(rec.rates.rate_b));
  rec.prob_p = prob(value_of(rec.ctrl.lam_p));
  rec.prob_q = prob(value_of(rec.ctrl.lam_q));

  if (opt.replay_indicators) {
    const auto& buf = *opt.replay_indicators;
    const std::size_t base = static_cast<std::size_t>(step_index) * 4;
    if (step_index < 0 || base + 4 > buf.size()) {
      throw std::logic_error("indicator replay buffer shorter than the path");
    }
    rec.draws.jump_a = buf[base] != 0;
    rec.draws.jump_b = buf[base + 1] != 0;
    rec.draws.jump_p = buf[base + 2] != 0;
    rec.draws.jump_q = buf[base + 3] != 0;
  } else {
    rec.draws.jump_a = rnd.ua < rec.prob_a;
    rec.draws.jump_b = rnd.ub < rec.prob_b;
    rec.draws.jump_p = rnd.up < rec.prob_p;
    rec.draws.jump_q = rnd.uq < rec.prob_q;
  }
  if (opt.record_indicators) {
    opt.record_indicators->push_back(rec.draws.jump_a ? 1 : 0);
    opt.record_indicators->push_back(rec.draws.jump_b ? 1 : 0);
    opt.record_indicators->push_back(rec.draws.jump_p ? 1 : 0);
    opt.record_indicators->push_back(rec.draws.jump_q ? 1 : 0);
  }

  const double sdt = std::sqrt(dt);
  rec.draws.dW = sdt * rnd.gw;
  rec.draws.dWp = sdt * rnd.gp;
  rec.draws.dWq = sdt * rnd.gq;

  rec.F_p = generator_F(Maker::p, s, rec.Z, rec.ctrl, pr.d, pr);
  rec.F_q = generator_F(Maker::q, s, rec.Z, rec.ctrl, pr.d, pr);

  Y = step_Y(Y, s, rec.Z, rec.ctrl, rec.draws, dt, pr.d, pr, &rec.F_p, &rec.F_q);

  // jumps enter at left-endpoint quotes, then the prices move
  if (rec.draws.jump_a) s.x1 += s.r1;
  if (rec.draws.jump_b) s.x2 += s.r2;
  if (rec.draws.jump_p) {
    s.x4 += s.p_p;
    s.x5 += 1;
  }
  if (rec.draws.jump_q) {
    s.x6 += s.p_q;
    s.x7 += 1;
  }
  s.x3 += pr.sigma * rec.draws.dW;
  s.p_p += rec.ctrl.mu_p * dt + pr.sigma * rec.draws.dWp;
  s.p_q += rec.ctrl.mu_q * dt + pr.sigma * rec.draws.dWq;
  s.t += dt;
  return rec;
}

// Per-step column layout of the trajectory statistics.
enum TrajColumn {
  kTrajZ1 = 0, kTrajZ2, kTrajZ3, kTrajZ4, kTrajZ5, kTrajZ6, kTrajZ7,
  kTrajMuP, kTrajMuQ, kTrajLamP, kTrajLamQ, kTrajLamA, kTrajLamB,
  kTrajFP, kTrajFQ, kTrajNegIntFP, kTrajNegIntFQ, kTrajYP, kTrajYQ,
  kTrajColumns,
};

// Batch-mean trajectory accumulators, one row per step plus a terminal row.
// The terminal row extends the last step's controls flat and carries the
// final Y values.
struct TrajectoryStats {
  int n_rows = 0;
  long n_samples = 0;  // successful paths merged in
  std::vector<double> sum;    // n_rows * kTrajColumns
  std::vector<double> sumsq;  // n_rows * kTrajColumns

  void init(int rows) {
    n_rows = rows;
    n_samples = 0;
    sum.assign(static_cast<std::size_t>(rows) * kTrajColumns, 0.0);
    sumsq.assign(static_cast<std::size_t>(rows) * kTrajColumns, 0.0);
  }
  void merge_path(const std::vector<double>& rowbuf) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += rowbuf[i];
      sumsq[i] += rowbuf[i] * rowbuf[i];
    }
    ++n_samples;
  }
  double mean(int row, int col) const {
    return n_samples ? sum[static_cast<std::size_t>(row) * kTrajColumns + col] / n_samples : 0.0;
  }
  double se(int row, int col) const {
    if (n_samples < 2) return 0.0;
    const std::size_t i = static_cast<std::size_t>(row) * kTrajColumns + col;
    const double m = sum[i] / n_samples;
    double var = (sumsq[i] - n_samples * m * m) / (n_samples - 1);
    if (var < 0.0) var = 0.0;
    return std::sqrt(var / n_samples);
  }
};

struct PathTerminal {
  double pcl_T = 0.0, pstar_T = 0.0;
  double x1_T = 0.0, x2_T = 0.0;
  double y_p_T = 0.0, y_q_T = 0.0;
  double g_p_T = 0.0, g_q_T = 0.0;
  double pen_p = 0.0, pen_q = 0.0;
  // Compensated-martingale residual of Y's dynamics (diagnostic; zero mean
  // by construction when the drift gap is accounted with the simulated
  // intensities).
  double mart_p = 0.0, mart_q = 0.0;
  std::uint8_t failed = 0;
  int fail_step = -1;
};

struct BatchDiagnostics {
  long mu_clip_steps = 0;
  long lam_clip_steps = 0;
  long fallback_steps = 0;
};

struct PathBatch {
  int m = 0;
  int n_failed = 0;
  std::vector<PathTerminal> paths;
  BatchDiagnostics diag;
  bool has_traj = false;
  TrajectoryStats traj;
};

template <class R>
struct PathOutcome {
  MarketStateT<R> state;
  YPairT<R> Y;
  R pen_p{}, pen_q{};
  R pcl{}, g_p{}, g_q{};
  double mart_p = 0.0, mart_q = 0.0;
  bool failed = false;
  int fail_step = -1;
  BatchDiagnostics diag;
};

// Runs one full path. `rowbuf`, when non-null, receives kTrajColumns values
// per row (n_steps + 1 rows) for trajectory statistics.
template <class R, class Policy>
PathOutcome<R> simulate_path(Policy&& policy, const ModelParams& pr, PathRng& rng,
                             const SimOptions& opt, std::vector<double>* rowbuf = nullptr,
                             int path_index = -1) {
  const double dt = pr.dt();
  PathOutcome<R> out;
  out.state = MarketStateT<R>::initial(pr);
  if (rowbuf) rowbuf->assign(static_cast<std::size_t>(pr.n_steps + 1) * kTrajColumns, 0.0);

  double neg_int_fp = 0.0, neg_int_fq = 0.0;
  StepRecord<R> last{};
  for (int k = 0; k < pr.n_steps; ++k) {
    const StepRandomness rnd = rng.step_draws();
    const double y_p_pre = value_of(out.Y.p);
    const double y_q_pre = value_of(out.Y.q);
    StepRecord<R> rec;
    try {
      rec = simulate_step(out.state, out.Y, policy, pr, rnd, opt, k);
    } catch (const EquilibriumNotFound& e) {
      if (opt.eq == EquilibriumHandling::Strict) throw e.with_coordinates(path_index, k);
      out.failed = true;
      out.fail_step = k;
      return out;
    }

    out.pen_p += 0.5 * (rec.ctrl.lam_p - pr.lambda0) * (rec.ctrl.lam_p - pr.lambda0) * dt;
    out.pen_q += 0.5 * (rec.ctrl.lam_q - pr.lambda0) * (rec.ctrl.lam_q - pr.lambda0) * dt;
    if (rec.ctrl.mu_clipped) ++out.diag.mu_clip_steps;
    if (rec.ctrl.lam_p_clipped || rec.ctrl.lam_q_clipped) ++out.diag.lam_clip_steps;
    if (rec.ctrl.fallback) ++out.diag.fallback_steps;

    // martingale residual: compensated jumps against realized probabilities
    // plus the drift-free Brownian parts
    const double ia = rec.draws.jump_a ? 1.0 : 0.0;
    const double ib = rec.draws.jump_b ? 1.0 : 0.0;
    const double ip = rec.draws.jump_p ? 1.0 : 0.0;
    const double iq = rec.draws.jump_q ? 1.0 : 0.0;
    for (Maker i : {Maker::p, Maker::q}) {
      const double z1 = value_of(rec.Z(1, i)), z2 = value_of(rec.Z(2, i));
      const double z3 = value_of(rec.Z(3, i)), z4 = value_of(rec.Z(4, i));
      const double z5 = value_of(rec.Z(5, i)), z6 = value_of(rec.Z(6, i));
      const double z7 = value_of(rec.Z(7, i));
      const double res = z1 * (ia - rec.prob_a) + z2 * (ib - rec.prob_b) +
                         z4 * (ip - rec.prob_p) + z6 * (iq - rec.prob_q) +
                         z3 * rec.draws.dW + z5 * rec.draws.dWp + z7 * rec.draws.dWq;
      (i == Maker::p ? out.mart_p : out.mart_q) += res;
    }

    if (rowbuf) {
      double* row = rowbuf->data() + static_cast<std::size_t>(k) * kTrajColumns;
      for (int z = 1; z <= 7; ++z) row[kTrajZ1 + z - 1] = value_of(rec.Z(z, Maker::p));
      row[kTrajMuP] = value_of(rec.ctrl.mu_p);
      row[kTrajMuQ] = value_of(rec.ctrl.mu_q);
      row[kTrajLamP] = value_of(rec.ctrl.lam_p);
      row[kTrajLamQ] = value_of(rec.ctrl.lam_q);
      row[kTrajLamA] = value_of(rec.rates.rate_a);
      row[kTrajLamB] = value_of(rec.rates.rate_b);
      row[kTrajFP] = value_of(rec.F_p);
      row[kTrajFQ] = value_of(rec.F_q);
      row[kTrajNegIntFP] = neg_int_fp;
      row[kTrajNegIntFQ] = neg_int_fq;
      row[kTrajYP] = y_p_pre;
      row[kTrajYQ] = y_q_pre;
    }
    neg_int_fp -= value_of(rec.F_p) * dt;
    neg_int_fq -= value_of(rec.F_q) * dt;
    last = rec;
  }

  out.pcl = clearing_price(out.state, pr);
  out.g_p = payoff_g(Maker::p, out.state, pr);
  out.g_q = payoff_g(Maker::q, out.state, pr);

  if (rowbuf) {
    double* row = rowbuf->data() + static_cast<std::size_t>(pr.n_steps) * kTrajColumns;
    for (int z = 1; z <= 7; ++z) row[kTrajZ1 + z - 1] = value_of(last.Z(z, Maker::p));
    row[kTrajMuP] = value_of(last.ctrl.mu_p);
    row[kTrajMuQ] = value_of(last.ctrl.mu_q);
    row[kTrajLamP] = value_of(last.ctrl.lam_p);
    row[kTrajLamQ] = value_of(last.ctrl.lam_q);
    row[kTrajLamA] = value_of(last.rates.rate_a);
    row[kTrajLamB] = value_of(last.rates.rate_b);
    row[kTrajFP] = value_of(last.F_p);
    row[kTrajFQ] = value_of(last.F_q);
    row[kTrajNegIntFP] = neg_int_fp;
    row[kTrajNegIntFQ] = neg_int_fq;
    row[kTrajYP] = value_of(out.Y.p);
    row[kTrajYQ] = value_of(out.Y.q);
  }
  return out;
}

using PolicyFn = std::function<ZMatrix(double, const MarketState&, const YPair&)>;

inline PolicyFn zero_policy() {
  return [](double, const MarketState&, const YPair&) { return ZMatrix::zero(); };
}

// Simulates m independent paths with substream (seed, kStreamPath, k) per
// path. Paths may execute on several threads; all reductions happen in path
// order, so the result is identical for any thread count.
PathBatch simulate_batch(const PolicyFn& policy, const ModelParams& pr, int m,
                         std::uint64_t seed, bool record_trajectories,
                         SimOptions opt = {}, int threads = 0);

// Monte Carlo maker value: mean of g^i(X_T) + xi^i - intensity penalty with
// xi^i = R0_i + Y^i_T (Y started at zero). Failed paths are excluded.
Estimate trader_value_V0(const PathBatch& batch, Maker maker, const ModelParams& pr);

// Exchange report over one batch; rho, spread, rebates and fee revenue are
// taken on the same sample so the decomposition identity is exact.
RebateReport exchange_objective(const PathBatch& batch, double d, const ModelParams& pr);

}  // namespace alab
