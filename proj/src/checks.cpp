#include "alab/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "alab/io.hpp"
#include "alab/train.hpp"

namespace alab::checks {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Small-scale regime where lambda*dt stays well below 1 and the payoff
// increments are moderate; used by the Monte Carlo and gradient criteria.
ModelParams small_params() {
  ModelParams p;
  p.T = 1.0;
  p.n_steps = 50;
  p.lambda0 = 4.0;
  p.lambda_inf = 8.0;
  p.mu_inf = 5.0;
  p.P0_star = 100.0;
  p.sigma = 1.0;
  p.c = 0.1;
  p.d = 0.0;
  p.R0_p = 0.0;
  p.R0_q = 0.0;
  p.epsilon = 1.0;
  return p;
}

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  long n = 0;
};

template <class Get>
MeanSE batch_mean_se(const PathBatch& b, Get&& get) {
  double sum = 0.0, sumsq = 0.0;
  long n = 0;
  for (const auto& p : b.paths) {
    if (p.failed) continue;
    const double v = get(p);
    sum += v;
    sumsq += v * v;
    ++n;
  }
  MeanSE m;
  m.n = n;
  if (n > 0) m.mean = sum / n;
  if (n > 1) {
    double var = (sumsq - n * m.mean * m.mean) / (n - 1);
    if (var < 0.0) var = 0.0;
    m.se = std::sqrt(var / n);
  }
  return m;
}

}  // namespace

MarketState OrderList::to_state() const {
  MarketState s;
  s.t = t;
  s.x1 = buy_volume;
  s.x2 = sell_volume;
  s.x3 = pstar;
  s.x5 = static_cast<int>(p_prices.size());
  s.x7 = static_cast<int>(q_prices.size());
  for (double p : p_prices) s.x4 += p;
  for (double q : q_prices) s.x6 += q;
  s.p_p = quote_p;
  s.p_q = quote_q;
  s.r1 = r1;
  s.r2 = r2;
  return s;
}

double OrderList::lm_mo(double x, const ModelParams& pr) const {
  double lm = pr.K0 * (pr.P0_star - x);
  for (double p : p_prices) lm += pr.Kp * (p - x);
  for (double q : q_prices) lm += pr.Kq * (q - x);
  return lm + buy_volume - sell_volume;
}

double OrderList::bisect_clearing(const ModelParams& pr, double tol) const {
  // lm_mo is strictly decreasing in x with slope -(K0 + Kp n_p + Kq n_q)
  double lo = pr.P0_star, hi = pr.P0_star;
  for (double p : p_prices) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  for (double q : q_prices) {
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  const double pad = 1.0 + (std::fabs(buy_volume) + std::fabs(sell_volume)) / pr.K0;
  lo -= pad;
  hi += pad;
  while (lm_mo(lo, pr) < 0.0) lo -= std::max(1.0, hi - lo);
  while (lm_mo(hi, pr) > 0.0) hi += std::max(1.0, hi - lo);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lm_mo(mid, pr) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double OrderList::pathwise_payoff(Maker i, double pcl, const ModelParams& pr) const {
  const auto& prices = (i == Maker::p) ? p_prices : q_prices;
  const double K = (i == Maker::p) ? pr.Kp : pr.Kq;
  double total = 0.0;
  for (double price : prices) total += K * (pcl - price) * (pcl - pstar);
  return total;
}

OrderList random_order_list(PathRng& rng, const ModelParams& pr, bool mirrored) {
  OrderList o;
  const int np = 1 + static_cast<int>(rng.uniform() * 6.0);
  const int nq = mirrored ? np : 1 + static_cast<int>(rng.uniform() * 6.0);
  auto price = [&]() { return pr.P0_star * (0.9 + 0.2 * rng.uniform()); };
  for (int i = 0; i < np; ++i) o.p_prices.push_back(price());
  if (mirrored) {
    o.q_prices = o.p_prices;
  } else {
    for (int i = 0; i < nq; ++i) o.q_prices.push_back(price());
  }
  o.buy_volume = 3.0 * rng.uniform();
  o.sell_volume = 3.0 * rng.uniform();
  o.pstar = price();
  o.quote_p = price();
  o.quote_q = mirrored ? o.quote_p : price();
  o.r1 = rng.uniform() < 0.5 ? pr.v_a : 0.0;
  o.r2 = rng.uniform() < 0.5 ? pr.v_b : 0.0;
  o.t = pr.T * rng.uniform();
  return o;
}

double bisect_gamma(double A, double B, double zt, double sigma, double c) {
  auto eq = [&](double g) { return -zt / sigma - c * A / g + c * B * g; };
  // strictly decreasing from +inf (g -> 0+) to -inf (g -> inf) when A,B < 0
  double lo = 1e-8, hi = 1.0;
  while (eq(hi) > 0.0 && hi < 1e8) hi *= 2.0;
  while (eq(lo) < 0.0 && lo > 1e-12) lo *= 0.5;
  for (int it = 0; it < 400 && (hi - lo) > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eq(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ZMatrix random_tied_z(PathRng& rng, const MarketState* valid_at, const ModelParams& pr) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    std::array<double, 7> o{};
    o[0] = 8.0 + 10.0 * rng.uniform();   // z1 = -o1
    o[1] = 8.0 + 10.0 * rng.uniform();   // z2 = -o2
    o[2] = 2.0 * rng.uniform();          // z3
    o[3] = 2.0 * rng.uniform();          // z4
    o[4] = 2.0 * rng.uniform();          // z5
    o[5] = 2.0 * rng.uniform();          // z6
    o[6] = 2.0 * rng.uniform();          // z7
    const ZMatrix Z = ZMatrix::tied_from_outputs(o);
    if (!valid_at) return Z;
    const double dg1p = delta_g(Maker::p, *valid_at, JumpKind::BuyerArrival, pr);
    const double dg1q = delta_g(Maker::q, *valid_at, JumpKind::BuyerArrival, pr);
    const double dg2p = delta_g(Maker::p, *valid_at, JumpKind::SellerArrival, pr);
    const double dg2q = delta_g(Maker::q, *valid_at, JumpKind::SellerArrival, pr);
    if (0.5 * (dg1p + dg1q) + Z(1, Maker::p) < 0.0 &&
        0.5 * (dg2p + dg2q) + Z(2, Maker::p) < 0.0) {
      return Z;
    }
  }
  throw std::runtime_error("random_tied_z: no valid Z found for the state");
}

// ---------------------------------------------------------------------------
// criterion 1: clearing-price closed form vs bisection on the explicit
// supply/demand curve, 1e4 random states, |diff| < 1e-9, under 2 s
// ---------------------------------------------------------------------------
CheckResult criterion_1_clearing_oracle() {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "1 clearing-price oracle";
  ModelParams pr;
  PathRng rng(substream_seed(20250809, 101, 0));
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const OrderList o = random_order_list(rng, pr, false);
    const MarketState s = o.to_state();
    const double closed = clearing_price(s, pr);
    const double oracle = o.bisect_clearing(pr);
    worst = std::max(worst, std::fabs(closed - oracle));
  }
  res.seconds = elapsed(t0);
  res.pass = worst < 1e-9 && res.seconds < 2.0;
  res.detail = "max |closed - bisection| = " + fmt(worst) + ", " + fmt(res.seconds) + " s";
  return res;
}

// ---------------------------------------------------------------------------
// criterion 2: closed-form Nash controls vs grid maxima of F (mu step 0.01,
// lambda step 0.1, tol 1e-3) on 100 random mirrored states with valid Z
// ---------------------------------------------------------------------------
CheckResult criterion_2_best_response() {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "2 best-response grid oracle";
  ModelParams pr = small_params();
  PathRng rng(substream_seed(20250809, 102, 0));
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const OrderList o = random_order_list(rng, pr, true);
    const MarketState s = o.to_state();
    ZMatrix Z;
    try {
      Z = random_tied_z(rng, &s, pr);
      const ControlPair ctrl = nash_fixed_point(s, Z, pr);
      double improvement = 0.0;
      if (!verify_nash(s, Z, ctrl, pr, 0.01, 1e-3, 0.1, &improvement)) ++failures;
      worst = std::max(worst, improvement);
    } catch (const std::exception&) {
      ++failures;
    }
  }
  res.seconds = elapsed(t0);
  res.pass = failures == 0 && res.seconds < 60.0;
  res.detail = "worst grid improvement = " + fmt(worst) + ", failures = " +
               std::to_string(failures) + ", " + fmt(res.seconds) + " s";
  return res;
}

// ---------------------------------------------------------------------------
// criterion 3: gamma root residual < 1e-9 relative and bisection agreement
// to 1e-9 on 1e4 random valid inputs
// ---------------------------------------------------------------------------
CheckResult criterion_3_gamma_root() {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "3 gamma-root property";
  PathRng rng(substream_seed(20250809, 103, 0));
  double worst_res = 0.0, worst_gap = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double A = -(1e-3 + 50.0 * rng.uniform());
    const double B = -(1e-3 + 50.0 * rng.uniform());
    const double zt = -30.0 + 60.0 * rng.uniform();
    const double sigma = 0.5 + 2.5 * rng.uniform();
    const double c = 0.01 + 0.99 * rng.uniform();
    const double g = solve_symmetric_gamma(A, B, zt, sigma, c);
    worst_res = std::max(worst_res, symmetric_gamma_residual(A, B, zt, sigma, c, g));
    const double gb = bisect_gamma(A, B, zt, sigma, c);
    worst_gap = std::max(worst_gap, std::fabs(g - gb) / std::max(1.0, g));
  }
  res.seconds = elapsed(t0);
  res.pass = worst_res < 1e-9 && worst_gap < 1e-9;
  res.detail = "max residual = " + fmt(worst_res) + ", max |closed - bisection| = " +
               fmt(worst_gap) + ", " + fmt(res.seconds) + " s";
  return res;
}

// ---------------------------------------------------------------------------
// criterion 4: martingale consistency of Y at reference controls, and the
// contract identity |V0 - R0| <= 3 SE under a valid constant Z, m = 1e5
// ---------------------------------------------------------------------------
CheckResult criterion_4_martingale_contract() {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "4 martingale / contract identity";
  ModelParams pr = small_params();

  std::array<double, 7> o{12.0, 12.0, 1.0, 0.5, 0.5, 0.5, 0.5};
  const ZMatrix Zc = ZMatrix::tied_from_outputs(o);
  PolicyFn policy = [Zc](double, const MarketState&, const YPair&) { return Zc; };

  // (a) all intensities forced to lambda0, zero spreads
  SimOptions forced;
  forced.eq = EquilibriumHandling::ForcedReference;
  const PathBatch ba = simulate_batch(policy, pr, 100000, substream_seed(20250809, 104, 0),
                                      false, forced);
  const MeanSE mp = batch_mean_se(ba, [](const PathTerminal& p) { return p.mart_p; });
  const MeanSE mq = batch_mean_se(ba, [](const PathTerminal& p) { return p.mart_q; });
  const bool pass_a = std::fabs(mp.mean) <= 3.0 * mp.se && std::fabs(mq.mean) <= 3.0 * mq.se;

  // (b) Nash controls under the same constant Z: V0 within 3 SE of R0
  SimOptions strict;
  strict.eq = EquilibriumHandling::Penalize;
  const PathBatch bb = simulate_batch(policy, pr, 100000, substream_seed(20250809, 104, 1),
                                      false, strict);
  const Estimate v0p = trader_value_V0(bb, Maker::p, pr);
  const Estimate v0q = trader_value_V0(bb, Maker::q, pr);
  const bool pass_b = bb.n_failed == 0 && std::fabs(v0p.mean - pr.R0_p) <= 3.0 * v0p.se &&
                      std::fabs(v0q.mean - pr.R0_q) <= 3.0 * v0q.se;

  res.seconds = elapsed(t0);
  res.pass = pass_a && pass_b && res.seconds < 300.0;
  res.detail = "forced mean (p,q) = (" + fmt(mp.mean) + ", " + fmt(mq.mean) + ") vs 3SE (" +
               fmt(3.0 * mp.se) + ", " + fmt(3.0 * mq.se) + "); V0 - R0 = (" +
               fmt(v0p.mean - pr.R0_p) + ", " + fmt(v0q.mean - pr.R0_q) + ") vs 3SE (" +
               fmt(3.0 * v0p.se) + ", " + fmt(3.0 * v0q.se) + "), failed = " +
               std::to_string(bb.n_failed) + ", " + fmt(res.seconds) + " s";
  return res;
}

// ---------------------------------------------------------------------------
// criterion 5: backprop vs central finite differences (h = 1e-5, frozen
// randomness and jump indicators), 100 random weight coordinates
// ---------------------------------------------------------------------------
CheckResult criterion_5_gradient_check() {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "5 gradient finite-difference check";
  ModelParams pr = small_params();
  pr.n_steps = 10;

  TrainConfig cfg;
  cfg.batch_m = 8;
  cfg.epsilon = 1.0;
  cfg.seed = 7;
  cfg.threads = 1;

  const PolicyNetwork net =
      PolicyNetwork::uniform_init(substream_seed(cfg.seed, kStreamWeightInit, 0));
  const std::uint64_t iter_seed = substream_seed(cfg.seed, kStreamTrainIter, 0);

  const GradEval ge = loss_and_gradient(net.w, pr, cfg, iter_seed);
  std::vector<std::vector<std::uint8_t>> indicators;
  LossParts base_parts;
  loss_value(net.w, pr, cfg, iter_seed, nullptr, &indicators, &base_parts);
  if (ge.n_failed != 0 || base_parts.n_failed != 0) {
    res.pass = false;
    res.detail = "equilibrium failures in the gradient configuration";
    return res;
  }

  PathRng coord_rng(substream_seed(20250809, 105, 0));
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int j = static_cast<int>(coord_rng.uniform() * net.w.size());
    std::vector<double> wp = net.w, wm = net.w;
    wp[j] += h;
    wm[j] -= h;
    const double lp = loss_value(wp, pr, cfg, iter_seed, &indicators);
    const double lm = loss_value(wm, pr, cfg, iter_seed, &indicators);
    const double fd = (lp - lm) / (2.0 * h);
    const double err =
        std::fabs(ge.grad[j] - fd) / std::max({1.0, std::fabs(fd), std::fabs(ge.grad[j])});
    worst = std::max(worst, err);
  }
  res.seconds = elapsed(t0);
  res.pass = worst < 1e-4;
  res.detail = "max relative error = " + fmt(worst) + " over 100 coordinates, " +
               fmt(res.seconds) + " s";
  return res;
}

// ---------------------------------------------------------------------------
// criterion 6: seeded training progress on the reference large-scale
// parameters: mean loss over the last 50 iterations strictly below the mean
// over the first 50 (200 iterations, M = 256)
// ---------------------------------------------------------------------------
CheckResult criterion_6_training_progress() {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "6 training progress";
  ModelParams pr = ModelParams::apple();
  pr.d = 3.0;

  TrainConfig cfg;
  cfg.learning_rate = 5e-4;
  cfg.iterations = 200;
  cfg.batch_m = 256;
  cfg.epsilon = 1.0;
  cfg.seed = 20250809;

  try {
    const TrainResult tr = train(pr, cfg);
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 50; ++i) first += tr.loss_history[i];
    for (int i = 150; i < 200; ++i) last += tr.loss_history[i];
    first /= 50.0;
    last /= 50.0;
    res.seconds = elapsed(t0);
    res.pass = last < first && res.seconds < 1800.0;
    res.detail = "mean loss first 50 = " + fmt(first) + ", last 50 = " + fmt(last) +
                 ", failed paths = " + std::to_string(tr.total_failed_paths) + ", " +
                 fmt(res.seconds) + " s";
  } catch (const TrainingDiverged& e) {
    res.seconds = elapsed(t0);
    res.pass = false;
    res.detail = e.what();
  }
  return res;
}

// ---------------------------------------------------------------------------
// criteria 7 and 8 share one fee sweep with per-point training
// ---------------------------------------------------------------------------
SweepArtifacts run_acceptance_sweep() {
  SweepArtifacts art;
  art.params = ModelParams::apple();

  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.iterations = 60;
  cfg.batch_m = 128;
  cfg.epsilon = 1.0;
  cfg.seed = 20250809;

  try {
    art.sweep = sweep_fee(default_fee_grid(), cfg, 256, cfg.seed, art.params);
    if (art.sweep.argmin < 0) {
      art.error = "all sweep points failed";
      return art;
    }
    const SweepPoint& best = art.sweep.points[art.sweep.argmin];
    art.comparison = baseline_comparison(art.params, 256, cfg.seed, best.net, best.d);
    art.ok = true;
  } catch (const std::exception& e) {
    art.error = e.what();
  }
  return art;
}

CheckResult criterion_7_fee_sweep(const SweepArtifacts& art) {
  CheckResult res;
  res.name = "7 fee-sweep interior minimum";
  if (!art.ok) {
    res.detail = art.error;
    return res;
  }
  const SweepPoint& best = art.sweep.points[art.sweep.argmin];
  res.pass = art.sweep.argmin_interior;
  std::ostringstream os;
  os << "d_hat = " << best.d << " (grid 0..6), rho(d_hat) = " << fmt(best.rho.mean)
     << " +- " << fmt(best.rho.se) << ", endpoints rho(0) = "
     << fmt(art.sweep.points.front().rho.mean) << ", rho(6) = "
     << fmt(art.sweep.points.back().rho.mean);
  res.detail = os.str();
  return res;
}

CheckResult criterion_8_efficiency(const SweepArtifacts& art) {
  CheckResult res;
  res.name = "8 efficiency improvement";
  if (!art.ok) {
    res.detail = art.error;
    return res;
  }
  const double base = art.comparison.no_incentive.spread_sq.mean;
  const double with = art.comparison.with_incentive.spread_sq.mean;
  res.pass = with <= 0.9 * base;
  res.detail = "spread_sq baseline = " + fmt(base) + ", with incentive = " + fmt(with) +
               " (ratio " + fmt(with / base) + ", need <= 0.9)";
  return res;
}

// ---------------------------------------------------------------------------
// criterion 9: byte-identical outputs for identical (config, seed)
// ---------------------------------------------------------------------------
namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

CheckResult criterion_9_determinism() {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "9 byte-identical reruns";
  namespace fs = std::filesystem;

  RunConfig cfg;
  cfg.market = small_params();
  cfg.market.rng_seed = 42;
  cfg.train.seed = 42;
  cfg.train.iterations = 2;
  cfg.train.batch_m = 8;
  cfg.train.learning_rate = 1e-3;
  cfg.sweep.grid = {0.0, 1.0, 2.0};
  cfg.sweep.eval_m = 16;
  cfg.output.emit_trajectories = true;

  const fs::path root = fs::temp_directory_path() / "alab_determinism_check";
  fs::remove_all(root);
  const fs::path dir_a = root / "a", dir_b = root / "b";
  std::ostringstream devnull;
  if (run_experiment(cfg, dir_a.string(), devnull) != 0 ||
      run_experiment(cfg, dir_b.string(), devnull) != 0) {
    res.detail = "run_experiment returned nonzero";
    return res;
  }

  std::vector<std::string> mismatched;
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename();
    ++compared;
    if (read_file(entry.path()) != read_file(dir_b / name)) {
      mismatched.push_back(name.string());
    }
  }
  res.seconds = elapsed(t0);
  res.pass = !mismatched.empty() ? false : compared > 0;
  std::ostringstream os;
  os << compared << " files compared";
  if (!mismatched.empty()) {
    os << ", mismatched:";
    for (const auto& m : mismatched) os << ' ' << m;
  }
  os << ", " << fmt(res.seconds) << " s";
  res.detail = os.str();
  fs::remove_all(root);
  return res;
}

std::vector<CheckResult> run_quick() {
  std::vector<CheckResult> out;
  out.push_back(criterion_1_clearing_oracle());
  out.push_back(criterion_2_best_response());
  out.push_back(criterion_3_gamma_root());
  out.push_back(criterion_5_gradient_check());
  out.push_back(criterion_9_determinism());
  return out;
}

std::vector<CheckResult> run_full() {
  std::vector<CheckResult> out;
  out.push_back(criterion_1_clearing_oracle());
  out.push_back(criterion_2_best_response());
  out.push_back(criterion_3_gamma_root());
  out.push_back(criterion_4_martingale_contract());
  out.push_back(criterion_5_gradient_check());
  out.push_back(criterion_6_training_progress());
  const SweepArtifacts art = run_acceptance_sweep();
  out.push_back(criterion_7_fee_sweep(art));
  out.push_back(criterion_8_efficiency(art));
  out.push_back(criterion_9_determinism());
  return out;
}

}  // namespace alab::checks
