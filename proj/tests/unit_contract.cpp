#include <doctest.h>

#include <cmath>

#include "alab/checks.hpp"
#include "alab/sim.hpp"

using namespace alab;

namespace {

ModelParams test_params() {
  ModelParams p;
  p.T = 1.0;
  p.n_steps = 50;
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

// Z tying that forces gamma = 1 (zero spreads) at the given state.
ZMatrix flat_spread_z(const MarketState& s, const ModelParams& pr, double depth) {
  const double dg1 = 0.5 * (delta_g(Maker::p, s, JumpKind::BuyerArrival, pr) +
                            delta_g(Maker::q, s, JumpKind::BuyerArrival, pr));
  const double dg2 = 0.5 * (delta_g(Maker::p, s, JumpKind::SellerArrival, pr) +
                            delta_g(Maker::q, s, JumpKind::SellerArrival, pr));
  ZMatrix Z;
  for (Maker i : {Maker::p, Maker::q}) {
    Z(1, i) = -depth - dg1;
    Z(2, i) = -depth - dg2;
    Z(4, i) = 0.4;
    Z(6, i) = 0.4;
  }
  return Z;
}

}  // namespace

TEST_CASE("generator F reduces to payoff increments at anchor controls") {
  ModelParams pr = test_params();
  PathRng rng(substream_seed(3, 1, 0));
  for (int i = 0; i < 200; ++i) {
    const checks::OrderList o = checks::random_order_list(rng, pr, false);
    const MarketState s = o.to_state();
    ControlPair ctrl;
    ctrl.lam_p = pr.lambda0;
    ctrl.lam_q = pr.lambda0;
    const double f = generator_F(Maker::p, s, ZMatrix::zero(), ctrl, 0.0, pr);
    const double want = delta_g(Maker::p, s, JumpKind::BuyerArrival, pr) * pr.lambda0 +
                        delta_g(Maker::p, s, JumpKind::SellerArrival, pr) * pr.lambda0 +
                        delta_g(Maker::p, s, JumpKind::MakerP, pr) * pr.lambda0 +
                        delta_g(Maker::p, s, JumpKind::MakerQ, pr) * pr.lambda0;
    CHECK(f == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("F has a local maximum in own lambda at the best response") {
  ModelParams pr = test_params();
  PathRng rng(substream_seed(3, 2, 0));
  for (int i = 0; i < 100; ++i) {
    const checks::OrderList o = checks::random_order_list(rng, pr, true);
    const MarketState s = o.to_state();
    const ZMatrix Z = checks::random_tied_z(rng, &s, pr);
    const ControlPair ctrl = nash_fixed_point(s, Z, pr);
    if (ctrl.lam_p_clipped) continue;
    const double f0 = generator_F(Maker::p, s, Z, ctrl, pr.d, pr);
    for (double delta : {-1e-3, 1e-3}) {
      ControlPair probe = ctrl;
      probe.lam_p += delta;
      CHECK(generator_F(Maker::p, s, Z, probe, pr.d, pr) < f0);
    }
  }
}

TEST_CASE("F is maker-symmetric at mirrored states") {
  ModelParams pr = test_params();
  PathRng rng(substream_seed(3, 3, 0));
  for (int i = 0; i < 100; ++i) {
    const checks::OrderList o = checks::random_order_list(rng, pr, true);
    const MarketState s = o.to_state();
    const ZMatrix Z = checks::random_tied_z(rng, &s, pr);
    const ControlPair ctrl = nash_fixed_point(s, Z, pr);
    const double fp = generator_F(Maker::p, s, Z, ctrl, pr.d, pr);
    const double fq = generator_F(Maker::q, s, Z, ctrl, pr.d, pr);
    CHECK(fp == doctest::Approx(fq).epsilon(1e-10));
  }
}

TEST_CASE("step_Y with a zero contract is a pure drift") {
  ModelParams pr = test_params();
  PathRng rng(substream_seed(3, 4, 0));
  const checks::OrderList o = checks::random_order_list(rng, pr, false);
  const MarketState s = o.to_state();
  ControlPair ctrl;
  ctrl.lam_p = 5.0;
  ctrl.lam_q = 3.0;
  ctrl.mu_p = 0.7;
  ctrl.mu_q = -0.2;
  StepDraws dr;
  dr.dW = 0.13;
  dr.dWp = -0.21;
  dr.dWq = 0.05;
  dr.jump_a = true;  // jumps carry no weight when Z = 0
  const double dt = pr.dt();
  YPair y0{1.5, -2.0};
  const YPair y1 = step_Y(y0, s, ZMatrix::zero(), ctrl, dr, dt, pr.d, pr);
  const double fp = generator_F(Maker::p, s, ZMatrix::zero(), ctrl, pr.d, pr);
  const double fq = generator_F(Maker::q, s, ZMatrix::zero(), ctrl, pr.d, pr);
  CHECK(y1.p == doctest::Approx(y0.p - fp * dt).epsilon(1e-14));
  CHECK(y1.q == doctest::Approx(y0.q - fq * dt).epsilon(1e-14));
}

TEST_CASE("step_Y single-jump arithmetic") {
  // lambda0 * dt = 0.4 so the z4 compensator equals 2 against a jump weight 5
  ModelParams pr = test_params();
  pr.lambda0 = 20.0;
  pr.lambda_inf = 40.0;
  pr.n_steps = 50;  // dt = 0.02
  const MarketState s = MarketState::initial(pr);
  ZMatrix Z;
  Z(4, Maker::p) = 5.0;
  ControlPair ctrl;
  ctrl.lam_p = pr.lambda0;
  ctrl.lam_q = pr.lambda0;
  StepDraws dr;
  dr.jump_p = true;
  const double dt = pr.dt();
  REQUIRE(pr.lambda0 * dt == doctest::Approx(0.4));
  const YPair y1 = step_Y(YPair{}, s, Z, ctrl, dr, dt, pr.d, pr);
  const double f = generator_F(Maker::p, s, Z, ctrl, pr.d, pr);
  // hand arithmetic: z4 (dN - lambda0 dt) = 5 - 2 = 3, then the drift
  CHECK(y1.p == doctest::Approx(5.0 - 2.0 - f * dt).epsilon(1e-14));
  CHECK(y1.q == doctest::Approx(-generator_F(Maker::q, s, Z, ctrl, pr.d, pr) * dt));
}

TEST_CASE("mean one-step Y increment matches the compensator gap") {
  ModelParams pr = test_params();
  PathRng rng(substream_seed(3, 5, 0));
  const checks::OrderList o = checks::random_order_list(rng, pr, true);
  MarketState s = o.to_state();
  const ZMatrix Z = flat_spread_z(s, pr, 5.0);  // gamma = 1, zero spreads
  const ControlPair ctrl = nash_fixed_point(s, Z, pr);
  REQUIRE(ctrl.mu_p == doctest::Approx(0.0).scale(1.0));

  const double dt = pr.dt();
  const auto rates = investor_intensities(ctrl.mu_p, ctrl.mu_q, pr.d, pr);
  const double fp = generator_F(Maker::p, s, Z, ctrl, pr.d, pr);

  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const StepRandomness rnd = rng.step_draws();
    StepDraws dr;
    dr.dW = std::sqrt(dt) * rnd.gw;
    dr.dWp = std::sqrt(dt) * rnd.gp;
    dr.dWq = std::sqrt(dt) * rnd.gq;
    dr.jump_a = rnd.ua < rates.rate_a * dt;
    dr.jump_b = rnd.ub < rates.rate_b * dt;
    dr.jump_p = rnd.up < ctrl.lam_p * dt;
    dr.jump_q = rnd.uq < ctrl.lam_q * dt;
    const YPair y1 = step_Y(YPair{}, s, Z, ctrl, dr, dt, pr.d, pr);
    sum += y1.p;
    sumsq += y1.p * y1.p;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  double want = -fp * dt;
  want += Z(1, Maker::p) * (rates.rate_a - pr.lambda0) * dt;
  want += Z(2, Maker::p) * (rates.rate_b - pr.lambda0) * dt;
  want += Z(4, Maker::p) * (ctrl.lam_p - pr.lambda0) * dt;
  want += Z(6, Maker::p) * (ctrl.lam_q - pr.lambda0) * dt;
  CHECK(std::fabs(mean - want) <= 3.0 * se);
}

TEST_CASE("report decomposition identity and V0 composition") {
  ModelParams pr = test_params();
  pr.d = 0.3;
  pr.R0_p = 11.0;
  pr.R0_q = -4.0;
  std::array<double, 7> o{6.0, 6.0, 0.5, 0.4, 0.3, 0.2, 0.1};
  const ZMatrix Zc = ZMatrix::tied_from_outputs(o);
  PolicyFn policy = [Zc](double, const MarketState&, const YPair&) { return Zc; };
  SimOptions opt;
  opt.eq = EquilibriumHandling::Penalize;
  const PathBatch batch = simulate_batch(policy, pr, 2000, 99, false, opt);
  REQUIRE(batch.n_failed == 0);

  const RebateReport rep = exchange_objective(batch, pr.d, pr);
  const double lhs = rep.rho.mean - (pr.R0_p + pr.R0_q);
  const double rhs = rep.spread_sq.mean + (rep.xi_p.mean - pr.R0_p) +
                     (rep.xi_q.mean - pr.R0_q) - rep.fee_revenue.mean;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

  // single-path composition
  PathBatch one;
  one.m = 1;
  PathTerminal t;
  t.pcl_T = 101.0;
  t.pstar_T = 100.0;
  t.g_p_T = 2.0;
  t.y_p_T = -1.5;
  t.pen_p = 0.25;
  one.paths.push_back(t);
  const Estimate v0 = trader_value_V0(one, Maker::p, pr);
  CHECK(v0.mean == doctest::Approx(2.0 + pr.R0_p - 1.5 - 0.25));
}

TEST_CASE("reports add by sample size over concatenated batches") {
  ModelParams pr = test_params();
  pr.d = 0.5;
  std::array<double, 7> o{6.0, 6.0, 0.5, 0.4, 0.3, 0.2, 0.1};
  const ZMatrix Zc = ZMatrix::tied_from_outputs(o);
  PolicyFn policy = [Zc](double, const MarketState&, const YPair&) { return Zc; };
  SimOptions opt;
  opt.eq = EquilibriumHandling::Penalize;
  const PathBatch a = simulate_batch(policy, pr, 700, 5, false, opt);
  const PathBatch b = simulate_batch(policy, pr, 300, 6, false, opt);
  REQUIRE(a.n_failed == 0);
  REQUIRE(b.n_failed == 0);

  PathBatch both = a;
  both.m += b.m;
  both.paths.insert(both.paths.end(), b.paths.begin(), b.paths.end());

  const RebateReport ra = exchange_objective(a, pr.d, pr);
  const RebateReport rb = exchange_objective(b, pr.d, pr);
  const RebateReport rc = exchange_objective(both, pr.d, pr);
  const double want = (700.0 * ra.fee_revenue.mean + 300.0 * rb.fee_revenue.mean) / 1000.0;
  CHECK(rc.fee_revenue.mean == doctest::Approx(want).epsilon(1e-12));
  const double want_rho = (700.0 * ra.rho.mean + 300.0 * rb.rho.mean) / 1000.0;
  CHECK(rc.rho.mean == doctest::Approx(want_rho).epsilon(1e-12));
}

TEST_CASE("maker values stay on the reservation at equilibrium") {
  ModelParams pr = test_params();
  pr.R0_p = 7.0;
  pr.R0_q = 7.0;
  std::array<double, 7> o{12.0, 12.0, 1.0, 0.5, 0.5, 0.5, 0.5};
  const ZMatrix Zc = ZMatrix::tied_from_outputs(o);
  PolicyFn policy = [Zc](double, const MarketState&, const YPair&) { return Zc; };
  SimOptions opt;
  opt.eq = EquilibriumHandling::Penalize;
  const PathBatch batch = simulate_batch(policy, pr, 20000, 1234, false, opt);
  REQUIRE(batch.n_failed == 0);
  const Estimate v0p = trader_value_V0(batch, Maker::p, pr);
  const Estimate v0q = trader_value_V0(batch, Maker::q, pr);
  CHECK(std::fabs(v0p.mean - pr.R0_p) <= 3.0 * v0p.se);
  CHECK(std::fabs(v0q.mean - pr.R0_q) <= 3.0 * v0q.se);
  // maker symmetry: the gap between the two estimates is statistical
  CHECK(std::fabs(v0p.mean - v0q.mean) <= 3.0 * (v0p.se + v0q.se));
}

TEST_CASE("standard errors shrink like the square root of the sample") {
  ModelParams pr = test_params();
  std::array<double, 7> o{8.0, 8.0, 0.5, 0.4, 0.3, 0.2, 0.1};
  const ZMatrix Zc = ZMatrix::tied_from_outputs(o);
  PolicyFn policy = [Zc](double, const MarketState&, const YPair&) { return Zc; };
  SimOptions opt;
  opt.eq = EquilibriumHandling::Penalize;
  const PathBatch small = simulate_batch(policy, pr, 4000, 77, false, opt);
  const PathBatch large = simulate_batch(policy, pr, 16000, 77, false, opt);
  const Estimate vs = trader_value_V0(small, Maker::p, pr);
  const Estimate vl = trader_value_V0(large, Maker::p, pr);
  CHECK(vl.se == doctest::Approx(0.5 * vs.se).epsilon(0.2));
}
