#include <doctest.h>

#include <cmath>

#include "alab/checks.hpp"
#include "alab/model.hpp"

using namespace alab;

namespace {

// series exp, independent of std::exp, for cross-checking intensities
double series_exp(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= x / k;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("clearing price: block trade only") {
  ModelParams pr;
  pr.P0_star = 184.39;
  MarketState s = MarketState::initial(pr);
  CHECK(clearing_price(s, pr) == doctest::Approx(184.39).epsilon(1e-14));
}

TEST_CASE("clearing price: one buy order shifts the block price") {
  ModelParams pr;
  pr.P0_star = 100.0;
  MarketState s = MarketState::initial(pr);
  s.x1 = 1.0;
  const double closed = clearing_price(s, pr);
  CHECK(closed == doctest::Approx(101.0).epsilon(1e-12));

  checks::OrderList o;
  o.buy_volume = 1.0;
  o.pstar = 100.0;
  CHECK(std::fabs(closed - o.bisect_clearing(pr)) < 1e-9);
}

TEST_CASE("clearing price: single maker order averages with the block") {
  ModelParams pr;
  pr.P0_star = 100.0;
  MarketState s = MarketState::initial(pr);
  s.x4 = 100.0;
  s.x5 = 1;
  CHECK(clearing_price(s, pr) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(payoff_g(Maker::p, s, pr) == doctest::Approx(0.0));
}

TEST_CASE("clearing residual and convexity on random order lists") {
  ModelParams pr;
  PathRng rng(substream_seed(1, 1, 0));
  for (int i = 0; i < 10000; ++i) {
    checks::OrderList o = checks::random_order_list(rng, pr, false);
    const MarketState s = o.to_state();
    const double pcl = clearing_price(s, pr);
    CHECK(std::fabs(o.lm_mo(pcl, pr)) < 1e-9);
  }
  // convexity: with no investor volume the price stays inside the executed range
  for (int i = 0; i < 2000; ++i) {
    checks::OrderList o = checks::random_order_list(rng, pr, false);
    o.buy_volume = 0.0;
    o.sell_volume = 0.0;
    const MarketState s = o.to_state();
    double lo = pr.P0_star, hi = pr.P0_star;
    for (double p : o.p_prices) {
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    for (double q : o.q_prices) {
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    const double pcl = clearing_price(s, pr);
    CHECK(pcl >= lo - 1e-12);
    CHECK(pcl <= hi + 1e-12);
  }
}

TEST_CASE("payoff matches the order-by-order accumulation") {
  ModelParams pr;
  PathRng rng(substream_seed(1, 2, 0));
  for (int i = 0; i < 2000; ++i) {
    const checks::OrderList o = checks::random_order_list(rng, pr, false);
    const MarketState s = o.to_state();
    const double pcl = clearing_price(s, pr);
    for (Maker mk : {Maker::p, Maker::q}) {
      const double closed = payoff_g(mk, s, pr);
      const double pathwise = o.pathwise_payoff(mk, pcl, pr);
      CHECK(closed == doctest::Approx(pathwise).epsilon(1e-10));
    }
  }
}

TEST_CASE("payoff is zero without maker orders") {
  ModelParams pr;
  MarketState s = MarketState::initial(pr);
  s.x1 = 3.0;
  s.x2 = 1.0;
  CHECK(payoff_g(Maker::p, s, pr) == 0.0);
  CHECK(payoff_g(Maker::q, s, pr) == 0.0);
}

TEST_CASE("delta_g: cancelled order moves nothing") {
  ModelParams pr;
  PathRng rng(substream_seed(1, 3, 0));
  checks::OrderList o = checks::random_order_list(rng, pr, false);
  o.r1 = 0.0;
  const MarketState s = o.to_state();
  CHECK(delta_g(Maker::p, s, JumpKind::BuyerArrival, pr) == 0.0);
  CHECK(delta_g(Maker::q, s, JumpKind::BuyerArrival, pr) == 0.0);
}

TEST_CASE("delta_g: first maker order at the block price earns nothing") {
  ModelParams pr;
  pr.P0_star = 184.39;
  MarketState s = MarketState::initial(pr);
  CHECK(delta_g(Maker::p, s, JumpKind::MakerP, pr) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("delta_g agrees with the two-payoff route") {
  ModelParams pr;
  PathRng rng(substream_seed(1, 4, 0));
  for (int i = 0; i < 5000; ++i) {
    const checks::OrderList o = checks::random_order_list(rng, pr, false);
    const MarketState s = o.to_state();
    for (JumpKind k : {JumpKind::BuyerArrival, JumpKind::SellerArrival, JumpKind::MakerP,
                       JumpKind::MakerQ}) {
      for (Maker mk : {Maker::p, Maker::q}) {
        const double inc = delta_g(mk, s, k, pr);
        const double oracle = payoff_g(mk, apply_jump(s, k), pr) - payoff_g(mk, s, pr);
        CHECK(std::fabs(inc - oracle) < 1e-10 * std::max(1.0, std::fabs(oracle)));
      }
    }
  }
}

TEST_CASE("investor intensities: anchor and worked example") {
  ModelParams pr;
  pr.lambda0 = 100.0;
  pr.c = 0.1;
  const auto anchor = investor_intensities(0.0, 0.0, 0.0, pr);
  CHECK(anchor.rate_a == doctest::Approx(100.0));
  CHECK(anchor.rate_b == doctest::Approx(100.0));

  // mu_p + mu_q = 10, c = 0.1: rates are 100 e^{-1}, 100 e^{+1}
  const auto r = investor_intensities(6.0, 4.0, 0.0, pr);
  CHECK(r.rate_a == doctest::Approx(100.0 * series_exp(-1.0)).epsilon(1e-12));
  CHECK(r.rate_b == doctest::Approx(100.0 * series_exp(1.0)).epsilon(1e-12));
  CHECK(r.rate_a == doctest::Approx(36.7879441171).epsilon(1e-9));
  CHECK(r.rate_b == doctest::Approx(271.8281828459).epsilon(1e-9));
}

TEST_CASE("investor intensity product is spread-free") {
  ModelParams pr;
  pr.lambda0 = 100.0;
  pr.c = 0.37;
  PathRng rng(substream_seed(1, 5, 0));
  for (int i = 0; i < 1000; ++i) {
    const double mu_p = -60.0 + 120.0 * rng.uniform();
    const double mu_q = -60.0 + 120.0 * rng.uniform();
    const double d = 4.0 * rng.uniform();
    const auto r = investor_intensities(mu_p, mu_q, d, pr);
    const double want = pr.lambda0 * pr.lambda0 * std::exp(-2.0 * d);
    CHECK(r.rate_a * r.rate_b == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("cancellation survival") {
  CHECK(cancellation_survival(0.0) == 1.0);
  CHECK(cancellation_survival(1.0) == 1.0);
  CHECK(cancellation_survival(9.0) == doctest::Approx(0.6).epsilon(1e-15));
  // oracle form and monotonicity over a grid
  double prev = 2.0;
  for (int i = 0; i <= 200; ++i) {
    const double u = 0.1 * i;
    const double s = cancellation_survival(u);
    const double oracle = std::min(1.0, 1.0 / (1.0 + u) + 0.5);
    CHECK(s == doctest::Approx(oracle).epsilon(1e-15));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s <= prev + 1e-15);
    prev = s;
  }
}

TEST_CASE("parameter validation flags clamped thinning regimes") {
  ModelParams pr;  // reference large-scale values: lambda_inf * dt = 40
  CHECK(pr.errors().empty());
  CHECK(!pr.warnings().empty());

  ModelParams ok = pr;
  ok.T = 1.0;
  ok.lambda0 = 4.0;
  ok.lambda_inf = 8.0;
  CHECK(ok.warnings().empty());

  ModelParams bad = pr;
  bad.sigma = -1.0;
  CHECK(!bad.errors().empty());
  CHECK_THROWS_AS(bad.require_valid(), std::invalid_argument);
}
