#pragma once

// Static market algebra: clearing price, maker payoffs, jump increments,
// investor intensities and order cancellation. Everything here is a pure
// function of value types.

#include <cmath>

#include "alab/ad.hpp"
#include "alab/params.hpp"
#include "alab/state.hpp"

namespace alab {

// Numerator / denominator of the clearing-price quotient. The denominator is
// count-only and strictly positive because K0 > 0.
template <class R>
struct ClearingTermsT {
  R num{};
  double den = 0.0;
};

template <class R>
ClearingTermsT<R> clearing_terms(const MarketStateT<R>& s, const ModelParams& pr) {
  ClearingTermsT<R> t;
  t.num = (s.x1 - s.x2) + pr.Kp * s.x4 + pr.Kq * s.x6 + pr.K0 * pr.P0_star;
  t.den = pr.Kp * s.x5 + pr.Kq * s.x7 + pr.K0;
  return t;
}

// Price zeroing the aggregate supply/demand of all limit and market orders.
template <class R>
R clearing_price(const MarketStateT<R>& s, const ModelParams& pr) {
  const auto t = clearing_terms(s, pr);
  return t.num / t.den;
}

// Terminal trade payoff of one maker: K^i (P^cl - P*) (N^i P^cl - integral P^i dN^i).
template <class R>
R payoff_g(Maker i, const MarketStateT<R>& s, const ModelParams& pr) {
  const R pcl = clearing_price(s, pr);
  if (i == Maker::p) {
    return pr.Kp * (pcl - s.x3) * (static_cast<double>(s.x5) * pcl - s.x4);
  }
  return pr.Kq * (pcl - s.x3) * (static_cast<double>(s.x7) * pcl - s.x6);
}

// State after one jump of the given kind. Maker jumps enter at the current
// quote; investor jumps at the pending candidate size.
template <class R>
MarketStateT<R> apply_jump(const MarketStateT<R>& s, JumpKind k) {
  MarketStateT<R> out = s;
  switch (k) {
    case JumpKind::BuyerArrival:
      out.x1 += s.r1;
      break;
    case JumpKind::SellerArrival:
      out.x2 += s.r2;
      break;
    case JumpKind::MakerP:
      out.x4 += s.p_p;
      out.x5 += 1;
      break;
    case JumpKind::MakerQ:
      out.x6 += s.p_q;
      out.x7 += 1;
      break;
  }
  return out;
}

// Payoff increment g^i(x + jump) - g^i(x), computed by updating the clearing
// quotient incrementally rather than re-deriving both payoffs from scratch
// (the from-scratch route is the test oracle).
template <class R>
R delta_g(Maker i, const MarketStateT<R>& s, JumpKind k, const ModelParams& pr) {
  const auto base = clearing_terms(s, pr);
  const R pcl = base.num / base.den;

  R num_after = base.num;
  double den_after = base.den;
  switch (k) {
    case JumpKind::BuyerArrival:
      num_after += s.r1;
      break;
    case JumpKind::SellerArrival:
      num_after -= s.r2;
      break;
    case JumpKind::MakerP:
      num_after += pr.Kp * s.p_p;
      den_after += pr.Kp;
      break;
    case JumpKind::MakerQ:
      num_after += pr.Kq * s.p_q;
      den_after += pr.Kq;
      break;
  }
  const R pcl_after = num_after / den_after;

  const double Ki = (i == Maker::p) ? pr.Kp : pr.Kq;
  double count = (i == Maker::p) ? s.x5 : s.x7;
  R weighted = (i == Maker::p) ? s.x4 : s.x6;
  const R before = Ki * (pcl - s.x3) * (count * pcl - weighted);

  if (i == Maker::p && k == JumpKind::MakerP) {
    count += 1.0;
    weighted += s.p_p;
  } else if (i == Maker::q && k == JumpKind::MakerQ) {
    count += 1.0;
    weighted += s.p_q;
  }
  const R after = Ki * (pcl_after - s.x3) * (count * pcl_after - weighted);
  return after - before;
}

template <class R>
struct InvestorRatesT {
  R rate_a{};  // buyer arrival intensity
  R rate_b{};  // seller arrival intensity
};

using InvestorRates = InvestorRatesT<double>;

// lambda^a = lambda0 e^{-c (mu_p + mu_q)} e^{-d}, lambda^b mirrored. The
// product rate_a * rate_b = lambda0^2 e^{-2d} regardless of the spreads.
template <class R>
InvestorRatesT<R> investor_intensities(const R& mu_p, const R& mu_q, double d,
                                       const ModelParams& pr) {
  using std::exp;
  const double base = pr.lambda0 * std::exp(-d);
  const R shift = pr.c * (mu_p + mu_q);
  InvestorRatesT<R> out;
  out.rate_a = base * exp(-shift);
  out.rate_b = base * exp(shift);
  return out;
}

// Probability that an order arriving with time_remaining to the close
// survives until clearing: min(1, 1/(1+u) + 0.5). Equal to 1 for u <= 1,
// non-increasing, and always a valid probability.
inline double cancellation_survival(double time_remaining) {
  const double theta = 1.0 / (1.0 + time_remaining) + 0.5;
  return theta < 1.0 ? theta : 1.0;
}

inline JumpKind own_jump(Maker i) {
  return i == Maker::p ? JumpKind::MakerP : JumpKind::MakerQ;
}

}  // namespace alab
