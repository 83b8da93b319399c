#pragma once

#include "alab/params.hpp"

namespace alab {

enum class Maker { p, q };

// The four jump processes that move the market tuple.
enum class JumpKind { BuyerArrival, SellerArrival, MakerP, MakerQ };

// Market tuple X plus maker quotes, pending candidate order sizes and the
// clock. Templated on the scalar so the quote-dependent components can carry
// gradients; counts and investor volumes never depend on the contract and
// stay plain.
template <class R>
struct MarketStateT {
  double t = 0.0;
  double x1 = 0.0;  // surviving buy volume
  double x2 = 0.0;  // surviving sell volume
  double x3 = 0.0;  // efficient price P*
  R x4{};           // integral of P^p dN^p
  int x5 = 0;       // order count N^p
  R x6{};           // integral of P^q dN^q
  int x7 = 0;       // order count N^q
  R p_p{};          // maker p quote
  R p_q{};          // maker q quote
  double r1 = 0.0;  // next buy candidate size, 0 if cancelled
  double r2 = 0.0;  // next sell candidate size, 0 if cancelled

  static MarketStateT initial(const ModelParams& pr) {
    MarketStateT s;
    s.x3 = pr.P0_star;
    s.p_p = R(pr.P0_star);
    s.p_q = R(pr.P0_star);
    return s;
  }
};

using MarketState = MarketStateT<double>;

template <class R>
struct YPairT {
  R p{};
  R q{};
};

using YPair = YPairT<double>;

}  // namespace alab
