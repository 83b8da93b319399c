#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "alab/ad.hpp"
#include "alab/state.hpp"

namespace alab {

// Contract sensitivities z^{k,i}, k = 1..7 indexing the canonical drivers
// (N^a, N^b, W, N^p, W^p, N^q, W^q), i in {p,q}.
template <class R>
struct ZMatrixT {
  std::array<std::array<R, 2>, 7> z{};

  const R& operator()(int k, Maker i) const { return z[k - 1][i == Maker::p ? 0 : 1]; }
  R& operator()(int k, Maker i) { return z[k - 1][i == Maker::p ? 0 : 1]; }

  static ZMatrixT zero() { return ZMatrixT{}; }

  // Identical-contract tying for the two makers from seven raw policy
  // outputs. Outputs feed maker p's column directly except for the sign of
  // the investor components: z1, z2 enter negatively so the equilibrium
  // condition Dg + z < 0 is reachable for positive raw outputs. Maker q's
  // column swaps the own/other maker pairs: z4<->z6 and z5<->z7.
  static ZMatrixT tied_from_outputs(const std::array<R, 7>& o) {
    ZMatrixT m;
    m(1, Maker::p) = -o[0];
    m(2, Maker::p) = -o[1];
    m(3, Maker::p) = o[2];
    m(4, Maker::p) = o[3];
    m(5, Maker::p) = o[4];
    m(6, Maker::p) = o[5];
    m(7, Maker::p) = o[6];
    m(1, Maker::q) = -o[0];
    m(2, Maker::q) = -o[1];
    m(3, Maker::q) = o[2];
    m(4, Maker::q) = o[5];
    m(5, Maker::q) = o[6];
    m(6, Maker::q) = o[3];
    m(7, Maker::q) = o[4];
    return m;
  }

  bool is_symmetric_tied(double tol = 0.0) const {
    auto near = [tol](const R& a, const R& b) {
      return std::fabs(value_of(a) - value_of(b)) <= tol;
    };
    return near((*this)(1, Maker::p), (*this)(1, Maker::q)) &&
           near((*this)(2, Maker::p), (*this)(2, Maker::q)) &&
           near((*this)(3, Maker::p), (*this)(3, Maker::q)) &&
           near((*this)(4, Maker::p), (*this)(6, Maker::q)) &&
           near((*this)(5, Maker::p), (*this)(7, Maker::q)) &&
           near((*this)(6, Maker::p), (*this)(4, Maker::q)) &&
           near((*this)(7, Maker::p), (*this)(5, Maker::q));
  }
};

using ZMatrix = ZMatrixT<double>;

}  // namespace alab
