#pragma once

// The rebate policy: a fixed-size sigmoid MLP mapping normalized
// (t, X, Y, P) features to seven tied contract sensitivities, scaled by 20
// so every |z| stays below 20 and the spread condition is reachable.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "alab/params.hpp"
#include "alab/state.hpp"
#include "alab/zmatrix.hpp"

namespace alab {

inline constexpr int kNetInputDim = 12;  // t, x1..x7, Y^p, Y^q, p_p, p_q
inline constexpr int kNetHidden = 8;
inline constexpr int kNetOutputDim = 7;
inline constexpr double kNetOutputScale = 20.0;
inline constexpr int kNetParams =
    kNetHidden * kNetInputDim + kNetHidden + kNetOutputDim * kNetHidden + kNetOutputDim;

// Multiplicative feature normalization (offsets are zero); the constants are
// derived from the run parameters and echoed to the manifest.
struct FeatureScaler {
  std::array<double, kNetInputDim> scale{};

  static FeatureScaler from_params(const ModelParams& pr) {
    FeatureScaler f;
    const double events = std::max(1.0, pr.lambda0 * pr.T);
    const double y_scale = std::max({1.0, std::fabs(pr.R0_p), std::fabs(pr.R0_q)});
    f.scale[0] = 1.0 / pr.T;
    f.scale[1] = 1.0 / std::max(1.0, pr.v_a * events);
    f.scale[2] = 1.0 / std::max(1.0, pr.v_b * events);
    f.scale[3] = 1.0 / pr.P0_star;
    f.scale[4] = 1.0 / (events * pr.P0_star);
    f.scale[5] = 1.0 / events;
    f.scale[6] = 1.0 / (events * pr.P0_star);
    f.scale[7] = 1.0 / events;
    f.scale[8] = 1.0 / y_scale;
    f.scale[9] = 1.0 / y_scale;
    f.scale[10] = 1.0 / pr.P0_star;
    f.scale[11] = 1.0 / pr.P0_star;
    return f;
  }
};

// Weight layout: W1 (hidden x input, row-major), b1, W2 (output x hidden,
// row-major), b2.
struct PolicyNetwork {
  std::vector<double> w = std::vector<double>(kNetParams, 0.0);

  static PolicyNetwork uniform_init(std::uint64_t seed);

  void save(const std::string& path) const;
  static PolicyNetwork load(const std::string& path);
};

template <class R>
R net_sigmoid(const R& x) {
  using std::exp;
  return 1.0 / (1.0 + exp(-x));
}

// Forward pass over arbitrary scalar weights; every output lies in (0, 20).
template <class R>
std::array<R, kNetOutputDim> policy_forward(const R* w, const std::array<R, kNetInputDim>& feat) {
  const R* W1 = w;
  const R* b1 = w + kNetHidden * kNetInputDim;
  const R* W2 = b1 + kNetHidden;
  const R* b2 = W2 + kNetOutputDim * kNetHidden;

  std::array<R, kNetHidden> h;
  for (int i = 0; i < kNetHidden; ++i) {
    R acc = b1[i];
    const R* row = W1 + i * kNetInputDim;
    for (int j = 0; j < kNetInputDim; ++j) acc += row[j] * feat[j];
    h[i] = net_sigmoid(acc);
  }
  std::array<R, kNetOutputDim> out;
  for (int i = 0; i < kNetOutputDim; ++i) {
    R acc = b2[i];
    const R* row = W2 + i * kNetHidden;
    for (int j = 0; j < kNetHidden; ++j) acc += row[j] * h[j];
    out[i] = kNetOutputScale * net_sigmoid(acc);
  }
  return out;
}

// Policy functor querying the network at the current (t, state, Y) and
// broadcasting the seven outputs to the tied Z matrix.
template <class R>
struct NetworkPolicy {
  const R* weights = nullptr;
  FeatureScaler scaler;

  ZMatrixT<R> operator()(double t, const MarketStateT<R>& s, const YPairT<R>& Y) const {
    const auto& sc = scaler.scale;
    const std::array<R, kNetInputDim> feat = {
        R(t * sc[0]),
        R(s.x1 * sc[1]),
        R(s.x2 * sc[2]),
        R(s.x3 * sc[3]),
        s.x4 * sc[4],
        R(s.x5 * sc[5]),
        s.x6 * sc[6],
        R(s.x7 * sc[7]),
        Y.p * sc[8],
        Y.q * sc[9],
        s.p_p * sc[10],
        s.p_q * sc[11],
    };
    return ZMatrixT<R>::tied_from_outputs(policy_forward(weights, feat));
  }
};

}  // namespace alab
