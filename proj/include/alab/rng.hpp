#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace alab {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based substream split: a (master, stream, index) triple always
// yields the same engine seed, independent of execution order. The exact
// mixing is part of the reproducibility contract (docs/formats.md).
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) {
  const std::uint64_t s = mix64(master ^ (0xA0761D6478BD642FULL * (stream + 1)));
  return mix64(s ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

// Stream tags for substream_seed.
inline constexpr std::uint64_t kStreamPath = 0;
inline constexpr std::uint64_t kStreamWeightInit = 1;
inline constexpr std::uint64_t kStreamTrainIter = 2;
inline constexpr std::uint64_t kStreamEval = 3;
inline constexpr std::uint64_t kStreamSweep = 4;

// Randomness consumed by one simulation step, in draw order.
struct StepRandomness {
  double gw = 0.0, gp = 0.0, gq = 0.0;  // Gaussians for W, W^p, W^q
  double ua = 0.0, ub = 0.0;            // jump thinning uniforms, investors
  double up = 0.0, uq = 0.0;            // jump thinning uniforms, makers
  double ma = 0.0, mb = 0.0;            // cancellation marks A, B
};

// mt19937_64 behind explicit uniform/Gaussian mappings, so the byte-level
// stream does not depend on library distribution internals.
class PathRng {
 public:
  explicit PathRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Box-Muller, cosine branch, two uniforms per Gaussian (no caching).
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(6.283185307179586476925287 * u2);
  }

  // Fixed per-step draw order: gw, gp, gq, ua, ub, up, uq, ma, mb.
  StepRandomness step_draws() {
    StepRandomness r;
    r.gw = gaussian();
    r.gp = gaussian();
    r.gq = gaussian();
    r.ua = uniform();
    r.ub = uniform();
    r.up = uniform();
    r.uq = uniform();
    r.ma = uniform();
    r.mb = uniform();
    return r;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace alab
