#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "alab/network.hpp"
#include "alab/rng.hpp"

using namespace alab;

TEST_CASE("zero weights put every output at the midpoint 10") {
  PolicyNetwork net;  // all zeros
  std::array<double, kNetInputDim> feat{};
  feat.fill(0.37);
  const auto out = policy_forward(net.w.data(), feat);
  for (const double v : out) CHECK(v == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("outputs stay inside (0, 20) and repeat bit-for-bit") {
  PathRng rng(substream_seed(5, 1, 0));
  for (int trial = 0; trial < 50; ++trial) {
    const PolicyNetwork net = PolicyNetwork::uniform_init(rng.uniform() * 1e9);
    std::array<double, kNetInputDim> feat{};
    for (auto& f : feat) f = -3.0 + 6.0 * rng.uniform();
    const auto a = policy_forward(net.w.data(), feat);
    const auto b = policy_forward(net.w.data(), feat);
    for (int i = 0; i < kNetOutputDim; ++i) {
      CHECK(a[i] > 0.0);
      CHECK(a[i] < 20.0);
      CHECK(a[i] == b[i]);
    }
  }
}

TEST_CASE("tied Z broadcast signs and swaps") {
  std::array<double, 7> o{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
  const ZMatrix Z = ZMatrix::tied_from_outputs(o);
  CHECK(Z(1, Maker::p) == -1.0);
  CHECK(Z(2, Maker::p) == -2.0);
  CHECK(Z(3, Maker::p) == 3.0);
  CHECK(Z(4, Maker::p) == 4.0);
  CHECK(Z(1, Maker::q) == -1.0);
  CHECK(Z(4, Maker::q) == 6.0);  // own-arrival slot swaps with the opponent's
  CHECK(Z(6, Maker::q) == 4.0);
  CHECK(Z(5, Maker::q) == 7.0);
  CHECK(Z(7, Maker::q) == 5.0);
  CHECK(Z.is_symmetric_tied());

  ZMatrix broken = Z;
  broken(4, Maker::q) = 0.0;
  CHECK(!broken.is_symmetric_tied());
}

TEST_CASE("checkpoint round-trip preserves every weight bit") {
  const PolicyNetwork net = PolicyNetwork::uniform_init(987654321);
  const auto path =
      (std::filesystem::temp_directory_path() / "alab_net_roundtrip.txt").string();
  net.save(path);
  const PolicyNetwork back = PolicyNetwork::load(path);
  REQUIRE(back.w.size() == net.w.size());
  for (std::size_t i = 0; i < net.w.size(); ++i) CHECK(back.w[i] == net.w[i]);
  std::filesystem::remove(path);
}

TEST_CASE("feature scales are finite and positive") {
  ModelParams pr;
  const FeatureScaler sc = FeatureScaler::from_params(pr);
  for (const double s : sc.scale) {
    CHECK(std::isfinite(s));
    CHECK(s > 0.0);
  }
}

TEST_CASE("network policy output respects the sign map at any state") {
  ModelParams pr;
  const PolicyNetwork net = PolicyNetwork::uniform_init(5);
  const FeatureScaler sc = FeatureScaler::from_params(pr);
  NetworkPolicy<double> policy{net.w.data(), sc};
  const MarketState s = MarketState::initial(pr);
  const ZMatrix Z = policy(0.0, s, YPair{});
  CHECK(Z(1, Maker::p) < 0.0);
  CHECK(Z(1, Maker::p) > -20.0);
  CHECK(Z(2, Maker::p) < 0.0);
  for (int k = 3; k <= 7; ++k) {
    CHECK(Z(k, Maker::p) > 0.0);
    CHECK(Z(k, Maker::p) < 20.0);
  }
  CHECK(Z.is_symmetric_tied());
}
