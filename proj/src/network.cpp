#include "alab/network.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "alab/rng.hpp"

namespace alab {

PolicyNetwork PolicyNetwork::uniform_init(std::uint64_t seed) {
  PolicyNetwork net;
  PathRng rng(seed);
  for (auto& v : net.w) v = rng.uniform() - 0.5;
  return net;
}

void PolicyNetwork::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write network checkpoint: " + path);
  os << "auctionlab-net 1\n";
  os << kNetInputDim << ' ' << kNetHidden << ' ' << kNetOutputDim << '\n';
  char buf[40];
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", w[i]);
    os << buf << ((i + 1) % 8 == 0 ? '\n' : ' ');
  }
  os << '\n';
}

PolicyNetwork PolicyNetwork::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read network checkpoint: " + path);
  std::string magic;
  int version = 0, in = 0, hid = 0, out = 0;
  is >> magic >> version >> in >> hid >> out;
  if (magic != "auctionlab-net" || version != 1 || in != kNetInputDim || hid != kNetHidden ||
      out != kNetOutputDim) {
    throw std::runtime_error("bad network checkpoint header: " + path);
  }
  PolicyNetwork net;
  for (auto& v : net.w) {
    if (!(is >> v)) throw std::runtime_error("truncated network checkpoint: " + path);
  }
  return net;
}

}  // namespace alab
