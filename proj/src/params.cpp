#include "alab/params.hpp"

#include <sstream>
#include <stdexcept>

namespace alab {

std::vector<std::string> ModelParams::errors() const {
  std::vector<std::string> out;
  auto bad = [&out](const std::string& msg) { out.push_back(msg); };
  if (!(T > 0.0)) bad("T must be > 0");
  if (n_steps < 1) bad("n_steps must be >= 1");
  if (!(K0 > 0.0) || !(Kp > 0.0) || !(Kq > 0.0)) bad("K0, Kp, Kq must be > 0");
  if (!(sigma > 0.0)) bad("sigma must be > 0");
  if (lambda0 < 0.0) bad("lambda0 must be >= 0");
  if (lambda_inf < lambda0) bad("lambda_inf must be >= lambda0");
  if (!(mu_inf >= 0.0)) bad("mu_inf must be >= 0");
  if (c < 0.0) bad("c must be >= 0");
  if (d < 0.0) bad("d must be >= 0");
  if (epsilon < 0.0) bad("epsilon must be >= 0");
  if (v_a < 0.0 || v_b < 0.0) bad("order sizes must be >= 0");
  return out;
}

std::vector<std::string> ModelParams::warnings() const {
  std::vector<std::string> out;
  if (T > 0.0 && n_steps >= 1 && lambda_inf * dt() >= 1.0) {
    std::ostringstream os;
    os << "lambda_inf * dt = " << lambda_inf * dt()
       << " >= 1: per-step jump probabilities are clamped to 1";
    out.push_back(os.str());
  }
  return out;
}

void ModelParams::require_valid() const {
  const auto errs = errors();
  if (errs.empty()) return;
  std::string joined;
  for (const auto& e : errs) {
    if (!joined.empty()) joined += "; ";
    joined += e;
  }
  throw std::invalid_argument("invalid ModelParams: " + joined);
}

ModelParams ModelParams::apple() {
  ModelParams p;
  p.P0_star = 184.39;
  p.sigma = 1.76;
  return p;
}

ModelParams ModelParams::alphabet() {
  ModelParams p;
  p.P0_star = 134.24;
  p.sigma = 2.11;
  return p;
}

}  // namespace alab
