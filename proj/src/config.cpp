#include "alab/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace alab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// strips a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

struct Value {
  std::string raw;
  int line;

  double as_double() const {
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0') throw ConfigError("expected a number: " + raw, line);
    return v;
  }
  long long as_int() const {
    char* end = nullptr;
    const long long v = std::strtoll(raw.c_str(), &end, 10);
    if (end == raw.c_str() || *end != '\0') {
      throw ConfigError("expected an integer: " + raw, line);
    }
    return v;
  }
  std::uint64_t as_u64() const {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
    if (end == raw.c_str() || *end != '\0') {
      throw ConfigError("expected an unsigned integer: " + raw, line);
    }
    return v;
  }
  bool as_bool() const {
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ConfigError("expected true or false: " + raw, line);
  }
  std::string as_string() const {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
      return raw.substr(1, raw.size() - 2);
    }
    throw ConfigError("expected a quoted string: " + raw, line);
  }
  std::vector<double> as_double_array() const {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
      throw ConfigError("expected an array [..]: " + raw, line);
    }
    std::vector<double> out;
    std::string body = raw.substr(1, raw.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0') {
        throw ConfigError("bad array element: " + item, line);
      }
      out.push_back(v);
    }
    return out;
  }
};

}  // namespace

RunConfig parse_run_config_text(const std::string& text) {
  RunConfig cfg;
  bool train_seed_set = false;
  bool train_epsilon_set = false;

  std::istringstream in(text);
  std::string rawline;
  std::string section;
  int lineno = 0;

  while (std::getline(in, rawline)) {
    ++lineno;
    const std::string line = trim(strip_comment(rawline));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "market" && section != "train" && section != "sweep" &&
          section != "output" && section != "calibrate") {
        throw ConfigError("unknown section [" + section + "]", lineno);
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", lineno);
    const std::string key = trim(line.substr(0, eq));
    const Value val{trim(line.substr(eq + 1)), lineno};
    if (key.empty()) throw ConfigError("empty key", lineno);
    if (section.empty()) throw ConfigError("key outside any section: " + key, lineno);

    auto unknown = [&]() -> ConfigError {
      return ConfigError("unknown key '" + key + "' in [" + section + "]", lineno);
    };

    if (section == "market") {
      ModelParams& m = cfg.market;
      if (key == "T") m.T = val.as_double();
      else if (key == "n_steps") m.n_steps = static_cast<int>(val.as_int());
      else if (key == "K0") m.K0 = val.as_double();
      else if (key == "Kp") m.Kp = val.as_double();
      else if (key == "Kq") m.Kq = val.as_double();
      else if (key == "P0_star") m.P0_star = val.as_double();
      else if (key == "sigma") m.sigma = val.as_double();
      else if (key == "lambda0") m.lambda0 = val.as_double();
      else if (key == "lambda_inf") m.lambda_inf = val.as_double();
      else if (key == "mu_inf") m.mu_inf = val.as_double();
      else if (key == "c") m.c = val.as_double();
      else if (key == "v_a") m.v_a = val.as_double();
      else if (key == "v_b") m.v_b = val.as_double();
      else if (key == "d") m.d = val.as_double();
      else if (key == "epsilon") m.epsilon = val.as_double();
      else if (key == "R0_p") m.R0_p = val.as_double();
      else if (key == "R0_q") m.R0_q = val.as_double();
      else if (key == "rng_seed") m.rng_seed = val.as_u64();
      else throw unknown();
    } else if (section == "train") {
      TrainConfig& t = cfg.train;
      if (key == "learning_rate") t.learning_rate = val.as_double();
      else if (key == "iterations") t.iterations = static_cast<int>(val.as_int());
      else if (key == "batch_m") t.batch_m = static_cast<int>(val.as_int());
      else if (key == "epsilon") { t.epsilon = val.as_double(); train_epsilon_set = true; }
      else if (key == "seed") { t.seed = val.as_u64(); train_seed_set = true; }
      else if (key == "adam_beta1") t.adam_beta1 = val.as_double();
      else if (key == "adam_beta2") t.adam_beta2 = val.as_double();
      else if (key == "adam_eps") t.adam_eps = val.as_double();
      else if (key == "threads") t.threads = static_cast<int>(val.as_int());
      else throw unknown();
    } else if (section == "sweep") {
      if (key == "enabled") cfg.sweep.enabled = val.as_bool();
      else if (key == "grid") cfg.sweep.grid = val.as_double_array();
      else if (key == "eval_m") cfg.sweep.eval_m = static_cast<int>(val.as_int());
      else throw unknown();
    } else if (section == "output") {
      if (key == "dir") cfg.output.dir = val.as_string();
      else if (key == "emit_trajectories") cfg.output.emit_trajectories = val.as_bool();
      else throw unknown();
    } else {  // calibrate
      if (key == "price_csv") cfg.calibrate.price_csv = val.as_string();
      else if (key == "bar_interval") cfg.calibrate.bar_interval = val.as_double();
      else throw unknown();
    }
  }

  if (!train_seed_set) cfg.train.seed = cfg.market.rng_seed;
  if (!train_epsilon_set) cfg.train.epsilon = cfg.market.epsilon;
  return cfg;
}

RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_run_config_text(ss.str());
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_run_config(const RunConfig& cfg) {
  std::ostringstream os;
  const ModelParams& m = cfg.market;
  os << "[market]\n";
  os << "T = " << fmt(m.T) << "\n";
  os << "n_steps = " << m.n_steps << "\n";
  os << "K0 = " << fmt(m.K0) << "\n";
  os << "Kp = " << fmt(m.Kp) << "\n";
  os << "Kq = " << fmt(m.Kq) << "\n";
  os << "P0_star = " << fmt(m.P0_star) << "\n";
  os << "sigma = " << fmt(m.sigma) << "\n";
  os << "lambda0 = " << fmt(m.lambda0) << "\n";
  os << "lambda_inf = " << fmt(m.lambda_inf) << "\n";
  os << "mu_inf = " << fmt(m.mu_inf) << "\n";
  os << "c = " << fmt(m.c) << "\n";
  os << "v_a = " << fmt(m.v_a) << "\n";
  os << "v_b = " << fmt(m.v_b) << "\n";
  os << "d = " << fmt(m.d) << "\n";
  os << "epsilon = " << fmt(m.epsilon) << "\n";
  os << "R0_p = " << fmt(m.R0_p) << "\n";
  os << "R0_q = " << fmt(m.R0_q) << "\n";
  os << "rng_seed = " << m.rng_seed << "\n";
  const TrainConfig& t = cfg.train;
  os << "\n[train]\n";
  os << "learning_rate = " << fmt(t.learning_rate) << "\n";
  os << "iterations = " << t.iterations << "\n";
  os << "batch_m = " << t.batch_m << "\n";
  os << "epsilon = " << fmt(t.epsilon) << "\n";
  os << "seed = " << t.seed << "\n";
  os << "adam_beta1 = " << fmt(t.adam_beta1) << "\n";
  os << "adam_beta2 = " << fmt(t.adam_beta2) << "\n";
  os << "adam_eps = " << fmt(t.adam_eps) << "\n";
  os << "threads = " << t.threads << "\n";
  os << "\n[sweep]\n";
  os << "enabled = " << (cfg.sweep.enabled ? "true" : "false") << "\n";
  os << "grid = [";
  for (std::size_t i = 0; i < cfg.sweep.grid.size(); ++i) {
    os << (i ? ", " : "") << fmt(cfg.sweep.grid[i]);
  }
  os << "]\n";
  os << "eval_m = " << cfg.sweep.eval_m << "\n";
  os << "\n[output]\n";
  os << "dir = \"" << cfg.output.dir << "\"\n";
  os << "emit_trajectories = " << (cfg.output.emit_trajectories ? "true" : "false") << "\n";
  os << "\n[calibrate]\n";
  os << "price_csv = \"" << cfg.calibrate.price_csv << "\"\n";
  os << "bar_interval = " << fmt(cfg.calibrate.bar_interval) << "\n";
  return os.str();
}

}  // namespace alab
