#include "alab/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace alab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim_copy(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

CalibrationResult calibrate_prices(const std::string& csv_path, double bar_interval) {
  if (!(bar_interval > 0.0)) throw std::invalid_argument("bar_interval must be > 0");
  std::ifstream is(csv_path);
  if (!is) throw MalformedInput("cannot open " + csv_path, 0);

  std::string line;
  if (!std::getline(is, line)) throw MalformedInput("empty file", 1);
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw MalformedInput("need a date column and a close column", 1);

  int close_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (lower(header[i]) == "close") close_col = static_cast<int>(i);
  }
  if (close_col < 0) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (lower(header[i]).find("close") != std::string::npos) close_col = static_cast<int>(i);
    }
  }
  if (close_col < 0) throw MalformedInput("no close column in header", 1);

  std::vector<double> closes;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (trim_copy(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) <= close_col) {
      throw MalformedInput("missing close cell", row);
    }
    const std::string& cell = cells[close_col];
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0') {
      throw MalformedInput("bad close value '" + cell + "'", row);
    }
    closes.push_back(v);
  }
  if (closes.size() < 30) {
    throw MalformedInput("need at least 30 price rows, got " + std::to_string(closes.size()),
                         row);
  }

  CalibrationResult res;
  res.rows = static_cast<int>(closes.size());
  res.P0_star = closes.back();
  const std::size_t n = closes.size() - 1;  // increments
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += closes[i + 1] - closes[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dlt = closes[i + 1] - closes[i] - mean;
    ss += dlt * dlt;
  }
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  res.sigma = sd / std::sqrt(bar_interval);
  return res;
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "d,rho,rho_se,spread_sq,fee_revenue,penalty_active,failed\n";
  for (const auto& pt : sweep.points) {
    os << fmt(pt.d) << ',' << fmt(pt.rho.mean) << ',' << fmt(pt.rho.se) << ','
       << fmt(pt.spread_sq.mean) << ',' << fmt(pt.fee_revenue.mean) << ','
       << (pt.penalty_active ? 1 : 0) << ',' << (pt.failed ? 1 : 0) << '\n';
  }
}

namespace {

void write_series(const std::string& path, const TrajectoryStats& traj,
                  const ModelParams& pr, const std::string& header,
                  const std::vector<int>& cols) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << header << '\n';
  const double dt = pr.dt();
  for (int row = 0; row < traj.n_rows; ++row) {
    os << fmt(row * dt);
    for (int c : cols) os << ',' << fmt(traj.mean(row, c)) << ',' << fmt(traj.se(row, c));
    os << '\n';
  }
}

}  // namespace

void write_series_csvs(const std::string& dir, const TrajectoryStats& traj,
                       const ModelParams& pr) {
  write_series(dir + "/z_series.csv", traj, pr,
               "t,z1,z1_se,z2,z2_se,z3,z3_se,z4,z4_se,z5,z5_se,z6,z6_se,z7,z7_se",
               {kTrajZ1, kTrajZ2, kTrajZ3, kTrajZ4, kTrajZ5, kTrajZ6, kTrajZ7});
  write_series(dir + "/lambda_series.csv", traj, pr,
               "t,lambda_p,lambda_p_se,lambda_q,lambda_q_se", {kTrajLamP, kTrajLamQ});
  write_series(dir + "/mu_series.csv", traj, pr, "t,mu_p,mu_p_se,mu_q,mu_q_se",
               {kTrajMuP, kTrajMuQ});
  write_series(dir + "/investor_intensity_series.csv", traj, pr,
               "t,lambda_a,lambda_a_se,lambda_b,lambda_b_se", {kTrajLamA, kTrajLamB});
  write_series(dir + "/incentive_series.csv", traj, pr,
               "t,neg_int_F_p,neg_int_F_p_se,neg_int_F_q,neg_int_F_q_se,"
               "F_p,F_p_se,F_q,F_q_se",
               {kTrajNegIntFP, kTrajNegIntFQ, kTrajFP, kTrajFQ});
  write_series(dir + "/continuation_utility_series.csv", traj, pr,
               "t,Y_p,Y_p_se,Y_q,Y_q_se", {kTrajYP, kTrajYQ});
}

void write_loss_history_csv(const std::string& path, const std::vector<double>& loss,
                            const std::vector<int>& failed) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "iteration,loss,failed_paths\n";
  for (std::size_t i = 0; i < loss.size(); ++i) {
    os << i << ',' << fmt(loss[i]) << ',' << (i < failed.size() ? failed[i] : 0) << '\n';
  }
}

std::string resolve_output_dir(const RunConfig& cfg, const std::string& cli_override) {
  if (!cli_override.empty()) return cli_override;
  if (!cfg.output.dir.empty()) return cfg.output.dir;
  if (const char* env = std::getenv("AUCTIONLAB_OUT"); env && *env) return env;
  return "out";
}

namespace {

nlohmann::ordered_json report_json(const RebateReport& r) {
  nlohmann::ordered_json j;
  j["m"] = r.m;
  j["n_failed"] = r.n_failed;
  j["fallback_used"] = r.fallback_used;
  j["penalty_active"] = r.penalty_active;
  j["rho"] = r.rho.mean;
  j["rho_se"] = r.rho.se;
  j["spread_sq"] = r.spread_sq.mean;
  j["spread_sq_se"] = r.spread_sq.se;
  j["fee_revenue"] = r.fee_revenue.mean;
  j["xi_p"] = r.xi_p.mean;
  j["xi_q"] = r.xi_q.mean;
  j["V0_p"] = r.V0_p.mean;
  j["V0_p_se"] = r.V0_p.se;
  j["V0_q"] = r.V0_q.mean;
  j["V0_q_se"] = r.V0_q.se;
  return j;
}

}  // namespace

int run_experiment(const RunConfig& cfg, const std::string& out_dir, std::ostream& log,
                   bool sweep_only) {
  namespace fs = std::filesystem;
  ModelParams pr = cfg.market;
  pr.require_valid();
  fs::create_directories(out_dir);

  for (const auto& w : pr.warnings()) log << "warning: " << w << '\n';

  const std::vector<double> grid =
      cfg.sweep.enabled ? cfg.sweep.grid : std::vector<double>{pr.d};
  log << "sweep: " << grid.size() << " fee points, " << cfg.train.iterations
      << " training iterations each\n";
  const SweepResult sweep = sweep_fee(grid, cfg.train, cfg.sweep.eval_m, cfg.train.seed, pr);
  write_sweep_csv(out_dir + "/fee_sweep.csv", sweep);

  nlohmann::ordered_json manifest;
  manifest["tool"] = "auctionlab";
  manifest["version"] = "0.1.0";
  manifest["seed"] = cfg.train.seed;
  manifest["config"] = serialize_run_config(cfg);
  {
    const FeatureScaler sc = FeatureScaler::from_params(pr);
    manifest["feature_scales"] = sc.scale;
    manifest["feature_offsets"] = std::array<double, kNetInputDim>{};  // affine, all zero
  }
  manifest["warnings"] = pr.warnings();

  if (sweep.argmin < 0) {
    log << "error: every sweep point failed to train\n";
    manifest["d_hat"] = nullptr;
    std::ofstream(out_dir + "/manifest.json") << manifest.dump(2) << '\n';
    return 1;
  }

  const SweepPoint& best = sweep.points[sweep.argmin];
  log << "selected d_hat = " << best.d << " (interior: " << (sweep.argmin_interior ? "yes" : "no")
      << ")\n";
  manifest["d_hat"] = best.d;
  manifest["d_hat_interior"] = sweep.argmin_interior;

  best.net.save(out_dir + "/policy_net.txt");
  write_loss_history_csv(out_dir + "/loss_history.csv", best.loss_history,
                         best.failed_per_iter);

  if (!sweep_only && cfg.output.emit_trajectories) {
    ModelParams pr_hat = pr;
    pr_hat.d = best.d;
    SimOptions opt;
    opt.eq = EquilibriumHandling::Penalize;
    const int traj_m = std::min(cfg.sweep.eval_m, 4096);
    const PathBatch batch =
        simulate_batch(make_network_policy(best.net, pr_hat), pr_hat, traj_m,
                       substream_seed(cfg.train.seed, kStreamEval, 0xF16u), true, opt,
                       cfg.train.threads);
    write_series_csvs(out_dir, batch.traj, pr_hat);
    log << "series: " << batch.m - batch.n_failed << "/" << batch.m << " paths\n";
  }

  if (!sweep_only) {
    const BaselineComparison cmp =
        baseline_comparison(pr, cfg.sweep.eval_m, cfg.train.seed, best.net, best.d);
    manifest["baseline_no_incentive"] = report_json(cmp.no_incentive);
    manifest["with_incentive"] = report_json(cmp.with_incentive);
    log << "spread_sq: baseline " << cmp.no_incentive.spread_sq.mean << ", with incentive "
        << cmp.with_incentive.spread_sq.mean << '\n';
  }

  std::ofstream(out_dir + "/manifest.json") << manifest.dump(2) << '\n';
  return 0;
}

}  // namespace alab
