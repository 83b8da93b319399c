// auctionlab: batch-auction rebate laboratory.
//
//   auctionlab run -c config.toml [--out DIR] [--seed N] [--emit-trajectories 0|1]
//   auctionlab sweep -c config.toml [--out DIR] [--seed N]
//   auctionlab calibrate prices.csv [--bar-interval B]
//   auctionlab verify [--full]

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "alab/checks.hpp"
#include "alab/io.hpp"

namespace {

int run_checks(bool full) {
  const auto results = full ? alab::checks::run_full() : alab::checks::run_quick();
  int failed = 0;
  for (const auto& r : results) {
    std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.pass) ++failed;
  }
  std::printf("%zu checks, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch-auction rebate laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int emit_traj = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "run configuration file")->required();
    cmd->add_option("-o,--out", out_dir, "output directory (default: config, then $AUCTIONLAB_OUT)");
    cmd->add_option("-s,--seed", seed_override, "override the run seed")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--emit-trajectories", emit_traj, "override trajectory emission (0 or 1)");
  };

  CLI::App* run = app.add_subcommand("run", "fee sweep, series emission and baseline comparison");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "fee sweep only");
  add_common(sweep);

  std::string price_csv;
  double bar_interval = 1.0;
  CLI::App* calibrate = app.add_subcommand("calibrate", "estimate P0* and sigma from closes");
  calibrate->add_option("csv", price_csv, "price CSV with date and close columns")->required();
  calibrate->add_option("--bar-interval", bar_interval, "bar length in model time units");

  bool full_checks = false;
  CLI::App* verify = app.add_subcommand("verify", "run the oracle and property suites");
  verify->add_flag("--full", full_checks, "include the Monte Carlo and training criteria");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(calibrate)) {
      const auto cal = alab::calibrate_prices(price_csv, bar_interval);
      std::printf("rows: %d\nP0_star: %.10g\nsigma: %.10g\n", cal.rows, cal.P0_star, cal.sigma);
      return 0;
    }
    if (app.got_subcommand(verify)) {
      return run_checks(full_checks);
    }

    alab::RunConfig cfg = alab::parse_run_config_file(config_path);
    if (seed_given) {
      cfg.market.rng_seed = seed_override;
      cfg.train.seed = seed_override;
    }
    if (emit_traj >= 0) cfg.output.emit_trajectories = emit_traj != 0;
    const std::string dir = alab::resolve_output_dir(cfg, out_dir);
    return alab::run_experiment(cfg, dir, std::cout, app.got_subcommand(sweep));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
