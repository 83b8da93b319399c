#pragma once

// Run configuration: a single TOML-style file with [market], [train],
// [sweep], [output] and [calibrate] tables. Unknown sections or keys are
// rejected. The exact grammar is documented in docs/formats.md.

#include <string>
#include <vector>

#include "alab/params.hpp"
#include "alab/sweep.hpp"
#include "alab/train.hpp"

namespace alab {

struct RunConfig {
  ModelParams market;
  TrainConfig train;
  struct SweepCfg {
    bool enabled = true;
    std::vector<double> grid = default_fee_grid();
    int eval_m = 256;
  } sweep;
  struct OutputCfg {
    std::string dir;  // empty: $AUCTIONLAB_OUT or ./out
    bool emit_trajectories = true;
  } output;
  struct CalibrateCfg {
    std::string price_csv;  // optional input
    double bar_interval = 1.0;
  } calibrate;
};

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& msg, int line)
      : std::runtime_error("config line " + std::to_string(line) + ": " + msg), line(line) {}
  int line;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig parse_run_config_file(const std::string& path);

// Canonical text round-trip: parse(serialize(cfg)) == cfg. Used as the
// manifest's config echo.
std::string serialize_run_config(const RunConfig& cfg);

}  // namespace alab
