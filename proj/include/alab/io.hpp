#pragma once

// Experiment driver and file emission: fee-sweep CSV, per-panel trajectory
// series, run manifest, and the price-series calibration helper. All CSV
// headers and numeric formatting are fixed; identical (config, seed) runs
// produce byte-identical files.

#include <ostream>
#include <string>

#include "alab/config.hpp"
#include "alab/sim.hpp"
#include "alab/sweep.hpp"

namespace alab {

struct MalformedInput : std::runtime_error {
  MalformedInput(const std::string& msg, int row)
      : std::runtime_error("row " + std::to_string(row) + ": " + msg), row(row) {}
  int row;
};

struct CalibrationResult {
  double P0_star = 0.0;
  double sigma = 0.0;
  int rows = 0;
};

// P0* = last close; sigma = sample standard deviation of close-to-close
// increments rescaled by 1/sqrt(bar_interval) to the model's unit time.
CalibrationResult calibrate_prices(const std::string& csv_path, double bar_interval);

void write_sweep_csv(const std::string& path, const SweepResult& sweep);
void write_series_csvs(const std::string& dir, const TrajectoryStats& traj,
                       const ModelParams& pr);
void write_loss_history_csv(const std::string& path, const std::vector<double>& loss,
                            const std::vector<int>& failed);

// Full pipeline: sweep (or a single fee point), series emission at the
// selected fee, baseline comparison and manifest. Returns a process exit
// status and logs one line per stage.
int run_experiment(const RunConfig& cfg, const std::string& out_dir, std::ostream& log,
                   bool sweep_only = false);

std::string resolve_output_dir(const RunConfig& cfg, const std::string& cli_override);

}  // namespace alab
