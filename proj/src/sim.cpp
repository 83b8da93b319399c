#include "alab/sim.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>
#include <thread>

namespace alab {

namespace {

int resolve_threads(int requested, int m) {
  int t = requested;
  if (t <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    t = hw ? static_cast<int>(hw) : 1;
  }
  t = std::min({t, m, 16});
  return std::max(t, 1);
}

}  // namespace

PathBatch simulate_batch(const PolicyFn& policy, const ModelParams& pr, int m,
                         std::uint64_t seed, bool record_trajectories, SimOptions opt,
                         int threads) {
  if (m < 1) throw std::invalid_argument("simulate_batch: m must be >= 1");
  if (record_trajectories && m > 4096) {
    throw std::invalid_argument("simulate_batch: trajectory recording supports m <= 4096");
  }
  if (opt.replay_indicators || opt.record_indicators) {
    throw std::invalid_argument("simulate_batch: indicator replay is per-path only");
  }

  PathBatch batch;
  batch.m = m;
  batch.paths.resize(m);
  opt.record_trajectories = record_trajectories;

  std::vector<std::vector<double>> rowbufs;
  if (record_trajectories) rowbufs.resize(m);
  std::vector<PathOutcome<double>> outcomes(m);

  // first failing path (lowest index) wins, independent of scheduling
  std::vector<std::exception_ptr> errors(m, nullptr);

  auto run_range = [&](int worker, int stride) {
    for (int k = worker; k < m; k += stride) {
      PathRng rng(substream_seed(seed, kStreamPath, static_cast<std::uint64_t>(k)));
      try {
        outcomes[k] = simulate_path<double>(policy, pr, rng, opt,
                                            record_trajectories ? &rowbufs[k] : nullptr, k);
      } catch (...) {
        errors[k] = std::current_exception();
        return;
      }
    }
  };

  const int nthreads = resolve_threads(threads, m);
  if (nthreads == 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(run_range, w, nthreads);
    for (auto& th : pool) th.join();
  }

  for (int k = 0; k < m; ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
  }

  if (record_trajectories) batch.traj.init(pr.n_steps + 1);
  batch.has_traj = record_trajectories;

  for (int k = 0; k < m; ++k) {
    const auto& o = outcomes[k];
    PathTerminal& t = batch.paths[k];
    t.failed = o.failed ? 1 : 0;
    t.fail_step = o.fail_step;
    if (o.failed) {
      ++batch.n_failed;
      continue;
    }
    t.pcl_T = o.pcl;
    t.pstar_T = o.state.x3;
    t.x1_T = o.state.x1;
    t.x2_T = o.state.x2;
    t.y_p_T = o.Y.p;
    t.y_q_T = o.Y.q;
    t.g_p_T = o.g_p;
    t.g_q_T = o.g_q;
    t.pen_p = o.pen_p;
    t.pen_q = o.pen_q;
    t.mart_p = o.mart_p;
    t.mart_q = o.mart_q;
    batch.diag.mu_clip_steps += o.diag.mu_clip_steps;
    batch.diag.lam_clip_steps += o.diag.lam_clip_steps;
    batch.diag.fallback_steps += o.diag.fallback_steps;
    if (record_trajectories) batch.traj.merge_path(rowbufs[k]);
  }
  return batch;
}

}  // namespace alab
