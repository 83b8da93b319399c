#include "alab/contract.hpp"

#include <cmath>
#include <stdexcept>

#include "alab/sim.hpp"

namespace alab {

namespace {

Estimate mean_se(const PathBatch& b, double (*f)(const PathTerminal&, const void*),
                 const void* ctx) {
  double sum = 0.0, sumsq = 0.0;
  long n = 0;
  for (const auto& p : b.paths) {
    if (p.failed) continue;
    const double v = f(p, ctx);
    sum += v;
    sumsq += v * v;
    ++n;
  }
  Estimate e;
  if (n == 0) return e;
  e.mean = sum / n;
  if (n > 1) {
    double var = (sumsq - n * e.mean * e.mean) / (n - 1);
    if (var < 0.0) var = 0.0;
    e.se = std::sqrt(var / n);
  }
  return e;
}

}  // namespace

Estimate trader_value_V0(const PathBatch& batch, Maker maker, const ModelParams& pr) {
  if (batch.m < 1) throw std::invalid_argument("trader_value_V0: empty batch");
  struct Ctx {
    double r0;
    Maker maker;
  } ctx{maker == Maker::p ? pr.R0_p : pr.R0_q, maker};
  return mean_se(
      batch,
      [](const PathTerminal& p, const void* c) {
        const auto* ctx = static_cast<const Ctx*>(c);
        if (ctx->maker == Maker::p) return p.g_p_T + ctx->r0 + p.y_p_T - p.pen_p;
        return p.g_q_T + ctx->r0 + p.y_q_T - p.pen_q;
      },
      &ctx);
}

RebateReport exchange_objective(const PathBatch& batch, double d, const ModelParams& pr) {
  if (batch.m < 1) throw std::invalid_argument("exchange_objective: empty batch");
  RebateReport r;
  r.m = batch.m;
  r.n_failed = batch.n_failed;
  r.fallback_used = batch.diag.fallback_steps > 0;

  struct Ctx {
    double d;
    double r0_sum;
    double r0_p, r0_q;
  } ctx{d, pr.R0_p + pr.R0_q, pr.R0_p, pr.R0_q};

  r.spread_sq = mean_se(
      batch,
      [](const PathTerminal& p, const void*) {
        const double gap = p.pcl_T - p.pstar_T;
        return gap * gap;
      },
      nullptr);
  r.fee_revenue = mean_se(
      batch,
      [](const PathTerminal& p, const void* c) {
        return static_cast<const Ctx*>(c)->d * (p.x1_T + p.x2_T);
      },
      &ctx);
  r.xi_p = mean_se(
      batch,
      [](const PathTerminal& p, const void* c) {
        return static_cast<const Ctx*>(c)->r0_p + p.y_p_T;
      },
      &ctx);
  r.xi_q = mean_se(
      batch,
      [](const PathTerminal& p, const void* c) {
        return static_cast<const Ctx*>(c)->r0_q + p.y_q_T;
      },
      &ctx);
  // rho on the same sample, so the decomposition identity is exact
  r.rho = mean_se(
      batch,
      [](const PathTerminal& p, const void* c) {
        const auto* ctx = static_cast<const Ctx*>(c);
        const double gap = p.pcl_T - p.pstar_T;
        return ctx->r0_sum + gap * gap + p.y_p_T + p.y_q_T - ctx->d * (p.x1_T + p.x2_T);
      },
      &ctx);

  r.V0_p = trader_value_V0(batch, Maker::p, pr);
  r.V0_q = trader_value_V0(batch, Maker::q, pr);
  r.penalty_active = r.V0_p.mean < pr.R0_p || r.V0_q.mean < pr.R0_q;
  return r;
}

}  // namespace alab
