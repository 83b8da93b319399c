#pragma once

// Grid verification of Nash optimality and the general (asymmetric) damped
// best-response solver. Neither is on the training path; they back the
// oracle suites and experimentation.

#include "alab/contract.hpp"

namespace alab {

// True iff no unilateral grid deviation of (mu, lambda) improves F^i by more
// than tol for either maker, holding the opponent fixed. F^i is additive in
// (mu^i, lambda^i), so the 2-D grid maximum reduces to two axis scans.
bool verify_nash(const MarketState& s, const ZMatrix& Z, const ControlPair& ctrl,
                 const ModelParams& pr, double mu_grid_step, double tol,
                 double lam_grid_step = 0.0, double* worst_improvement = nullptr);

// Damped iterated best response for general (untied) Z. Returns the controls
// on convergence of the combined-spread iteration; throws EquilibriumNotFound
// if the iteration does not settle within max_iters.
ControlPair solve_nash_general(const MarketState& s, const ZMatrix& Z, const ModelParams& pr,
                               int max_iters = 200, double tol = 1e-8, double damping = 0.5);

}  // namespace alab
