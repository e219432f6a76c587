#ifndef NDOPO_STEADY_STATE_HPP
#define NDOPO_STEADY_STATE_HPP

#include <optional>
#include <vector>

#include "ndopo/model.hpp"

namespace ndopo {

struct SolverSettings {
    double ode_dt = 0.0;          // relaxation step; 0 means 0.01/max(gamma)
    double ode_max_time = 5000.0;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;

    static SolverSettings defaults(const SystemParams& p);
};

// Noise-free equations of motion for the doubled amplitude vector
// (a0, a0+, a1, a1+, a2, a2+):
//   da0/dt  = eps0 - g0 a0  - k a1  a2
//   da0+/dt = eps0 - g0 a0+ - k a1+ a2+
//   da1/dt  = eps1 - g1 a1  + k a0  a2+
//   da1+/dt = eps1 - g1 a1+ + k a0+ a2
//   da2/dt  =      - g2 a2  + k a0  a1+
//   da2+/dt =      - g2 a2+ + k a0+ a1
Vec6c semiclassical_drift(const SystemParams& p, const Vec6c& a);

// Fixed point of the drift. Without a seed: RK4 relaxation from the origin
// until the drift norm is small, then Newton polishing with the analytic
// Jacobian down to newton_tol. With a seed (sweep continuation) Newton runs
// first and relaxation serves as the fallback. Throws ConvergenceError
// ("no convergence") when both budgets are exhausted and NumericsError
// ("nonphysical state") when amplitudes leave the finite range.
SteadyState solve_steady_state(const SystemParams& p, const SolverSettings& s,
                               const std::optional<Vec6c>& seed = std::nullopt);

// Ascending coefficients c0..c5 of the real polynomial in a0 obtained from
// the all-real steady-state branch by eliminating
//   a2 = k a0 a1 / g2,   a1 = eps1 g2 / (g1 g2 - k^2 a0^2):
//   (g0 a0 - eps0)(g1 g2 - k^2 a0^2)^2 + k^2 g2 eps1^2 a0 = 0
std::array<double, 6> quintic_coefficients(const SystemParams& p);

// All real steady states found from the quintic, sorted by a0, each with a
// verified drift residual below 1e-8 and its own stability flag. This is an
// independent route kept free of solve_steady_state internals. Throws
// NumericsError("no real root") if nothing survives (not expected for
// physical parameters).
std::vector<SteadyState> steady_state_oracle(const SystemParams& p);

// Branch selection among oracle roots: stable roots only, closest a0 to a
// previous sweep point when given, otherwise closest to the empty-cavity
// value eps0/gamma0.
std::optional<SteadyState> physical_root(const std::vector<SteadyState>& roots,
                                         const SystemParams& p,
                                         std::optional<double> previous_alpha0 = std::nullopt);

}  // namespace ndopo

#endif
