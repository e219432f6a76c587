#ifndef NDOPO_PP_ORACLE_HPP
#define NDOPO_PP_ORACLE_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ndopo/model.hpp"

// Stochastic verification paths: ensemble integration of the linearized
// fluctuation equations, full nonlinear phase-space trajectories, the
// stationary Lyapunov solution and periodogram spectrum estimates. These
// exist to cross-check the analytic engine and deliberately share as little
// code with it as possible.
namespace ndopo {

struct SdeSettings {
    double dt = 1e-3;
    double t_end = 20.0;
    int n_traj = 1000;
    std::uint64_t rng_seed = 1;
    double burn_in = 5.0;
};

// Deterministic per-trajectory generator derived from (seed, index), so
// ensemble results do not depend on scheduling.
std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t trajectory);

// B with B B^T = D (plain transpose). For the canonical four-entry diffusion
// the explicit 6x4 noise matrix from the phase-space equations is used;
// anything else falls back to a dense symmetric square root. The residual
// |BB^T - D| is verified to 1e-12 in either case.
Eigen::Matrix<Complex, 6, Eigen::Dynamic> noise_factor(const Mat6c& D);

// Unique sigma with A sigma + sigma A^T = D (the stationary second moments
// of d(da) = -A da dt + B dW). Throws NumericsError("no unique solution")
// when A and -A^T share an eigenvalue.
Mat6c solve_lyapunov(const Mat6c& A, const Mat6c& D);

struct CovarianceEstimate {
    Mat6c cov = Mat6c::Zero();
    Eigen::Matrix<double, 6, 6> se_re = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 6> se_im = Eigen::Matrix<double, 6, 6>::Zero();
    int n_traj = 0;
};

// Euler-Maruyama ensemble estimate of the stationary covariance <da da^T>
// with per-entry standard errors across trajectories.
CovarianceEstimate simulate_linearized_ou(const Mat6c& A, const Mat6c& D,
                                          const SdeSettings& s, int jobs = 1);

struct MeanEstimate {
    Vec3c mean = Vec3c::Zero();
    Eigen::Vector3d se_re = Eigen::Vector3d::Zero();
    Eigen::Vector3d se_im = Eigen::Vector3d::Zero();
    int n_traj = 0;
    double discard_fraction = 0.0;
};

// Full nonlinear phase-space ensemble from the origin; post-burn-in
// time-averaged means of (a0, a1, a2). Trajectories wandering past norm 1e6
// are discarded and counted; more than 1% discarded raises
// NumericsError("excessive divergence").
MeanEstimate simulate_positive_p(const SystemParams& p, const SdeSettings& s,
                                 int jobs = 1);

// Single deterministic path of the same integrator with noises zeroed
// (consistency hook against the relaxation integrator).
Vec6c positive_p_noise_free_path(const SystemParams& p, double dt, double t_end);

enum class Quadrature { X, Y };

struct SpectrumEstimate {
    std::vector<double> omega;
    std::vector<double> value;      // output-scaled, shot-noise included
    std::vector<double> std_error;
    int n_traj = 0;
    double parseval_gap = 0.0;  // worst relative gap of the periodogram identity
};

// Output spectral variance V(q_i, q_j)(w) estimated from Hann-windowed
// periodograms of linearized trajectories, with the same sqrt(gamma_i
// gamma_j) scaling and shot-noise offset as the analytic engine.
SpectrumEstimate estimate_output_spectrum(const Mat6c& A, const Mat6c& D,
                                          const SystemParams& p, const SdeSettings& s,
                                          std::pair<int, int> modes, Quadrature quad,
                                          std::span<const double> omegas, int jobs = 1);

struct OracleRow {
    std::string quantity;
    double estimate = 0.0;
    double std_error = 0.0;
    int n_traj = 0;
    double discard_fraction = 0.0;
};

void write_oracle_report(const std::vector<OracleRow>& rows, const std::string& path);

}  // namespace ndopo

#endif
