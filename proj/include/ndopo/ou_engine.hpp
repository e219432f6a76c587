#ifndef NDOPO_OU_ENGINE_HPP
#define NDOPO_OU_ENGINE_HPP

#include "ndopo/model.hpp"

// Linearized fluctuation analysis around a steady state. Fluctuations obey
//   d(da) = -A da dt + B dW,   B B^T = D,
// in the fixed ordering (da0, da0+, da1, da1+, da2, da2+). A is stable when
// every eigenvalue has a positive real part; only then do the stationary
// spectra below exist.
namespace ndopo {

constexpr double kStabilityMargin = 1e-9;

struct StabilityReport {
    bool stable = false;
    // min |Re eigenvalue| within the margin of zero: formally unstable but
    // flagged so threshold points are distinguishable from hard instability.
    bool marginal = false;
    double min_real_part = 0.0;
    Vec6c eigenvalues = Vec6c::Zero();
};

// Drift matrix at an arbitrary doubled phase-space point; the conjugate
// entries of `a` stand in for the starred amplitudes. Equals minus the
// Jacobian of semiclassical_drift, which Newton reuses.
Mat6c drift_matrix_at(const SystemParams& p, const Vec6c& a);

Mat6c build_drift_matrix(const SystemParams& p, const SteadyState& ss);

// Four nonzero entries (1-based): D(3,5)=D(5,3)=kappa*a0, D(4,6)=D(6,4)=kappa*a0*.
Mat6c build_diffusion_matrix(const SystemParams& p, const SteadyState& ss);

StabilityReport check_stability(const Mat6c& A, double margin = kStabilityMargin);

struct DriftDiffusion {
    Mat6c A = Mat6c::Zero();
    Mat6c D = Mat6c::Zero();
    Vec6c eigenvalues_A = Vec6c::Zero();
    bool stable = false;
};

DriftDiffusion linearize(const SystemParams& p, const SteadyState& ss,
                         double margin = kStabilityMargin);

// Stationary spectrum S(w) = (A + i w)^-1 D (A^T - i w)^-1.
// Throws NumericsError("singular matrix") when the resolvent does not exist,
// which means the stability precondition was violated.
Mat6c intracavity_spectrum(const Mat6c& A, const Mat6c& D, double omega);

// Q S Q^T with Q block diagonal in q = [[1, 1], [-i, i]] per mode, mapping
// (da, da+) to the quadrature pair X = a + a*, Y = -i(a - a*).
Mat6c quadrature_spectrum(const Mat6c& S);

// Output spectral variances of a spectrum already in the quadrature basis:
//   VX(i,j) = delta_ij + sqrt(g_i g_j) (Sq_xi,xj + Sq_xj,xi),
// with xi = phase_space_index(i, false), and the analogous VY on the
// conjugate rows. Throws NumericsError("non-negligible imaginary part")
// if the symmetrized entries are not real to 1e-9.
struct OutputCovariances {
    Mat3d VX = Mat3d::Identity();
    Mat3d VY = Mat3d::Identity();
};

OutputCovariances output_covariances(const SystemParams& p, const Mat6c& Sq);

struct QuadratureSpectrum {
    double omega = 0.0;
    Mat6c Sq = Mat6c::Zero();
    Mat3d VX = Mat3d::Identity();
    Mat3d VY = Mat3d::Identity();
};

QuadratureSpectrum quadrature_spectrum_at(const SystemParams& p, const Mat6c& A,
                                          const Mat6c& D, double omega);

}  // namespace ndopo

#endif
