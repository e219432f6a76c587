#ifndef NDOPO_MODEL_HPP
#define NDOPO_MODEL_HPP

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

// Shared types for the three-mode cavity model: a pump mode (0) driving two
// downconverted modes (1, 2) through a chi^(2) coupling, with an injected
// signal at mode 1. All rates and amplitudes are dimensionless, expressed in
// units of the signal loss rate gamma_1.
namespace ndopo {

using Complex = std::complex<double>;
using Vec3c = Eigen::Vector3cd;
using Vec6c = Eigen::Matrix<Complex, 6, 1>;
using Mat3d = Eigen::Matrix3d;
using Mat6c = Eigen::Matrix<Complex, 6, 6>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Bad user-supplied parameters or config files.
struct ConfigError : Error {
    using Error::Error;
};
// Iterative solver exhausted its budget.
struct ConvergenceError : Error {
    using Error::Error;
};
// Singular systems, consistency-check failures, instabilities.
struct NumericsError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

// Cavity loss rates gamma_i, coupling kappa and the two real nonnegative
// drive amplitudes. Drives with a complex phase are outside this version's
// scope and are rejected at validation.
struct SystemParams {
    std::array<double, 3> gamma{1.0, 1.0, 1.0};
    double kappa = 0.0;
    double eps0 = 0.0;
    double eps1 = 0.0;
};

// Throws ConfigError("invalid configuration: ...") unless all gamma and
// kappa are positive, both eps are nonnegative and everything is finite.
// Returns its argument unchanged, so it is idempotent.
SystemParams validate_params(const SystemParams& p);

double max_gamma(const SystemParams& p);

// Row/column of the fluctuation vector (da0, da0+, da1, da1+, da2, da2+)
// for a given mode and conjugation flag. 1-based, to match the printed
// matrix layout; subtract one when indexing Eigen objects.
int phase_space_index(int mode, bool conjugate);

// Mean intracavity amplitudes with the residual drift norm and the result
// of the linear stability check.
struct SteadyState {
    Vec3c alpha = Vec3c::Zero();
    double residual = 0.0;
    bool stable = false;
};

// (a0, a0*, a1, a1*, a2, a2*): the doubled phase-space point for a
// classical state where the conjugate variables equal complex conjugates.
Vec6c doubled(const Vec3c& alpha);

}  // namespace ndopo

#endif
