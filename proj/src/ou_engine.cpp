#include "ndopo/ou_engine.hpp"

#include <cmath>

namespace ndopo {
namespace {

Mat6c quadrature_transform() {
    Mat6c Q = Mat6c::Zero();
    const Complex mi(0.0, -1.0), pi(0.0, 1.0);
    for (int m = 0; m < 3; ++m) {
        Q(2 * m, 2 * m) = 1.0;
        Q(2 * m, 2 * m + 1) = 1.0;
        Q(2 * m + 1, 2 * m) = mi;
        Q(2 * m + 1, 2 * m + 1) = pi;
    }
    return Q;
}

}  // namespace

Mat6c drift_matrix_at(const SystemParams& p, const Vec6c& a) {
    const double g0 = p.gamma[0], g1 = p.gamma[1], g2 = p.gamma[2], k = p.kappa;
    const Complex a0 = a(0), a0s = a(1), a1 = a(2), a1s = a(3), a2 = a(4), a2s = a(5);
    Mat6c A = Mat6c::Zero();
    A(0, 0) = g0;
    A(0, 2) = k * a2;
    A(0, 4) = k * a1;
    A(1, 1) = g0;
    A(1, 3) = k * a2s;
    A(1, 5) = k * a1s;
    A(2, 0) = -k * a2s;
    A(2, 2) = g1;
    A(2, 5) = -k * a0;
    A(3, 1) = -k * a2;
    A(3, 3) = g1;
    A(3, 4) = -k * a0s;
    A(4, 0) = -k * a1s;
    A(4, 3) = -k * a0;
    A(4, 4) = g2;
    A(5, 1) = -k * a1;
    A(5, 2) = -k * a0s;
    A(5, 5) = g2;
    return A;
}

Mat6c build_drift_matrix(const SystemParams& p, const SteadyState& ss) {
    return drift_matrix_at(p, doubled(ss.alpha));
}

Mat6c build_diffusion_matrix(const SystemParams& p, const SteadyState& ss) {
    Mat6c D = Mat6c::Zero();
    const Complex c = p.kappa * ss.alpha(0);
    D(2, 4) = D(4, 2) = c;
    D(3, 5) = D(5, 3) = std::conj(c);
    return D;
}

StabilityReport check_stability(const Mat6c& A, double margin) {
    StabilityReport rep;
    Eigen::ComplexEigenSolver<Mat6c> es(A, /*computeEigenvectors=*/false);
    rep.eigenvalues = es.eigenvalues();
    rep.min_real_part = rep.eigenvalues.real().minCoeff();
    rep.stable = rep.min_real_part > margin;
    rep.marginal = std::abs(rep.min_real_part) <= margin;
    return rep;
}

DriftDiffusion linearize(const SystemParams& p, const SteadyState& ss, double margin) {
    DriftDiffusion dd;
    dd.A = build_drift_matrix(p, ss);
    dd.D = build_diffusion_matrix(p, ss);
    const StabilityReport rep = check_stability(dd.A, margin);
    dd.eigenvalues_A = rep.eigenvalues;
    dd.stable = rep.stable;
    return dd;
}

Mat6c intracavity_spectrum(const Mat6c& A, const Mat6c& D, double omega) {
    const Complex iw(0.0, omega);
    const Mat6c M1 = A + iw * Mat6c::Identity();
    Eigen::FullPivLU<Mat6c> lu1(M1);
    if (!lu1.isInvertible())
        throw NumericsError("singular matrix: resolvent of A at omega does not exist");
    const Mat6c Y = lu1.solve(D);
    // Right division by (A^T - iw): transpose into a second left solve.
    const Mat6c M2t = A - iw * Mat6c::Identity();
    Eigen::FullPivLU<Mat6c> lu2(M2t);
    if (!lu2.isInvertible())
        throw NumericsError("singular matrix: resolvent of A^T at omega does not exist");
    return lu2.solve(Y.transpose()).transpose();
}

Mat6c quadrature_spectrum(const Mat6c& S) {
    static const Mat6c Q = quadrature_transform();
    return Q * S * Q.transpose();
}

OutputCovariances output_covariances(const SystemParams& p, const Mat6c& Sq) {
    OutputCovariances v;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int xi = phase_space_index(i, false) - 1;
            const int xj = phase_space_index(j, false) - 1;
            const int yi = phase_space_index(i, true) - 1;
            const int yj = phase_space_index(j, true) - 1;
            const Complex sx = Sq(xi, xj) + Sq(xj, xi);
            const Complex sy = Sq(yi, yj) + Sq(yj, yi);
            if (std::abs(sx.imag()) > 1e-9 || std::abs(sy.imag()) > 1e-9)
                throw NumericsError("non-negligible imaginary part in output covariances");
            const double scale = std::sqrt(p.gamma[i] * p.gamma[j]);
            v.VX(i, j) = (i == j ? 1.0 : 0.0) + scale * sx.real();
            v.VY(i, j) = (i == j ? 1.0 : 0.0) + scale * sy.real();
        }
    }
    return v;
}

QuadratureSpectrum quadrature_spectrum_at(const SystemParams& p, const Mat6c& A,
                                          const Mat6c& D, double omega) {
    QuadratureSpectrum qs;
    qs.omega = omega;
    qs.Sq = quadrature_spectrum(intracavity_spectrum(A, D, omega));
    const OutputCovariances v = output_covariances(p, qs.Sq);
    qs.VX = v.VX;
    qs.VY = v.VY;
    return qs;
}

}  // namespace ndopo
