#include "ndopo/steady_state.hpp"

#include <algorithm>
#include <cmath>

#include "ndopo/ou_engine.hpp"

namespace ndopo {
namespace {

double drift_norm(const SystemParams& p, const Vec6c& a) {
    return semiclassical_drift(p, a).cwiseAbs().maxCoeff();
}

bool finite(const Vec6c& a) {
    for (int i = 0; i < 6; ++i)
        if (!std::isfinite(a(i).real()) || !std::isfinite(a(i).imag())) return false;
    return true;
}

// Fixed-step RK4 until the drift norm drops below tol or the time budget runs out.
// Returns the final point; caller judges the residual.
Vec6c relax(const SystemParams& p, const SolverSettings& s, Vec6c a, double tol) {
    const double dt = s.ode_dt > 0.0 ? s.ode_dt : 0.01 / max_gamma(p);
    const auto steps = static_cast<long>(s.ode_max_time / dt);
    for (long n = 0; n < steps; ++n) {
        const Vec6c k1 = semiclassical_drift(p, a);
        if (k1.cwiseAbs().maxCoeff() < tol) break;
        const Vec6c k2 = semiclassical_drift(p, a + 0.5 * dt * k1);
        const Vec6c k3 = semiclassical_drift(p, a + 0.5 * dt * k2);
        const Vec6c k4 = semiclassical_drift(p, a + dt * k3);
        a += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!finite(a)) throw NumericsError("nonphysical state: relaxation diverged");
    }
    return a;
}

// Damped Newton with the analytic Jacobian -A. Returns true on convergence.
bool newton(const SystemParams& p, const SolverSettings& s, Vec6c& a) {
    double res = drift_norm(p, a);
    for (int it = 0; it < s.newton_max_iter; ++it) {
        if (res <= s.newton_tol) return true;
        const Vec6c f = semiclassical_drift(p, a);
        const Mat6c A = drift_matrix_at(p, a);
        Eigen::PartialPivLU<Mat6c> lu(A);
        Vec6c step = lu.solve(f);
        if (!finite(step)) return false;
        double scale = 1.0;
        for (int half = 0; half <= 8; ++half) {
            const Vec6c trial = a + scale * step;
            const double trial_res = finite(trial)
                                         ? drift_norm(p, trial)
                                         : std::numeric_limits<double>::infinity();
            if (trial_res < res || trial_res <= s.newton_tol) {
                a = trial;
                res = trial_res;
                break;
            }
            scale *= 0.5;
            if (half == 8) return false;  // no descent direction left
        }
    }
    return res <= s.newton_tol;
}

SteadyState pack_result(const SystemParams& p, const Vec6c& a) {
    if (!finite(a)) throw NumericsError("nonphysical state: non-finite amplitudes");
    // The conjugate components must mirror the plain ones for real drives.
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (int m = 0; m < 3; ++m) {
        if (std::abs(a(2 * m + 1) - std::conj(a(2 * m))) > 1e-6 * scale)
            throw NumericsError("nonphysical state: conjugate-symmetry violation");
    }
    SteadyState ss;
    for (int m = 0; m < 3; ++m)
        ss.alpha(m) = 0.5 * (a(2 * m) + std::conj(a(2 * m + 1)));
    ss.residual = drift_norm(p, doubled(ss.alpha));
    ss.stable = check_stability(build_drift_matrix(p, ss)).stable;
    return ss;
}

double eval_poly(const std::array<double, 6>& c, double x) {
    double v = c[5];
    for (int i = 4; i >= 0; --i) v = v * x + c[i];
    return v;
}

double eval_poly_deriv(const std::array<double, 6>& c, double x) {
    double v = 5.0 * c[5];
    for (int i = 4; i >= 1; --i) v = v * x + i * c[i];
    return v;
}

SteadyState oracle_state(const SystemParams& p, double a0, double a1, double a2) {
    SteadyState ss;
    ss.alpha = Vec3c(Complex(a0, 0.0), Complex(a1, 0.0), Complex(a2, 0.0));
    ss.residual = drift_norm(p, doubled(ss.alpha));
    ss.stable = check_stability(build_drift_matrix(p, ss)).stable;
    return ss;
}

}  // namespace

SolverSettings SolverSettings::defaults(const SystemParams& p) {
    SolverSettings s;
    s.ode_dt = 0.01 / max_gamma(p);
    return s;
}

Vec6c semiclassical_drift(const SystemParams& p, const Vec6c& a) {
    const double g0 = p.gamma[0], g1 = p.gamma[1], g2 = p.gamma[2], k = p.kappa;
    Vec6c f;
    f(0) = p.eps0 - g0 * a(0) - k * a(2) * a(4);
    f(1) = p.eps0 - g0 * a(1) - k * a(3) * a(5);
    f(2) = p.eps1 - g1 * a(2) + k * a(0) * a(5);
    f(3) = p.eps1 - g1 * a(3) + k * a(1) * a(4);
    f(4) = -g2 * a(4) + k * a(0) * a(3);
    f(5) = -g2 * a(5) + k * a(1) * a(2);
    return f;
}

SteadyState solve_steady_state(const SystemParams& p, const SolverSettings& s,
                               const std::optional<Vec6c>& seed) {
    if (s.newton_tol <= 0.0 || s.newton_tol >= 1e-6)
        throw ConfigError("invalid configuration: newton_tol must lie in (0, 1e-6)");
    const double relax_tol = std::max(1e-9, s.newton_tol);

    if (seed) {
        Vec6c a = *seed;
        if (newton(p, s, a)) return pack_result(p, a);
    }
    Vec6c a = relax(p, s, Vec6c::Zero(), relax_tol);
    if (newton(p, s, a)) return pack_result(p, a);
    // Newton stalled (e.g. a marginal Jacobian at threshold): let the
    // relaxation finish the job on its own.
    a = relax(p, s, a, s.newton_tol);
    if (drift_norm(p, a) <= s.newton_tol) return pack_result(p, a);
    throw ConvergenceError("no convergence: steady-state solve exhausted its budget");
}

std::array<double, 6> quintic_coefficients(const SystemParams& p) {
    const double g0 = p.gamma[0], g1 = p.gamma[1], g2 = p.gamma[2];
    const double k = p.kappa, e0 = p.eps0, e1 = p.eps1;
    return {
        -e0 * g1 * g1 * g2 * g2,
        g0 * g1 * g1 * g2 * g2 + k * k * g2 * e1 * e1,
        2.0 * e0 * g1 * g2 * k * k,
        -2.0 * g0 * g1 * g2 * k * k,
        -e0 * k * k * k * k,
        g0 * k * k * k * k,
    };
}

std::vector<SteadyState> steady_state_oracle(const SystemParams& p) {
    const double g0 = p.gamma[0], g1 = p.gamma[1], g2 = p.gamma[2], k = p.kappa;
    std::vector<SteadyState> out;

    if (p.eps1 == 0.0) {
        // Injection-free limit: the polynomial factorizes. The empty branch
        // always exists; the bright pair appears above threshold where the
        // elimination formula for a1 degenerates.
        out.push_back(oracle_state(p, p.eps0 / g0, 0.0, 0.0));
        const double a0c = std::sqrt(g1 * g2) / k;
        const double a1sq = g2 * (p.eps0 - g0 * a0c) / (k * k * a0c);
        if (a1sq > 0.0) {
            const double a1 = std::sqrt(a1sq);
            out.push_back(oracle_state(p, a0c, a1, k * a0c * a1 / g2));
            out.push_back(oracle_state(p, a0c, -a1, -k * a0c * a1 / g2));
        }
    } else {
        const auto c = quintic_coefficients(p);
        Eigen::Matrix<double, 5, 5> companion = Eigen::Matrix<double, 5, 5>::Zero();
        for (int i = 0; i < 4; ++i) companion(i + 1, i) = 1.0;
        for (int i = 0; i < 5; ++i) companion(i, 4) = -c[i] / c[5];
        Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(companion);

        std::vector<double> roots;
        for (int i = 0; i < 5; ++i) {
            const Complex z = es.eigenvalues()(i);
            if (std::abs(z.imag()) > 1e-5 * std::max(1.0, std::abs(z.real()))) continue;
            double x = z.real();
            for (int it = 0; it < 50; ++it) {  // polish on the exact polynomial
                const double f = eval_poly(c, x), df = eval_poly_deriv(c, x);
                if (df == 0.0) break;
                const double dx = f / df;
                x -= dx;
                if (std::abs(dx) < 1e-14 * std::max(1.0, std::abs(x))) break;
            }
            const bool dup = std::any_of(roots.begin(), roots.end(), [&](double r) {
                return std::abs(r - x) < 1e-8 * std::max(1.0, std::abs(x));
            });
            if (!dup) roots.push_back(x);
        }
        for (double a0 : roots) {
            const double den = g1 * g2 - k * k * a0 * a0;
            if (std::abs(den) < 1e-12 * g1 * g2) continue;
            const double a1 = p.eps1 * g2 / den;
            const double a2 = k * a0 * a1 / g2;
            SteadyState ss = oracle_state(p, a0, a1, a2);
            if (ss.residual < 1e-8) out.push_back(std::move(ss));
        }
    }

    if (out.empty()) throw NumericsError("no real root: quintic produced no steady state");
    std::sort(out.begin(), out.end(), [](const SteadyState& a, const SteadyState& b) {
        return a.alpha(0).real() < b.alpha(0).real();
    });
    return out;
}

std::optional<SteadyState> physical_root(const std::vector<SteadyState>& roots,
                                         const SystemParams& p,
                                         std::optional<double> previous_alpha0) {
    const double target = previous_alpha0 ? *previous_alpha0 : p.eps0 / p.gamma[0];
    std::optional<SteadyState> best;
    for (const auto& r : roots) {
        if (!r.stable) continue;
        if (!best || std::abs(r.alpha(0).real() - target) <
                         std::abs(best->alpha(0).real() - target))
            best = r;
    }
    return best;
}

}  // namespace ndopo
