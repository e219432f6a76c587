#include "ndopo/pp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include "ndopo/steady_state.hpp"

namespace ndopo {
namespace {

constexpr double kDivergenceNorm = 1e6;

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void validate_sde(const SdeSettings& s, double rate_bound) {
    if (!(s.dt > 0.0) || !(s.t_end > 0.0) || s.n_traj < 1)
        throw ConfigError("invalid configuration: sde settings must be positive");
    if (!(s.burn_in >= 0.0) || s.burn_in >= s.t_end)
        throw ConfigError("invalid configuration: burn_in must lie in [0, t_end)");
    if (s.dt > 0.01 / rate_bound * (1.0 + 1e-12))
        throw ConfigError("invalid configuration: dt exceeds 0.01/max(gamma, kappa*|alpha0|)");
}

template <typename Body>
void for_each_trajectory(int n_traj, int jobs, const Body& body) {
    if (jobs <= 1) {
        for (int t = 0; t < n_traj; ++t) body(t);
        return;
    }
    std::vector<std::thread> pool;
    const int workers = std::min(jobs, n_traj);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int t = w; t < n_traj; t += workers) body(t);
        });
    }
    for (auto& th : pool) th.join();
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Standard error of the mean across independent trajectories.
double se_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                     static_cast<double>(v.size()));
}

}  // namespace

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t trajectory) {
    std::uint64_t state = seed;
    std::uint64_t mixed = splitmix64(state);
    state ^= (trajectory + 1) * 0x9E3779B97F4A7C15ULL;
    mixed ^= splitmix64(state);
    return std::mt19937_64(mixed);
}

Eigen::Matrix<Complex, 6, Eigen::Dynamic> noise_factor(const Mat6c& D) {
    const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
    bool canonical = true;
    for (int i = 0; i < 6 && canonical; ++i)
        for (int j = 0; j < 6; ++j) {
            const bool allowed = (i == 2 && j == 4) || (i == 4 && j == 2) ||
                                 (i == 3 && j == 5) || (i == 5 && j == 3);
            if (!allowed && std::abs(D(i, j)) > 1e-14 * scale) {
                canonical = false;
                break;
            }
        }

    Eigen::Matrix<Complex, 6, Eigen::Dynamic> B;
    if (canonical && D(2, 4) == D(4, 2) && D(3, 5) == D(5, 3)) {
        // Noise vectors straight from the phase-space equations:
        // modes 1 and 2 share one complex noise, their conjugates another.
        const Complex n1 = std::sqrt(0.5 * D(2, 4));
        const Complex n2 = std::sqrt(0.5 * D(3, 5));
        const Complex i1(0.0, 1.0);
        B.setZero(6, 4);
        B(2, 0) = n1;
        B(2, 1) = i1 * n1;
        B(4, 0) = n1;
        B(4, 1) = -i1 * n1;
        B(3, 2) = n2;
        B(3, 3) = i1 * n2;
        B(5, 2) = n2;
        B(5, 3) = -i1 * n2;
    } else {
        const Mat6c root = D.sqrt();  // symmetric since f(D)^T = f(D^T)
        B = root;
    }
    if (((B * B.transpose()) - D).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw NumericsError("internal consistency: noise factorization residual too large");
    return B;
}

Mat6c solve_lyapunov(const Mat6c& A, const Mat6c& D) {
    Eigen::ComplexEigenSolver<Mat6c> es(A, false);
    const Vec6c ev = es.eigenvalues();
    const double ev_scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (std::abs(ev(i) + ev(j)) < 1e-12 * ev_scale)
                throw NumericsError("no unique solution: A and -A^T share an eigenvalue");

    // vec(A s) + vec(s A^T) = (I (x) A + A (x) I) vec(s), column-major.
    Eigen::Matrix<Complex, 36, 36> K = Eigen::Matrix<Complex, 36, 36>::Zero();
    for (int bi = 0; bi < 6; ++bi)
        K.block<6, 6>(6 * bi, 6 * bi) += A;
    for (int bi = 0; bi < 6; ++bi)
        for (int bj = 0; bj < 6; ++bj)
            for (int d = 0; d < 6; ++d) K(6 * bi + d, 6 * bj + d) += A(bi, bj);

    Eigen::Matrix<Complex, 36, 1> rhs;
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 6; ++i) rhs(6 * j + i) = D(i, j);
    const Eigen::Matrix<Complex, 36, 1> x = K.partialPivLu().solve(rhs);
    Mat6c sigma;
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 6; ++i) sigma(i, j) = x(6 * j + i);
    return sigma;
}

CovarianceEstimate simulate_linearized_ou(const Mat6c& A, const Mat6c& D,
                                          const SdeSettings& s, int jobs) {
    const double rate_bound =
        std::max({A.diagonal().real().maxCoeff(), std::abs(D(2, 4)), std::abs(D(3, 5)), 1e-300});
    validate_sde(s, rate_bound);

    const auto B = noise_factor(D);
    const auto n_noise = static_cast<int>(B.cols());
    const Mat6c step_matrix = Mat6c::Identity() - s.dt * A;
    const double sqrt_dt = std::sqrt(s.dt);
    const auto steps = static_cast<long>(std::lround(s.t_end / s.dt));
    const auto burn_steps = static_cast<long>(std::lround(s.burn_in / s.dt));
    const int snapshots = 8;

    std::vector<Mat6c> per_traj(s.n_traj, Mat6c::Zero());
    std::vector<char> diverged(s.n_traj, 0);

    for_each_trajectory(s.n_traj, jobs, [&](int t) {
        auto rng = trajectory_rng(s.rng_seed, static_cast<std::uint64_t>(t));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec6c y = Vec6c::Zero();
        Eigen::VectorXcd xi(n_noise);
        Mat6c acc = Mat6c::Zero();
        int taken = 0;
        for (long n = 1; n <= steps; ++n) {
            for (int c = 0; c < n_noise; ++c) xi(c) = gauss(rng);
            y = step_matrix * y + sqrt_dt * (B * xi);
            if (y.cwiseAbs().maxCoeff() > kDivergenceNorm) {
                diverged[t] = 1;
                return;
            }
            if (n > burn_steps &&
                (n - burn_steps) % std::max<long>(1, (steps - burn_steps) / snapshots) == 0) {
                acc += y * y.transpose();
                ++taken;
            }
        }
        if (taken > 0) per_traj[t] = acc / static_cast<double>(taken);
    });

    if (std::any_of(diverged.begin(), diverged.end(), [](char c) { return c != 0; }))
        throw NumericsError("unstable dynamics: linearized trajectory norm exceeded 1e6");

    CovarianceEstimate est;
    est.n_traj = s.n_traj;
    std::vector<double> re(s.n_traj), im(s.n_traj);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            for (int t = 0; t < s.n_traj; ++t) {
                re[t] = per_traj[t](i, j).real();
                im[t] = per_traj[t](i, j).imag();
            }
            const double mr = mean_of(re), mi = mean_of(im);
            est.cov(i, j) = Complex(mr, mi);
            est.se_re(i, j) = se_of(re, mr);
            est.se_im(i, j) = se_of(im, mi);
        }
    }
    return est;
}

namespace {

// One Euler-Maruyama step of the six nonlinear phase-space equations.
inline void positive_p_step(const SystemParams& p, double dt, double sqrt_dt,
                            const double* xi, Vec6c& a) {
    const Vec6c f = semiclassical_drift(p, a);
    const Complex i1(0.0, 1.0);
    const Complex n1 = std::sqrt(0.5 * p.kappa * a(0));
    const Complex n2 = std::sqrt(0.5 * p.kappa * a(1));
    a += dt * f;
    a(2) += sqrt_dt * n1 * (xi[0] + i1 * xi[1]);
    a(4) += sqrt_dt * n1 * (xi[0] - i1 * xi[1]);
    a(3) += sqrt_dt * n2 * (xi[2] + i1 * xi[3]);
    a(5) += sqrt_dt * n2 * (xi[2] - i1 * xi[3]);
}

}  // namespace

MeanEstimate simulate_positive_p(const SystemParams& p, const SdeSettings& s, int jobs) {
    validate_params(p);
    // alpha0 never grows far beyond the empty-cavity value, which bounds the
    // multiplicative noise rate.
    const double rate_bound = std::max(max_gamma(p), p.kappa * p.eps0 / p.gamma[0]);
    validate_sde(s, rate_bound);

    const double sqrt_dt = std::sqrt(s.dt);
    const auto steps = static_cast<long>(std::lround(s.t_end / s.dt));
    const auto burn_steps = static_cast<long>(std::lround(s.burn_in / s.dt));

    std::vector<Vec3c> per_traj(s.n_traj, Vec3c::Zero());
    std::vector<char> kept(s.n_traj, 0);

    for_each_trajectory(s.n_traj, jobs, [&](int t) {
        auto rng = trajectory_rng(s.rng_seed, static_cast<std::uint64_t>(t));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec6c a = Vec6c::Zero();
        Vec3c acc = Vec3c::Zero();
        long taken = 0;
        double xi[4];
        for (long n = 1; n <= steps; ++n) {
            for (double& x : xi) x = gauss(rng);
            positive_p_step(p, s.dt, sqrt_dt, xi, a);
            if (a.cwiseAbs().maxCoeff() > kDivergenceNorm) return;  // discarded
            if (n > burn_steps) {
                acc += Vec3c(a(0), a(2), a(4));
                ++taken;
            }
        }
        per_traj[t] = acc / static_cast<double>(taken);
        kept[t] = 1;
    });

    const int n_kept = static_cast<int>(std::count(kept.begin(), kept.end(), 1));
    MeanEstimate est;
    est.n_traj = n_kept;
    est.discard_fraction =
        1.0 - static_cast<double>(n_kept) / static_cast<double>(s.n_traj);
    if (est.discard_fraction > 0.01)
        throw NumericsError("excessive divergence: more than 1% of trajectories discarded");

    std::vector<double> re, im;
    re.reserve(n_kept);
    im.reserve(n_kept);
    for (int m = 0; m < 3; ++m) {
        re.clear();
        im.clear();
        for (int t = 0; t < s.n_traj; ++t) {
            if (!kept[t]) continue;
            re.push_back(per_traj[t](m).real());
            im.push_back(per_traj[t](m).imag());
        }
        const double mr = mean_of(re), mi = mean_of(im);
        est.mean(m) = Complex(mr, mi);
        est.se_re(m) = se_of(re, mr);
        est.se_im(m) = se_of(im, mi);
    }
    return est;
}

Vec6c positive_p_noise_free_path(const SystemParams& p, double dt, double t_end) {
    validate_params(p);
    Vec6c a = Vec6c::Zero();
    const auto steps = static_cast<long>(std::lround(t_end / dt));
    const double xi[4] = {0.0, 0.0, 0.0, 0.0};
    for (long n = 0; n < steps; ++n) positive_p_step(p, dt, 0.0, xi, a);
    return a;
}

SpectrumEstimate estimate_output_spectrum(const Mat6c& A, const Mat6c& D,
                                          const SystemParams& p, const SdeSettings& s,
                                          std::pair<int, int> modes, Quadrature quad,
                                          std::span<const double> omegas, int jobs) {
    const double rate_bound =
        std::max({A.diagonal().real().maxCoeff(), std::abs(D(2, 4)), std::abs(D(3, 5)), 1e-300});
    validate_sde(s, rate_bound);
    const int mi = modes.first, mj = modes.second;
    if (mi < 0 || mi > 2 || mj < 0 || mj > 2)
        throw std::out_of_range("estimate_output_spectrum: modes must be in {0,1,2}");

    const auto B = noise_factor(D);
    const auto n_noise = static_cast<int>(B.cols());
    const Mat6c step_matrix = Mat6c::Identity() - s.dt * A;
    const double sqrt_dt = std::sqrt(s.dt);
    const auto steps = static_cast<long>(std::lround(s.t_end / s.dt));
    const auto burn_steps = static_cast<long>(std::lround(s.burn_in / s.dt));

    // Sample the quadratures every `stride` steps; keep the Nyquist band
    // comfortably above the largest requested frequency.
    double w_top = 1.0;
    for (double w : omegas) w_top = std::max(w_top, std::abs(w));
    long stride = std::max<long>(1, std::lround(0.02 / s.dt));
    while (stride > 1 && M_PI / (static_cast<double>(stride) * s.dt) < 4.0 * w_top) --stride;
    const double dts = static_cast<double>(stride) * s.dt;
    const long n_samples = (steps - burn_steps) / stride;
    if (n_samples < 16)
        throw ConfigError("invalid configuration: too few samples after burn-in");

    const auto n_freq = static_cast<int>(omegas.size());
    std::vector<std::vector<double>> per_traj(s.n_traj,
                                              std::vector<double>(n_freq, 0.0));
    std::vector<double> parseval(s.n_traj, 0.0);
    std::vector<char> diverged(s.n_traj, 0);

    const Complex i1(0.0, 1.0);
    // Hann window and its power normalization.
    std::vector<double> window(n_samples);
    for (long n = 0; n < n_samples; ++n)
        window[n] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(n) /
                                          static_cast<double>(n_samples - 1)));
    double w2 = 0.0;
    for (double w : window) w2 += w * w;
    w2 *= dts;

    for_each_trajectory(s.n_traj, jobs, [&](int t) {
        auto rng = trajectory_rng(s.rng_seed, static_cast<std::uint64_t>(t));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec6c y = Vec6c::Zero();
        Eigen::VectorXcd xi(n_noise);

        std::vector<Complex> qi(n_samples), qj(n_samples);
        long sample = 0;
        for (long n = 1; n <= steps; ++n) {
            for (int c = 0; c < n_noise; ++c) xi(c) = gauss(rng);
            y = step_matrix * y + sqrt_dt * (B * xi);
            if (y.cwiseAbs().maxCoeff() > kDivergenceNorm) {
                diverged[t] = 1;
                return;
            }
            if (n > burn_steps && (n - burn_steps) % stride == 0 && sample < n_samples) {
                if (quad == Quadrature::X) {
                    qi[sample] = y(2 * mi) + y(2 * mi + 1);
                    qj[sample] = y(2 * mj) + y(2 * mj + 1);
                } else {
                    qi[sample] = -i1 * (y(2 * mi) - y(2 * mi + 1));
                    qj[sample] = -i1 * (y(2 * mj) - y(2 * mj + 1));
                }
                ++sample;
            }
        }

        for (int f = 0; f < n_freq; ++f) {
            const double w = omegas[f];
            Complex fi_p = 0.0, fi_m = 0.0, fj_p = 0.0, fj_m = 0.0;
            for (long n = 0; n < n_samples; ++n) {
                const Complex e = std::exp(i1 * (w * static_cast<double>(n) * dts));
                fi_p += window[n] * qi[n] * e;
                fi_m += window[n] * qi[n] / e;
                fj_p += window[n] * qj[n] * e;
                fj_m += window[n] * qj[n] / e;
            }
            fi_p *= dts;
            fi_m *= dts;
            fj_p *= dts;
            fj_m *= dts;
            const Complex sym = (fi_p * fj_m + fj_p * fi_m) / w2;
            per_traj[t][f] = (mi == mj ? 1.0 : 0.0) +
                             std::sqrt(p.gamma[mi] * p.gamma[mj]) * sym.real();
        }

        // Rectangular-window periodogram identity for the machinery check:
        // the integrated periodogram must equal the time-domain mean square.
        Eigen::FFT<double> fft;
        std::vector<Complex> spec;
        fft.fwd(spec, qi);
        double power = 0.0, tdom = 0.0;
        for (const Complex& c : spec) power += std::norm(c);
        for (const Complex& c : qi) tdom += std::norm(c);
        power /= static_cast<double>(n_samples);
        if (tdom > 0.0) parseval[t] = std::abs(power - tdom) / tdom;
    });

    if (std::any_of(diverged.begin(), diverged.end(), [](char c) { return c != 0; }))
        throw NumericsError("unstable dynamics: linearized trajectory norm exceeded 1e6");

    SpectrumEstimate est;
    est.n_traj = s.n_traj;
    est.omega.assign(omegas.begin(), omegas.end());
    est.value.resize(n_freq);
    est.std_error.resize(n_freq);
    std::vector<double> vals(s.n_traj);
    for (int f = 0; f < n_freq; ++f) {
        for (int t = 0; t < s.n_traj; ++t) vals[t] = per_traj[t][f];
        est.value[f] = mean_of(vals);
        est.std_error[f] = se_of(vals, est.value[f]);
    }
    est.parseval_gap = *std::max_element(parseval.begin(), parseval.end());
    return est;
}

void write_oracle_report(const std::vector<OracleRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "quantity,estimate,std_error,n_traj,discard_fraction\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.quantity << ',';
        std::snprintf(buf, sizeof buf, "%.12g", r.estimate);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.12g", r.std_error);
        out << buf << ',' << r.n_traj << ',';
        std::snprintf(buf, sizeof buf, "%.12g", r.discard_fraction);
        out << buf << '\n';
    }
    if (!out.good()) throw IoError("write failure: " + path);
}

}  // namespace ndopo
