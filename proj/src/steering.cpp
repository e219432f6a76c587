#include "ndopo/steering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ndopo {
namespace {

double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol, double* x_at_min) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    const double xm = 0.5 * (a + b);
    *x_at_min = xm;
    return f(xm);
}

void validate_grid(const FrequencyGrid& grid) {
    if (!(grid.omega_max > 0.0) || grid.points < 2)
        throw ConfigError("invalid configuration: frequency grid needs omega_max > 0 and points >= 2");
}

void validate_pair(int steered, int steerer) {
    if (steered < 0 || steered > 2 || steerer < 0 || steerer > 2 || steered == steerer)
        throw std::out_of_range("EPR pair must be two distinct modes in {0,1,2}");
}

}  // namespace

double inferred_variance(double v_self, double v_other, double c) {
    if (c == 0.0) return v_self;
    if (v_other <= 1e-12)
        throw NumericsError("degenerate conditioning: conditioning variance <= 1e-12");
    const double v = v_self - c * c / v_other;
    // Cauchy-Schwarz keeps this nonnegative for any valid covariance block;
    // anything beyond roundoff signals an upstream defect.
    if (v < -1e-9 * std::max(1.0, std::abs(v_self)))
        throw NumericsError("internal consistency: negative inferred variance");
    return std::max(v, 0.0);
}

double epr_product(const Mat3d& VX, const Mat3d& VY, int steered, int steerer) {
    validate_pair(steered, steerer);
    const double vx = inferred_variance(VX(steered, steered), VX(steerer, steerer),
                                        VX(steered, steerer));
    const double vy = inferred_variance(VY(steered, steered), VY(steerer, steerer),
                                        VY(steered, steerer));
    return vx * vy;
}

std::vector<EPRRecord> minimize_pairs(const SystemParams& p, const SteadyState& ss,
                                      const std::vector<std::pair<int, int>>& pairs,
                                      const FrequencyGrid& grid) {
    validate_grid(grid);
    for (const auto& [j, k] : pairs) validate_pair(j, k);

    const DriftDiffusion dd = linearize(p, ss);
    const double dw = grid.omega_max / (grid.points - 1);

    std::vector<EPRRecord> recs(pairs.size());
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        recs[q].steered = pairs[q].first;
        recs[q].steerer = pairs[q].second;
        recs[q].omega_grid.reserve(grid.points);
        recs[q].product.reserve(grid.points);
    }
    for (int i = 0; i < grid.points; ++i) {
        const double w = i * dw;
        const QuadratureSpectrum qs = quadrature_spectrum_at(p, dd.A, dd.D, w);
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            recs[q].omega_grid.push_back(w);
            recs[q].product.push_back(
                epr_product(qs.VX, qs.VY, pairs[q].first, pairs[q].second));
        }
    }

    for (auto& rec : recs) {
        const auto it = std::min_element(rec.product.begin(), rec.product.end());
        const auto i = static_cast<int>(it - rec.product.begin());
        const double lo = std::max(0.0, (i - 1) * dw);
        const double hi = std::min(grid.omega_max, (i + 1) * dw);
        auto f = [&](double w) {
            const QuadratureSpectrum qs = quadrature_spectrum_at(p, dd.A, dd.D, w);
            return epr_product(qs.VX, qs.VY, rec.steered, rec.steerer);
        };
        double w_ref = 0.0;
        const double v_ref = golden_section(f, lo, hi, 1e-6, &w_ref);
        if (v_ref < *it) {
            rec.min_value = v_ref;
            rec.omega_at_min = w_ref;
        } else {
            rec.min_value = *it;
            rec.omega_at_min = rec.omega_grid[i];
        }
    }
    return recs;
}

EPRRecord minimize_over_frequency(const SystemParams& p, const SteadyState& ss,
                                  int steered, int steerer, const FrequencyGrid& grid) {
    return minimize_pairs(p, ss, {{steered, steerer}}, grid).front();
}

SteeringClass classify_pair(const EPRRecord& rec_jk, const EPRRecord& rec_kj) {
    if (rec_jk.steered != rec_kj.steerer || rec_jk.steerer != rec_kj.steered)
        throw std::invalid_argument("classify_pair: records do not describe one pair");
    SteeringClass c;
    c.j = rec_jk.steered;
    c.k = rec_jk.steerer;
    const bool jk = rec_jk.min_value < 1.0 - kSteeringTieBand;
    const bool kj = rec_kj.min_value < 1.0 - kSteeringTieBand;
    c.marginal = std::abs(rec_jk.min_value - 1.0) <= kSteeringTieBand ||
                 std::abs(rec_kj.min_value - 1.0) <= kSteeringTieBand;
    if (jk && kj)
        c.kind = SteeringKind::symmetric;
    else if (jk)
        c.kind = SteeringKind::asymmetric_j_steered_by_k;
    else if (kj)
        c.kind = SteeringKind::asymmetric_k_steered_by_j;
    else
        c.kind = SteeringKind::none;
    c.entangled = jk || kj;
    return c;
}

std::string to_string(const SteeringClass& c) {
    std::string s;
    switch (c.kind) {
        case SteeringKind::symmetric:
            s = "symmetric";
            break;
        case SteeringKind::asymmetric_j_steered_by_k:
            s = "asymmetric_" + std::to_string(c.j) + std::to_string(c.k);
            break;
        case SteeringKind::asymmetric_k_steered_by_j:
            s = "asymmetric_" + std::to_string(c.k) + std::to_string(c.j);
            break;
        case SteeringKind::none:
            s = "none";
            break;
    }
    if (c.marginal) s += "_marginal";
    return s;
}

}  // namespace ndopo
