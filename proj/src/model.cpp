#include "ndopo/model.hpp"

#include <cmath>

namespace ndopo {

SystemParams validate_params(const SystemParams& p) {
    auto fail = [](const std::string& what) {
        throw ConfigError("invalid configuration: " + what);
    };
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(p.gamma[i])) fail("gamma[" + std::to_string(i) + "] is not finite");
        if (p.gamma[i] <= 0.0) fail("gamma[" + std::to_string(i) + "] must be positive");
    }
    if (!std::isfinite(p.kappa)) fail("kappa is not finite");
    if (p.kappa <= 0.0) fail("kappa must be positive");
    if (!std::isfinite(p.eps0)) fail("eps0 is not finite");
    if (p.eps0 < 0.0) fail("eps0 must be nonnegative");
    if (!std::isfinite(p.eps1)) fail("eps1 is not finite");
    if (p.eps1 < 0.0) fail("eps1 must be nonnegative");
    return p;
}

double max_gamma(const SystemParams& p) {
    return std::max(p.gamma[0], std::max(p.gamma[1], p.gamma[2]));
}

int phase_space_index(int mode, bool conjugate) {
    if (mode < 0 || mode > 2)
        throw std::out_of_range("phase_space_index: mode must be 0, 1 or 2");
    return 2 * mode + 1 + (conjugate ? 1 : 0);
}

Vec6c doubled(const Vec3c& alpha) {
    Vec6c a;
    for (int m = 0; m < 3; ++m) {
        a(2 * m) = alpha(m);
        a(2 * m + 1) = std::conj(alpha(m));
    }
    return a;
}

}  // namespace ndopo
