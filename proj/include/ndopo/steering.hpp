#ifndef NDOPO_STEERING_HPP
#define NDOPO_STEERING_HPP

#include <vector>

#include "ndopo/ou_engine.hpp"

// Reid products of inferred quadrature variances. EPR_jk below one certifies
// that measurements on mode k steer mode j; EPR_jk and EPR_kj generally
// differ, and one-sided violation is asymmetric steering.
namespace ndopo {

// Values within this band of 1 are treated as ties, not violations.
constexpr double kSteeringTieBand = 1e-9;

struct FrequencyGrid {
    double omega_max = 20.0;
    int points = 2001;
};

// V_self - C^2 / V_other. Returns V_self for C = 0. Throws
// NumericsError("degenerate conditioning") for V_other <= 1e-12 and an
// internal-consistency NumericsError if the result is negative beyond
// roundoff (valid covariance data cannot produce one).
double inferred_variance(double v_self, double v_other, double c);

// Product of the X and Y inferred variances for mode `steered` conditioned
// on mode `steerer`, from one pair of output covariance matrices.
double epr_product(const Mat3d& VX, const Mat3d& VY, int steered, int steerer);

struct EPRRecord {
    int steered = 0;
    int steerer = 1;
    std::vector<double> omega_grid;
    std::vector<double> product;
    double min_value = 1.0;
    double omega_at_min = 0.0;
};

// EPR_jk on the coarse grid over [0, omega_max], then golden-section
// refinement of the bracketing interval to 1e-6 in omega.
EPRRecord minimize_over_frequency(const SystemParams& p, const SteadyState& ss,
                                  int steered, int steerer, const FrequencyGrid& grid);

// Same minimization for several directed pairs sharing one spectrum
// evaluation per frequency.
std::vector<EPRRecord> minimize_pairs(const SystemParams& p, const SteadyState& ss,
                                      const std::vector<std::pair<int, int>>& pairs,
                                      const FrequencyGrid& grid);

enum class SteeringKind {
    symmetric,                 // both directions violate
    asymmetric_j_steered_by_k, // only EPR_jk < 1
    asymmetric_k_steered_by_j, // only EPR_kj < 1
    none,
};

struct SteeringClass {
    int j = 0;
    int k = 1;
    SteeringKind kind = SteeringKind::none;
    bool marginal = false;  // some minimum tied with 1 within the band
    bool entangled = false; // any genuine violation implies entanglement
};

// Pure function of the two minima against the strict threshold of 1.
SteeringClass classify_pair(const EPRRecord& rec_jk, const EPRRecord& rec_kj);

std::string to_string(const SteeringClass& c);

}  // namespace ndopo

#endif
