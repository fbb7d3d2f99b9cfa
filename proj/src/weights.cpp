#include "gmmd/weights.hpp"

#include "gmmd/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gmmd {

WeightScheme::WeightScheme(double gamma, WeightFamily family) : gamma_(gamma), family_(family) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw InputError("gamma must lie in (0, 1], got " + std::to_string(gamma));
    }
}

double weight(const WeightScheme& scheme, std::size_t i, std::size_t r) {
    if (i < 1 || i > r) {
        throw InputError("weight index " + std::to_string(i) + " outside 1.." + std::to_string(r));
    }
    return scheme(i);
}

double k_squared_limit(const WeightScheme& scheme) noexcept {
    if (scheme.family() == WeightFamily::unit) return 1.0;
    const double g = scheme.gamma();
    return 1.0 + g * g;
}

double k_squared_rate(const WeightScheme& scheme, std::size_t r) noexcept {
    if (scheme.family() == WeightFamily::unit) return 0.0;
    // Even r: pairs (1-g)^2 + (1+g)^2 average exactly 1 + g^2. Odd r adds one (1-g)^2 term,
    // leaving (1-g)^2 - (1+g^2) = -2g over r.
    return 2.0 * scheme.gamma() / static_cast<double>(r);
}

AssumptionReport validate_assumptions(const WeightScheme& scheme, std::size_t r_max) {
    if (r_max < 2) {
        throw InputError("r_max must be at least 2");
    }
    AssumptionReport rep;
    rep.gamma = scheme.gamma();
    rep.r_max = r_max;
    rep.k_sq_limit = k_squared_limit(scheme);
    rep.tau_bound = scheme.family() == WeightFamily::unit ? 0.0 : scheme.gamma();

    // Weights do not depend on r, so running sums give every prefix in one pass.
    // r |mean - 1| = |sum_i (k_i - 1)|, accumulated from the exact deviations +-gamma.
    double deviation = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 1; r <= r_max; ++r) {
        const double k = scheme(r);
        deviation += scheme.deviation(r);
        sum_sq += k * k;
        rep.c_k_observed = std::max(rep.c_k_observed, k);
        rep.tau_observed = std::max(rep.tau_observed, std::abs(deviation));
    }
    rep.k_sq_sequence_tail = sum_sq / static_cast<double>(r_max);

    constexpr double slack = 1e-12;
    rep.mean_bounded = rep.tau_observed <= rep.tau_bound + slack;
    rep.uniformly_bounded = rep.c_k_observed < 2.0 + slack;
    rep.second_moment_limit =
        rep.k_sq_limit > 1.0 &&
        std::abs(rep.k_sq_sequence_tail - rep.k_sq_limit) <= k_squared_rate(scheme, r_max) + slack;
    return rep;
}

}  // namespace gmmd
