#pragma once

#include <cstddef>
#include <string_view>

namespace gmmd {

// alternating: k_{i,r}(gamma) = 1 + (-1)^i gamma.
// unit: every weight is 1, which collapses the weighted estimator onto the naive one.
enum class WeightFamily { alternating, unit };

// Both shipped families produce weights that depend on i only, never on the length r.
class WeightScheme {
public:
    // Throws InputError unless 0 < gamma <= 1.
    explicit WeightScheme(double gamma, WeightFamily family = WeightFamily::alternating);

    static WeightScheme unit() { return WeightScheme(1.0, WeightFamily::unit); }

    double gamma() const noexcept { return gamma_; }
    WeightFamily family() const noexcept { return family_; }

    // Unchecked k_{i,r}; i is 1-based.
    double operator()(std::size_t i) const noexcept {
        if (family_ == WeightFamily::unit) return 1.0;
        return (i % 2 == 0) ? 1.0 + gamma_ : 1.0 - gamma_;
    }

    // k_{i,r} - 1 without the rounding of forming 1 + gamma first.
    double deviation(std::size_t i) const noexcept {
        if (family_ == WeightFamily::unit) return 0.0;
        return (i % 2 == 0) ? gamma_ : -gamma_;
    }

private:
    double gamma_;
    WeightFamily family_;
};

// k_{i,r}(gamma) for 1 <= i <= r; throws InputError otherwise. Zero is possible when gamma = 1.
double weight(const WeightScheme& scheme, std::size_t i, std::size_t r);

// lim (1/r) sum_i k_{i,r}^2.
double k_squared_limit(const WeightScheme& scheme) noexcept;

// Bound on |(1/r) sum_i k_{i,r}^2 - k^2(gamma)| holding for every r >= 1.
double k_squared_rate(const WeightScheme& scheme, std::size_t r) noexcept;

struct AssumptionReport {
    double gamma = 0.0;
    std::size_t r_max = 0;
    double tau_observed = 0.0;        // max over r <= r_max of r |mean_i k_{i,r} - 1|
    double tau_bound = 0.0;
    double c_k_observed = 0.0;        // max weight seen
    double k_sq_sequence_tail = 0.0;  // (1/r_max) sum k^2
    double k_sq_limit = 0.0;
    bool mean_bounded = false;        // tau_observed <= tau_bound
    bool uniformly_bounded = false;   // max weight at most 2
    bool second_moment_limit = false; // mean square converges to a limit > 1

    bool all_pass() const noexcept { return mean_bounded && uniformly_bounded && second_moment_limit; }
};

AssumptionReport validate_assumptions(const WeightScheme& scheme, std::size_t r_max);

}  // namespace gmmd
