#include "gmmd/inference.hpp"

#include "gmmd/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace gmmd {

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_upper_tail(double z) noexcept { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

TestResult decide(double statistic, double sigma_sq, std::size_t n, double alpha, const WeightScheme& scheme,
                  VarianceVariant variant) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("alpha must lie in (0, 1)");
    }
    if (!(sigma_sq > 0.0)) {
        throw DegenerateVarianceError("degenerate variance: the null-variance estimate is 0");
    }
    TestResult r;
    r.statistic_raw = statistic;
    r.sigma_hat = std::sqrt(sigma_sq);
    r.z_score = std::sqrt(static_cast<double>(n)) * statistic / r.sigma_hat;
    r.p_value = normal_upper_tail(r.z_score);
    r.alpha = alpha;
    r.reject = r.p_value <= alpha;
    r.n = n;
    r.gamma = scheme.gamma();
    r.variant = variant;
    return r;
}

TestResult homogeneity_test(const GroupedSample& sample, const KernelSpec& spec, const WeightScheme& scheme,
                            double alpha, VarianceVariant variant) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("alpha must lie in (0, 1)");
    }
    for (std::size_t j = 0; j < sample.num_groups(); ++j) {
        if (sample.group_size(j) < 2) {
            throw InputError("group " + std::to_string(j + 1) + " has fewer than 2 points");
        }
    }
    const KernelRowSums sums = compute_row_sums(sample, spec);
    const EstimateResult est = weighted_gmmd(sample, sums, scheme);
    const VarianceEstimate var = sigma_hat_sq(sample, sums, scheme, variant);
    return decide(est.statistic, var.sigma_sq, sample.total_size(), alpha, scheme, variant);
}

}  // namespace gmmd
