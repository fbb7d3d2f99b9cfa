#pragma once

#include "gmmd/estimators.hpp"
#include "gmmd/kernels.hpp"
#include "gmmd/variance.hpp"
#include "gmmd/weights.hpp"

#include <cstddef>

namespace gmmd {

struct TestResult {
    double statistic_raw = 0.0;  // weighted estimate
    double sigma_hat = 0.0;
    double z_score = 0.0;        // sqrt(n) * statistic_raw / sigma_hat
    double p_value = 0.0;        // upper tail, 1 - Phi(z)
    bool reject = false;         // p_value <= alpha
    double alpha = 0.05;
    std::size_t n = 0;
    double gamma = 0.0;
    VarianceVariant variant = VarianceVariant::theorem;
};

// Phi(z) = erfc(-z / sqrt 2) / 2.
double normal_cdf(double z) noexcept;
// 1 - Phi(z), without cancellation for large z.
double normal_upper_tail(double z) noexcept;

// One-sided upper-tail test of equal distributions. Requires every group to have at
// least 2 points; throws DegenerateVarianceError when the variance estimate is 0.
TestResult homogeneity_test(const GroupedSample& sample, const KernelSpec& spec, const WeightScheme& scheme,
                            double alpha, VarianceVariant variant = VarianceVariant::theorem);

// Standardizes a precomputed statistic; used by the simulation harness.
TestResult decide(double statistic, double sigma_sq, std::size_t n, double alpha, const WeightScheme& scheme,
                  VarianceVariant variant);

}  // namespace gmmd
