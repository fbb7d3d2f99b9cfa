#pragma once

#include "gmmd/kernels.hpp"
#include "gmmd/weights.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gmmd {

// s >= 2 groups of finite points sharing one dimension, each group nonempty.
// Point order inside a group is significant for the weighted estimator.
class GroupedSample {
public:
    explicit GroupedSample(std::vector<PointSet> groups);

    std::size_t num_groups() const noexcept { return groups_.size(); }
    std::size_t dim() const noexcept { return groups_.front().dim(); }
    std::size_t total_size() const noexcept { return total_; }
    std::size_t group_size(std::size_t j) const { return groups_.at(j).size(); }
    std::vector<std::size_t> sizes() const;

    const PointSet& group(std::size_t j) const { return groups_.at(j); }
    const std::vector<PointSet>& groups() const noexcept { return groups_; }

    // All groups concatenated in group order.
    PointSet pooled() const;

private:
    std::vector<PointSet> groups_;
    std::size_t total_ = 0;
};

// pi_j = n_j / n.
std::vector<double> proportions(const GroupedSample& sample);
std::vector<double> proportions(std::span<const std::size_t> sizes);

// n_j = floor(n rho_j) for j < s and n_s = n - sum_{j<s} n_j. Throws InputError naming
// the first group that would be empty.
std::vector<std::size_t> allocate_sizes(std::size_t n, std::span<const double> rho);

// Checks rho_j in (0,1) and sum rho = 1 within 1e-12.
void validate_proportions(std::span<const double> rho);

struct EstimateResult {
    double statistic = 0.0;
    std::size_t n = 0;
    std::optional<double> gamma;  // empty for the naive estimator
};

// Row sums of every Gram block: rows[j][l][i] = sum_p K(X_i^(j), X_p^(l)).
// Each unordered block is visited once in row-major order, so the sums are
// bit-reproducible for a given sample.
struct KernelRowSums {
    std::vector<std::vector<std::vector<double>>> rows;

    double block_total(std::size_t j, std::size_t l) const;
};

KernelRowSums compute_row_sums(const GroupedSample& sample, const KernelSpec& spec);

// Plug-in estimator with V-statistic double sums (diagonal included); clamped at 0.
EstimateResult naive_gmmd(const GroupedSample& sample, const KernelSpec& spec);

// Same expansion with k_{i,n_j}(gamma) on the cross terms. Depends on the stored point
// order and can be negative.
EstimateResult weighted_gmmd(const GroupedSample& sample, const KernelSpec& spec, const WeightScheme& scheme);

// Variants reusing precomputed row sums.
EstimateResult naive_gmmd(const GroupedSample& sample, const KernelRowSums& sums);
EstimateResult weighted_gmmd(const GroupedSample& sample, const KernelRowSums& sums, const WeightScheme& scheme);

}  // namespace gmmd
