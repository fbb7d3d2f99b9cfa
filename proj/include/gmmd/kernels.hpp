#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gmmd {

using Point = std::vector<double>;
using PointView = std::span<const double>;

// Row-major block of n points in d dimensions. All coordinates are finite.
class PointSet {
public:
    explicit PointSet(std::size_t dim = 1);
    PointSet(std::size_t dim, std::vector<double> values);

    static PointSet from_points(const std::vector<Point>& points);

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return values_.empty(); }

    PointView operator[](std::size_t i) const noexcept {
        return {values_.data() + i * dim_, dim_};
    }

    void push_back(PointView p);
    void reserve(std::size_t n) { values_.reserve(n * dim_); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> mutable_values() noexcept { return values_; }

private:
    std::size_t dim_;
    std::vector<double> values_;
};

enum class KernelFamily { gaussian, laplacian };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

// Gaussian: exp(-||x-y||_2^2 / (2 h^2)).  Laplacian: exp(-||x-y||_1 / h).
class KernelSpec {
public:
    KernelSpec(KernelFamily family, double bandwidth);

    KernelFamily family() const noexcept { return family_; }
    double bandwidth() const noexcept { return bandwidth_; }

    // Unchecked evaluation for hot loops; callers guarantee equal dimensions.
    double operator()(PointView x, PointView y) const noexcept {
        const std::size_t d = x.size();
        double acc = 0.0;
        if (family_ == KernelFamily::gaussian) {
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = x[k] - y[k];
                acc += diff * diff;
            }
        } else {
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = x[k] - y[k];
                acc += diff < 0.0 ? -diff : diff;
            }
        }
        return exp_of(acc);
    }

private:
    double exp_of(double distance) const noexcept;

    KernelFamily family_;
    double bandwidth_;
    double scale_;  // multiplies the distance inside exp(-.)
};

struct GramMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// Checked single evaluation; throws InputError on dimension mismatch or non-finite input.
double eval_kernel(const KernelSpec& spec, PointView x, PointView y);

// Entry (i,p) = K(a_i, b_p). Empty inputs give an empty block.
GramMatrix gram_block(const KernelSpec& spec, const PointSet& a, const PointSet& b);

// sup K over all pairs; 1 for every supported family.
double kernel_bound(const KernelSpec& spec) noexcept;

// Median of pairwise Euclidean distances over i < j, or 1.0 when that median is 0.
double median_heuristic_bandwidth(const PointSet& points);

}  // namespace gmmd
