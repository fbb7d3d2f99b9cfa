#include "gmmd/kernels.hpp"

#include "gmmd/error.hpp"

#include <algorithm>
#include <cmath>

namespace gmmd {

namespace {

void require_finite(PointView p) {
    for (double v : p) {
        if (!std::isfinite(v)) {
            throw InputError("point has a non-finite coordinate");
        }
    }
}

}  // namespace

PointSet::PointSet(std::size_t dim) : dim_(dim) {
    if (dim == 0) {
        throw InputError("point dimension must be at least 1");
    }
}

PointSet::PointSet(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
    if (dim == 0) {
        throw InputError("point dimension must be at least 1");
    }
    if (values_.size() % dim != 0) {
        throw InputError("coordinate count is not a multiple of the dimension");
    }
    require_finite(values_);
}

PointSet PointSet::from_points(const std::vector<Point>& points) {
    if (points.empty()) {
        throw InputError("cannot infer dimension from an empty point list");
    }
    PointSet set(points.front().size());
    set.reserve(points.size());
    for (const auto& p : points) {
        set.push_back(p);
    }
    return set;
}

void PointSet::push_back(PointView p) {
    if (p.size() != dim_) {
        throw InputError("point dimension " + std::to_string(p.size()) + " does not match " +
                         std::to_string(dim_));
    }
    require_finite(p);
    values_.insert(values_.end(), p.begin(), p.end());
}

std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian:
            return "gaussian";
        case KernelFamily::laplacian:
            return "laplacian";
    }
    return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "laplacian") return KernelFamily::laplacian;
    throw InputError("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec::KernelSpec(KernelFamily family, double bandwidth) : family_(family), bandwidth_(bandwidth) {
    if (!std::isfinite(bandwidth) || bandwidth <= 0.0) {
        throw InputError("kernel bandwidth must be finite and > 0");
    }
    scale_ = family == KernelFamily::gaussian ? 1.0 / (2.0 * bandwidth * bandwidth) : 1.0 / bandwidth;
}

double KernelSpec::exp_of(double distance) const noexcept { return std::exp(-distance * scale_); }

double eval_kernel(const KernelSpec& spec, PointView x, PointView y) {
    if (x.size() != y.size()) {
        throw InputError("kernel arguments have different dimensions");
    }
    if (x.empty()) {
        throw InputError("kernel arguments must have dimension >= 1");
    }
    require_finite(x);
    require_finite(y);
    return spec(x, y);
}

GramMatrix gram_block(const KernelSpec& spec, const PointSet& a, const PointSet& b) {
    GramMatrix out;
    out.rows = a.size();
    out.cols = b.size();
    if (out.rows == 0 || out.cols == 0) {
        return out;
    }
    if (a.dim() != b.dim()) {
        throw InputError("gram_block: point sets have different dimensions");
    }
    out.values.resize(out.rows * out.cols);
    for (std::size_t i = 0; i < out.rows; ++i) {
        for (std::size_t p = 0; p < out.cols; ++p) {
            out.values[i * out.cols + p] = spec(a[i], b[p]);
        }
    }
    return out;
}

double kernel_bound(const KernelSpec&) noexcept { return 1.0; }

double median_heuristic_bandwidth(const PointSet& points) {
    const std::size_t n = points.size();
    if (n < 2) {
        throw InputError("median heuristic needs at least 2 points");
    }
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < points.dim(); ++k) {
                const double diff = points[i][k] - points[j][k];
                acc += diff * diff;
            }
            dist.push_back(std::sqrt(acc));
        }
    }
    // Even counts average the two middle order statistics.
    const std::size_t m = dist.size();
    std::nth_element(dist.begin(), dist.begin() + m / 2, dist.end());
    double median = dist[m / 2];
    if (m % 2 == 0) {
        const double lower = *std::max_element(dist.begin(), dist.begin() + m / 2);
        median = 0.5 * (lower + median);
    }
    return median > 0.0 ? median : 1.0;
}

}  // namespace gmmd
