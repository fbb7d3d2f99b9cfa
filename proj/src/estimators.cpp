#include "gmmd/estimators.hpp"

#include "gmmd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gmmd {

GroupedSample::GroupedSample(std::vector<PointSet> groups) : groups_(std::move(groups)) {
    if (groups_.size() < 2) {
        throw InputError("a grouped sample needs at least 2 groups, got " + std::to_string(groups_.size()));
    }
    const std::size_t d = groups_.front().dim();
    for (std::size_t j = 0; j < groups_.size(); ++j) {
        if (groups_[j].empty()) {
            throw InputError("group " + std::to_string(j + 1) + " is empty");
        }
        if (groups_[j].dim() != d) {
            throw InputError("group " + std::to_string(j + 1) + " has dimension " +
                             std::to_string(groups_[j].dim()) + ", expected " + std::to_string(d));
        }
        total_ += groups_[j].size();
    }
}

std::vector<std::size_t> GroupedSample::sizes() const {
    std::vector<std::size_t> out;
    out.reserve(groups_.size());
    for (const auto& g : groups_) out.push_back(g.size());
    return out;
}

PointSet GroupedSample::pooled() const {
    std::vector<double> values;
    values.reserve(total_ * dim());
    for (const auto& g : groups_) {
        values.insert(values.end(), g.values().begin(), g.values().end());
    }
    return PointSet(dim(), std::move(values));
}

std::vector<double> proportions(std::span<const std::size_t> sizes) {
    std::size_t total = 0;
    for (std::size_t s : sizes) total += s;
    const double n = static_cast<double>(total);
    std::vector<double> pi;
    pi.reserve(sizes.size());
    for (std::size_t s : sizes) pi.push_back(static_cast<double>(s) / n);
    return pi;
}

std::vector<double> proportions(const GroupedSample& sample) { return proportions(sample.sizes()); }

void validate_proportions(std::span<const double> rho) {
    if (rho.size() < 2) {
        throw InputError("need at least 2 proportions");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) {
        if (!(rho[j] > 0.0 && rho[j] < 1.0)) {
            throw InputError("proportion " + std::to_string(j + 1) + " must lie in (0, 1)");
        }
        total += rho[j];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InputError("proportions must sum to 1");
    }
}

std::vector<std::size_t> allocate_sizes(std::size_t n, std::span<const double> rho) {
    validate_proportions(rho);
    const std::size_t s = rho.size();
    std::vector<std::size_t> sizes(s, 0);
    std::size_t assigned = 0;
    for (std::size_t j = 0; j + 1 < s; ++j) {
        // Integer part of n rho_j; the nudge keeps e.g. 100 * 0.57 from flooring to 56.
        const double exact = static_cast<double>(n) * rho[j];
        sizes[j] = static_cast<std::size_t>(std::floor(exact + 1e-9 * std::max(1.0, exact)));
        assigned += sizes[j];
    }
    if (assigned >= n) {
        throw InputError("allocation leaves group " + std::to_string(s) + " empty");
    }
    sizes[s - 1] = n - assigned;
    for (std::size_t j = 0; j < s; ++j) {
        if (sizes[j] == 0) {
            throw InputError("allocation leaves group " + std::to_string(j + 1) + " empty; increase n");
        }
    }
    return sizes;
}

double KernelRowSums::block_total(std::size_t j, std::size_t l) const {
    const auto& r = rows.at(j).at(l);
    return std::accumulate(r.begin(), r.end(), 0.0);
}

KernelRowSums compute_row_sums(const GroupedSample& sample, const KernelSpec& spec) {
    const std::size_t s = sample.num_groups();
    KernelRowSums out;
    out.rows.resize(s);
    for (std::size_t j = 0; j < s; ++j) {
        out.rows[j].resize(s);
        for (std::size_t l = 0; l < s; ++l) {
            out.rows[j][l].assign(sample.group_size(j), 0.0);
        }
    }

    for (std::size_t j = 0; j < s; ++j) {
        const PointSet& a = sample.group(j);
        auto& own = out.rows[j][j];
        for (std::size_t i = 0; i < a.size(); ++i) {
            own[i] += spec(a[i], a[i]);
            for (std::size_t p = i + 1; p < a.size(); ++p) {
                const double k = spec(a[i], a[p]);
                own[i] += k;
                own[p] += k;
            }
        }
        for (std::size_t l = j + 1; l < s; ++l) {
            const PointSet& b = sample.group(l);
            auto& forward = out.rows[j][l];
            auto& backward = out.rows[l][j];
            for (std::size_t i = 0; i < a.size(); ++i) {
                double row = 0.0;
                for (std::size_t p = 0; p < b.size(); ++p) {
                    const double k = spec(a[i], b[p]);
                    row += k;
                    backward[p] += k;
                }
                forward[i] = row;
            }
        }
    }
    return out;
}

namespace {

// sum_j sum_{l != j} pi_l { S_jj / n_j^2 + S_ll / n_l^2 - 2 cross(j,l) / (n_j n_l) }
template <typename Cross>
double assemble(const GroupedSample& sample, const KernelRowSums& sums, Cross cross) {
    const std::size_t s = sample.num_groups();
    const auto pi = proportions(sample);
    std::vector<double> within(s);
    for (std::size_t j = 0; j < s; ++j) {
        const double nj = static_cast<double>(sample.group_size(j));
        within[j] = sums.block_total(j, j) / (nj * nj);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
        const double nj = static_cast<double>(sample.group_size(j));
        for (std::size_t l = 0; l < s; ++l) {
            if (l == j) continue;
            const double nl = static_cast<double>(sample.group_size(l));
            total += pi[l] * (within[j] + within[l] - 2.0 * cross(j, l) / (nj * nl));
        }
    }
    return total;
}

}  // namespace

EstimateResult naive_gmmd(const GroupedSample& sample, const KernelRowSums& sums) {
    const double value = assemble(sample, sums, [&](std::size_t j, std::size_t l) { return sums.block_total(j, l); });
    return {std::max(value, 0.0), sample.total_size(), std::nullopt};
}

EstimateResult weighted_gmmd(const GroupedSample& sample, const KernelRowSums& sums, const WeightScheme& scheme) {
    const double value = assemble(sample, sums, [&](std::size_t j, std::size_t l) {
        const auto& row = sums.rows[j][l];
        double acc = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            acc += scheme(i + 1) * row[i];
        }
        return acc;
    });
    return {value, sample.total_size(), scheme.gamma()};
}

EstimateResult naive_gmmd(const GroupedSample& sample, const KernelSpec& spec) {
    return naive_gmmd(sample, compute_row_sums(sample, spec));
}

EstimateResult weighted_gmmd(const GroupedSample& sample, const KernelSpec& spec, const WeightScheme& scheme) {
    return weighted_gmmd(sample, compute_row_sums(sample, spec), scheme);
}

}  // namespace gmmd
