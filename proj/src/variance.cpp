#include "gmmd/variance.hpp"

#include "gmmd/error.hpp"
#include "gmmd/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gmmd {

std::string_view to_string(VarianceVariant v) {
    return v == VarianceVariant::theorem ? "theorem" : "printed";
}

VarianceVariant parse_variance_variant(std::string_view name) {
    if (name == "theorem") return VarianceVariant::theorem;
    if (name == "printed") return VarianceVariant::printed;
    throw InputError("unknown variance variant '" + std::string(name) + "' (expected theorem or printed)");
}

double pooled_embedding_inner(const GroupedSample& sample, const KernelSpec& spec, PointView x) {
    if (x.size() != sample.dim()) {
        throw InputError("query point dimension does not match the sample");
    }
    const auto pi = proportions(sample);
    double total = 0.0;
    for (std::size_t j = 0; j < sample.num_groups(); ++j) {
        const PointSet& g = sample.group(j);
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += spec(x, g[i]);
        total += pi[j] * acc / static_cast<double>(g.size());
    }
    return total;
}

NuHatSq nu_hat_sq(const GroupedSample& sample, const KernelRowSums& sums) {
    const std::size_t s = sample.num_groups();
    const auto pi = proportions(sample);
    NuHatSq out;
    out.per_group.resize(s);
    for (std::size_t j = 0; j < s; ++j) {
        const std::size_t nj = sample.group_size(j);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < nj; ++i) {
            double f = 0.0;
            for (std::size_t l = 0; l < s; ++l) {
                f += pi[l] * sums.rows[j][l][i] / static_cast<double>(sample.group_size(l));
            }
            sum += f;
            sum_sq += f * f;
        }
        const double mean = sum / static_cast<double>(nj);
        const double v = sum_sq / static_cast<double>(nj) - mean * mean;
        out.per_group[j] = std::max(v, 0.0);
        out.pooled += pi[j] * out.per_group[j];
    }
    return out;
}

NuHatSq nu_hat_sq(const GroupedSample& sample, const KernelSpec& spec) {
    return nu_hat_sq(sample, compute_row_sums(sample, spec));
}

double null_variance_factor(std::span<const double> pi, const WeightScheme& scheme, VarianceVariant variant) {
    double sum = 0.0;
    for (double p : pi) sum += (1.0 - p) * (1.0 - p) / p;
    const double inner = variant == VarianceVariant::printed ? 4.0 : 1.0;
    return 4.0 * (k_squared_limit(scheme) - 1.0) * inner * sum;
}

VarianceEstimate sigma_hat_sq(const GroupedSample& sample, const KernelRowSums& sums, const WeightScheme& scheme,
                              VarianceVariant variant) {
    const auto nu = nu_hat_sq(sample, sums);
    const auto pi = proportions(sample);
    VarianceEstimate est;
    est.variant = variant;
    est.nu_sq = nu.pooled;
    est.per_group_nu_sq = nu.per_group;
    est.sigma_sq = null_variance_factor(pi, scheme, variant) * nu.pooled;
    return est;
}

VarianceEstimate sigma_hat_sq(const GroupedSample& sample, const KernelSpec& spec, const WeightScheme& scheme,
                              VarianceVariant variant) {
    return sigma_hat_sq(sample, compute_row_sums(sample, spec), scheme, variant);
}

double EmbeddingEnsemble::pooled_inner(PointView x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < num_groups(); ++j) acc += rho(j) * mean_inner(j, x);
    return acc;
}

double EmbeddingEnsemble::total_inner(PointView x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < num_groups(); ++j) acc += mean_inner(j, x);
    return acc;
}

EmpiricalEnsemble::EmpiricalEnsemble(GroupedSample reference, KernelSpec spec, std::vector<double> rho)
    : reference_(std::move(reference)), spec_(spec), rho_(std::move(rho)) {
    if (rho_.size() != reference_.num_groups()) {
        throw InputError("ensemble needs one proportion per group");
    }
    validate_proportions(rho_);
    const std::size_t s = reference_.num_groups();
    const KernelRowSums sums = compute_row_sums(reference_, spec_);
    gram_.assign(s * s, 0.0);
    for (std::size_t j = 0; j < s; ++j) {
        for (std::size_t l = 0; l < s; ++l) {
            gram_[j * s + l] = sums.block_total(j, l) / (static_cast<double>(reference_.group_size(j)) *
                                                          static_cast<double>(reference_.group_size(l)));
        }
    }
    // Row sums of block (j,l) and (l,j) accumulate in different orders; keep the matrix exactly symmetric.
    for (std::size_t j = 0; j < s; ++j) {
        for (std::size_t l = j + 1; l < s; ++l) gram_[l * s + j] = gram_[j * s + l];
    }
}

double EmpiricalEnsemble::mean_inner(std::size_t j, PointView x) const {
    const PointSet& g = reference_.group(j);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) acc += spec_(x, g[i]);
    return acc / static_cast<double>(g.size());
}

TableEnsemble::TableEnsemble(PointSet points, std::vector<std::vector<double>> mean_inner, std::vector<double> gram,
                             std::vector<double> rho)
    : points_(std::move(points)), mean_inner_(std::move(mean_inner)), gram_(std::move(gram)), rho_(std::move(rho)) {
    const std::size_t s = rho_.size();
    validate_proportions(rho_);
    if (gram_.size() != s * s) {
        throw InputError("table ensemble: gram must be s x s");
    }
    if (mean_inner_.size() != points_.size()) {
        throw InputError("table ensemble: one row of inner products per point");
    }
    for (const auto& row : mean_inner_) {
        if (row.size() != s) throw InputError("table ensemble: inner-product row must have s entries");
    }
    for (std::size_t j = 0; j < s; ++j) {
        for (std::size_t l = 0; l < s; ++l) {
            if (gram_[j * s + l] != gram_[l * s + j]) throw InputError("table ensemble: gram must be symmetric");
        }
    }
}

double TableEnsemble::mean_inner(std::size_t j, PointView x) const {
    for (std::size_t q = 0; q < points_.size(); ++q) {
        const PointView p = points_[q];
        if (p.size() == x.size() && std::equal(p.begin(), p.end(), x.begin())) {
            return mean_inner_[q].at(j);
        }
    }
    throw InputError("query point is not in the ensemble table");
}

namespace {

void check_group(const EmbeddingEnsemble& ens, std::size_t j) {
    if (j >= ens.num_groups()) {
        throw InputError("group index " + std::to_string(j) + " out of range");
    }
}

// <K(x,.) - m_j, sum_l coef_l m_l>
double centered_inner(const EmbeddingEnsemble& ens, std::size_t j, PointView x, const std::vector<double>& coef) {
    double acc = 0.0;
    for (std::size_t l = 0; l < coef.size(); ++l) {
        if (coef[l] == 0.0) continue;
        acc += coef[l] * (ens.mean_inner(l, x) - ens.gram_mean(j, l));
    }
    return acc;
}

// (1 - 2 rho_j + s rho_j) m_j + rho_j (m_j - mu) = (1 - 2 rho_j + s rho_j) m_j - rho_j sum_{l != j} m_l
std::vector<double> u_direction(const EmbeddingEnsemble& ens, std::size_t j) {
    const std::size_t s = ens.num_groups();
    const double rj = ens.rho(j);
    std::vector<double> coef(s, -rj);
    coef[j] = 1.0 - 2.0 * rj + static_cast<double>(s) * rj;
    return coef;
}

// m - rho_j m_j = sum_{l != j} rho_l m_l
std::vector<double> v_direction(const EmbeddingEnsemble& ens, std::size_t j) {
    std::vector<double> coef(ens.num_groups());
    for (std::size_t l = 0; l < coef.size(); ++l) coef[l] = l == j ? 0.0 : ens.rho(l);
    return coef;
}

}  // namespace

double u_value(const EmbeddingEnsemble& ens, std::size_t j, PointView x) {
    check_group(ens, j);
    return centered_inner(ens, j, x, u_direction(ens, j));
}

double v_value(const EmbeddingEnsemble& ens, std::size_t j, PointView x) {
    check_group(ens, j);
    return centered_inner(ens, j, x, v_direction(ens, j));
}

std::uint64_t group_stream(std::uint64_t seed, std::size_t group) {
    return random::mix64(seed ^ random::mix64(static_cast<std::uint64_t>(group) + 1));
}

VarianceEstimate theoretical_sigma_sq(std::span<const GroupSampler> samplers, const EmbeddingEnsemble& ens,
                                      const WeightScheme& scheme, std::size_t mc_draws, std::uint64_t seed) {
    if (mc_draws == 0) {
        throw InputError("mc_draws must be positive");
    }
    const std::size_t s = ens.num_groups();
    if (samplers.size() != s) {
        throw InputError("need one sampler per group");
    }
    const double k_sq = k_squared_limit(scheme);
    constexpr std::size_t kBatches = 10;

    VarianceEstimate out;
    out.variant = VarianceVariant::theorem;
    out.per_group_nu_sq.resize(s);
    out.per_group_sigma_sq.resize(s);
    std::vector<double> batch_totals(kBatches, 0.0);

    for (std::size_t j = 0; j < s; ++j) {
        const PointSet draws = samplers[j](group_stream(seed, j), mc_draws);
        if (draws.size() != mc_draws) {
            throw InputError("sampler returned the wrong number of draws");
        }
        const auto u_coef = u_direction(ens, j);
        const auto v_coef = v_direction(ens, j);
        std::vector<double> u(mc_draws), v(mc_draws), f(mc_draws);
        for (std::size_t i = 0; i < mc_draws; ++i) {
            const PointView x = draws[i];
            std::vector<double> inner(s);
            for (std::size_t l = 0; l < s; ++l) inner[l] = ens.mean_inner(l, x);
            double uu = 0.0, vv = 0.0, ff = 0.0;
            for (std::size_t l = 0; l < s; ++l) {
                const double centered = inner[l] - ens.gram_mean(j, l);
                uu += u_coef[l] * centered;
                vv += v_coef[l] * centered;
                ff += ens.rho(l) * inner[l];
            }
            u[i] = uu;
            v[i] = vv;
            f[i] = ff;
        }

        // Paired moments over [begin, end).
        auto sigma_j = [&](std::size_t begin, std::size_t end) {
            const double cnt = static_cast<double>(end - begin);
            double mu = 0.0, mv = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                mu += u[i];
                mv += v[i];
            }
            mu /= cnt;
            mv /= cnt;
            double suu = 0.0, svv = 0.0, suv = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const double du = u[i] - mu, dv = v[i] - mv;
                suu += du * du;
                svv += dv * dv;
                suv += du * dv;
            }
            return (suu + k_sq * svv - 2.0 * suv) / cnt;
        };

        out.per_group_sigma_sq[j] = std::max(sigma_j(0, mc_draws), 0.0);
        out.sigma_sq += 4.0 / ens.rho(j) * out.per_group_sigma_sq[j];

        double mf = 0.0;
        for (double x : f) mf += x;
        mf /= static_cast<double>(mc_draws);
        double sf = 0.0;
        for (double x : f) sf += (x - mf) * (x - mf);
        out.per_group_nu_sq[j] = sf / static_cast<double>(mc_draws);
        out.nu_sq += ens.rho(j) * out.per_group_nu_sq[j];

        if (mc_draws >= kBatches * 2) {
            const std::size_t width = mc_draws / kBatches;
            for (std::size_t b = 0; b < kBatches; ++b) {
                batch_totals[b] += 4.0 / ens.rho(j) * sigma_j(b * width, (b + 1) * width);
            }
        }
    }

    if (mc_draws >= kBatches * 2) {
        double mean = 0.0;
        for (double t : batch_totals) mean += t;
        mean /= kBatches;
        double ss = 0.0;
        for (double t : batch_totals) ss += (t - mean) * (t - mean);
        // Batch-means standard error of the full-sample estimate.
        out.sigma_sq_stderr = std::sqrt(ss / (kBatches - 1) / kBatches);
    }
    return out;
}

}  // namespace gmmd
