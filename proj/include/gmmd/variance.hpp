#pragma once

#include "gmmd/estimators.hpp"
#include "gmmd/kernels.hpp"
#include "gmmd/weights.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace gmmd {

enum class VarianceVariant {
    theorem,  // 4 (k^2 - 1) nu^2 sum_j (1 - pi_j)^2 / pi_j
    printed,  // the same with an extra factor 4 inside the sum
};

std::string_view to_string(VarianceVariant v);
VarianceVariant parse_variance_variant(std::string_view name);

struct VarianceEstimate {
    double sigma_sq = 0.0;  // asymptotic variance of sqrt(n) * T_hat
    double nu_sq = 0.0;
    std::vector<double> per_group_nu_sq;
    VarianceVariant variant = VarianceVariant::theorem;

    // Populated by theoretical_sigma_sq only.
    std::vector<double> per_group_sigma_sq;
    double sigma_sq_stderr = 0.0;
};

// <K(x,.), m_hat> with m_hat = sum_j pi_j m_hat_j.
double pooled_embedding_inner(const GroupedSample& sample, const KernelSpec& spec, PointView x);

struct NuHatSq {
    std::vector<double> per_group;
    double pooled = 0.0;
};

// Within-group empirical variance of <K(X_i^(j),.), m_hat>, clamped at 0; pooled with weights pi_j.
NuHatSq nu_hat_sq(const GroupedSample& sample, const KernelSpec& spec);
NuHatSq nu_hat_sq(const GroupedSample& sample, const KernelRowSums& sums);

// Scale factor c such that sigma_hat^2 = c * nu_hat^2.
double null_variance_factor(std::span<const double> pi, const WeightScheme& scheme, VarianceVariant variant);

VarianceEstimate sigma_hat_sq(const GroupedSample& sample, const KernelSpec& spec, const WeightScheme& scheme,
                              VarianceVariant variant = VarianceVariant::theorem);
VarianceEstimate sigma_hat_sq(const GroupedSample& sample, const KernelRowSums& sums, const WeightScheme& scheme,
                              VarianceVariant variant = VarianceVariant::theorem);

// Population kernel mean embeddings m_1..m_s of one kernel, with proportions rho.
// Everything u_value / v_value need is an inner product against some m_j.
class EmbeddingEnsemble {
public:
    virtual ~EmbeddingEnsemble() = default;

    virtual std::size_t num_groups() const = 0;
    virtual double rho(std::size_t j) const = 0;
    // <K(x,.), m_j>
    virtual double mean_inner(std::size_t j, PointView x) const = 0;
    // <m_j, m_l>
    virtual double gram_mean(std::size_t j, std::size_t l) const = 0;

    // <K(x,.), m> with m = sum_j rho_j m_j
    double pooled_inner(PointView x) const;
    // <K(x,.), mu> with mu = sum_j m_j
    double total_inner(PointView x) const;
};

// Embeddings estimated from a (typically large, held-out) sample per group.
class EmpiricalEnsemble final : public EmbeddingEnsemble {
public:
    EmpiricalEnsemble(GroupedSample reference, KernelSpec spec, std::vector<double> rho);

    std::size_t num_groups() const override { return reference_.num_groups(); }
    double rho(std::size_t j) const override { return rho_.at(j); }
    double mean_inner(std::size_t j, PointView x) const override;
    double gram_mean(std::size_t j, std::size_t l) const override { return gram_.at(j * num_groups() + l); }

private:
    GroupedSample reference_;
    KernelSpec spec_;
    std::vector<double> rho_;
    std::vector<double> gram_;
};

// Finite table of query points with given inner products; unknown queries throw InputError.
class TableEnsemble final : public EmbeddingEnsemble {
public:
    // mean_inner[q][j] = <K(points[q],.), m_j>; gram is s x s row-major.
    TableEnsemble(PointSet points, std::vector<std::vector<double>> mean_inner, std::vector<double> gram,
                  std::vector<double> rho);

    std::size_t num_groups() const override { return rho_.size(); }
    double rho(std::size_t j) const override { return rho_.at(j); }
    double mean_inner(std::size_t j, PointView x) const override;
    double gram_mean(std::size_t j, std::size_t l) const override { return gram_.at(j * num_groups() + l); }

private:
    PointSet points_;
    std::vector<std::vector<double>> mean_inner_;
    std::vector<double> gram_;
    std::vector<double> rho_;
};

// U_j(x) = <K(x,.) - m_j, (1 - 2 rho_j + s rho_j) m_j + rho_j (m_j - mu)>;  j is 0-based.
double u_value(const EmbeddingEnsemble& ens, std::size_t j, PointView x);
// V_j(x) = <K(x,.) - m_j, m - rho_j m_j>
double v_value(const EmbeddingEnsemble& ens, std::size_t j, PointView x);

// Draws `count` i.i.d. points from one group's distribution, deterministically in `stream`.
using GroupSampler = std::function<PointSet(std::uint64_t stream, std::size_t count)>;

// Per-group stream key derived from a master seed.
std::uint64_t group_stream(std::uint64_t seed, std::size_t group);

// sigma^2_gamma = sum_j 4 sigma_j^2(gamma) / rho_j with
// sigma_j^2 = Var(U_j) + k^2(gamma) Var(V_j) - 2 Cov(U_j, V_j), each moment estimated from
// mc_draws paired draws of group j. per_group_nu_sq[j] holds Var(<K(X^(j),.), m>).
VarianceEstimate theoretical_sigma_sq(std::span<const GroupSampler> samplers, const EmbeddingEnsemble& ens,
                                      const WeightScheme& scheme, std::size_t mc_draws, std::uint64_t seed);

}  // namespace gmmd
