#pragma once

#include "gmmd/estimators.hpp"
#include "gmmd/kernels.hpp"
#include "gmmd/random.hpp"
#include "gmmd/variance.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gmmd::sim {

// Independent coordinates, N(mean_k, sdev_k^2).
struct NormalDist {
    std::vector<double> mean;
    std::vector<double> sdev;
    bool operator==(const NormalDist&) const = default;
};

// Independent coordinates, U(lo_k, hi_k).
struct UniformDist {
    std::vector<double> lo;
    std::vector<double> hi;
    bool operator==(const UniformDist&) const = default;
};

class GeneratorSpec {
public:
    using Dist = std::variant<NormalDist, UniformDist>;

    explicit GeneratorSpec(Dist dist);
    static GeneratorSpec normal(std::vector<double> mean, std::vector<double> sdev);
    static GeneratorSpec uniform(std::vector<double> lo, std::vector<double> hi);

    std::size_t dim() const noexcept;
    const Dist& dist() const noexcept { return dist_; }
    const NormalDist* as_normal() const noexcept { return std::get_if<NormalDist>(&dist_); }

    bool operator==(const GeneratorSpec&) const = default;

private:
    Dist dist_;
};

// Draw k of the stream fills coordinate k % d of point k / d.
PointSet draw_points(const GeneratorSpec& gen, const random::CounterStream& stream, std::size_t count);

// Sampler reading stream (key, 0); used for the theoretical variance.
GroupSampler make_sampler(const GeneratorSpec& gen);

struct ScenarioSpec {
    std::vector<GeneratorSpec> generators;
    std::vector<double> rho;
    std::size_t n = 0;
    double gamma = 0.5;
    KernelSpec kernel{KernelFamily::gaussian, 1.0};
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    VarianceVariant variant = VarianceVariant::theorem;

    std::size_t num_groups() const noexcept { return generators.size(); }
    bool is_null() const;
    // Throws InputError with the offending field name.
    void validate() const;
};

// Group j of replication r reads stream (seed, r * 2^32 + j).
GroupedSample generate_grouped_sample(const ScenarioSpec& scn, std::size_t rep_index);

// E K(X,Y) for X ~ N(mu1, s1^2), Y ~ N(mu2, s2^2) independent, Gaussian kernel with bandwidth h:
// h / sqrt(h^2 + s1^2 + s2^2) * exp(-(mu1 - mu2)^2 / (2 (h^2 + s1^2 + s2^2))).
double gaussian_kernel_cross_expectation(double mu1, double s1, double mu2, double s2, double h);

// Product of the one-dimensional expectation over independent coordinates.
double gaussian_kernel_cross_expectation(const NormalDist& a, const NormalDist& b, double h);

// Closed-form embeddings of normal distributions under the Gaussian kernel.
class GaussianEnsemble final : public EmbeddingEnsemble {
public:
    GaussianEnsemble(std::vector<NormalDist> dists, std::vector<double> rho, double bandwidth);
    // Throws UnsupportedOracleError unless the kernel is Gaussian and every generator is normal.
    static GaussianEnsemble from_scenario(const ScenarioSpec& scn);

    std::size_t num_groups() const override { return dists_.size(); }
    double rho(std::size_t j) const override { return rho_.at(j); }
    double mean_inner(std::size_t j, PointView x) const override;
    double gram_mean(std::size_t j, std::size_t l) const override { return gram_.at(j * num_groups() + l); }

private:
    std::vector<NormalDist> dists_;
    std::vector<double> rho_;
    double bandwidth_;
    std::vector<double> gram_;
};

// sum_j sum_{l != j} rho_l MMD^2(P_j, P_l) from closed-form expectations.
double population_gmmd(const std::vector<NormalDist>& dists, const std::vector<double>& rho, double h);
double population_gmmd(const ScenarioSpec& scn);

// theoretical_sigma_sq with the closed-form ensemble and the scenario's generators.
VarianceEstimate theoretical_sigma_sq(const ScenarioSpec& scn, std::size_t mc_draws, std::uint64_t seed);

// Kolmogorov-Smirnov distance between the empirical CDF of values and N(0,1).
double ks_distance(std::vector<double> values);

struct ReplicationRecord {
    std::size_t rep = 0;
    double statistic = 0.0;     // weighted estimate
    double nu_sq = 0.0;         // pooled nu_hat^2
    double sigma_hat = 0.0;
    double z = 0.0;
    double p_value = 0.0;
    bool reject = false;
    double standardized = 0.0;  // sqrt(n)(T_hat - T) / sigma; z for null runs
};

struct SimulationAggregates {
    double mean_z = 0.0;
    double var_z = 0.0;
    double ks_z = 0.0;
    double mean_standardized = 0.0;
    double var_standardized = 0.0;
    double ks_standardized = 0.0;
    double rejection_rate = 0.0;
    double mean_scaled_error = 0.0;  // mean of sqrt(n)(T_hat - T)
    double var_scaled_error = 0.0;
    double mean_sigma_sq_theorem = 0.0;  // mean sigma_hat^2, both variants
    double mean_sigma_sq_printed = 0.0;

    bool operator==(const SimulationAggregates&) const = default;
};

enum class StudyKind { null_calibration, alternative_study };

struct SimulationReport {
    StudyKind kind = StudyKind::null_calibration;
    ScenarioSpec scenario;
    std::vector<std::size_t> sizes;
    double population_t = 0.0;
    std::optional<double> sigma_theory;
    std::vector<ReplicationRecord> records;
    SimulationAggregates aggregates;
};

// Recomputes aggregates from records; variances divide by the replication count.
SimulationAggregates aggregate(const ScenarioSpec& scn, std::span<const ReplicationRecord> records,
                               double population_t);

// Replications run on `threads` workers; results do not depend on the thread count.
SimulationReport run_null_calibration(const ScenarioSpec& scn, unsigned threads = 1);
SimulationReport run_alternative_study(const ScenarioSpec& scn, double population_t, double sigma_theory,
                                       unsigned threads = 1);

struct PowerPoint {
    double shift = 0.0;
    double power = 0.0;
};

// base must be a null scenario; group 2 is shifted by each grid value in every coordinate.
std::vector<PowerPoint> run_power_curve(const ScenarioSpec& base, const std::vector<double>& shift_grid,
                                        unsigned threads = 1);

// Seeded Fisher-Yates shuffle inside each group, using stream (seed, j).
GroupedSample shuffle_within_groups(const GroupedSample& sample, std::uint64_t seed);

}  // namespace gmmd::sim
