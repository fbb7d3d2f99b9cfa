#include "gmmd/sim.hpp"

#include "gmmd/error.hpp"
#include "gmmd/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace gmmd::sim {

namespace {

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw InputError(field + ": " + message);
}

}  // namespace

GeneratorSpec::GeneratorSpec(Dist dist) : dist_(std::move(dist)) {
    if (const auto* nd = std::get_if<NormalDist>(&dist_)) {
        require(!nd->mean.empty() && nd->mean.size() == nd->sdev.size(), "normal",
                "mean and sdev need the same nonzero length");
        for (std::size_t k = 0; k < nd->mean.size(); ++k) {
            require(std::isfinite(nd->mean[k]), "mean", "must be finite");
            require(std::isfinite(nd->sdev[k]) && nd->sdev[k] > 0.0, "sdev", "must be finite and > 0");
        }
    } else {
        const auto& ud = std::get<UniformDist>(dist_);
        require(!ud.lo.empty() && ud.lo.size() == ud.hi.size(), "uniform", "lo and hi need the same nonzero length");
        for (std::size_t k = 0; k < ud.lo.size(); ++k) {
            require(std::isfinite(ud.lo[k]) && std::isfinite(ud.hi[k]) && ud.lo[k] < ud.hi[k], "uniform",
                    "need finite lo < hi");
        }
    }
}

GeneratorSpec GeneratorSpec::normal(std::vector<double> mean, std::vector<double> sdev) {
    return GeneratorSpec(NormalDist{std::move(mean), std::move(sdev)});
}

GeneratorSpec GeneratorSpec::uniform(std::vector<double> lo, std::vector<double> hi) {
    return GeneratorSpec(UniformDist{std::move(lo), std::move(hi)});
}

std::size_t GeneratorSpec::dim() const noexcept {
    return std::visit([](const auto& d) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, NormalDist>) {
            return d.mean.size();
        } else {
            return d.lo.size();
        }
    }, dist_);
}

PointSet draw_points(const GeneratorSpec& gen, const random::CounterStream& stream, std::size_t count) {
    const std::size_t d = gen.dim();
    std::vector<double> values(count * d);
    if (const auto* nd = gen.as_normal()) {
        for (std::size_t idx = 0; idx < values.size(); ++idx) {
            const std::size_t k = idx % d;
            values[idx] = nd->mean[k] + nd->sdev[k] * stream.normal(idx);
        }
    } else {
        const auto& ud = std::get<UniformDist>(gen.dist());
        for (std::size_t idx = 0; idx < values.size(); ++idx) {
            const std::size_t k = idx % d;
            values[idx] = ud.lo[k] + (ud.hi[k] - ud.lo[k]) * stream.uniform(idx);
        }
    }
    return PointSet(d, std::move(values));
}

GroupSampler make_sampler(const GeneratorSpec& gen) {
    return [gen](std::uint64_t key, std::size_t count) {
        return draw_points(gen, random::CounterStream(key, 0), count);
    };
}

bool ScenarioSpec::is_null() const {
    return std::all_of(generators.begin(), generators.end(),
                       [&](const GeneratorSpec& g) { return g == generators.front(); });
}

void ScenarioSpec::validate() const {
    require(generators.size() >= 2, "groups", "need at least 2 groups");
    require(rho.size() == generators.size(), "rho", "need one proportion per group");
    try {
        validate_proportions(rho);
    } catch (const InputError& e) {
        throw InputError(std::string("rho: ") + e.what());
    }
    const std::size_t d = generators.front().dim();
    for (const auto& g : generators) require(g.dim() == d, "dimension", "all groups need the same dimension");
    require(gamma > 0.0 && gamma <= 1.0, "gamma", "must lie in (0, 1]");
    require(alpha > 0.0 && alpha < 1.0, "alpha", "must lie in (0, 1)");
    require(replications >= 1, "replications", "must be >= 1");
    require(replications < (std::size_t{1} << 32), "replications", "must be < 2^32");
    try {
        const auto sizes = allocate_sizes(n, rho);
        for (std::size_t s : sizes) require(s >= 2, "n", "every group needs at least 2 points");
    } catch (const InputError& e) {
        const std::string what = e.what();
        if (what.rfind("n:", 0) == 0) throw;
        throw InputError("n: " + what);
    }
}

GroupedSample generate_grouped_sample(const ScenarioSpec& scn, std::size_t rep_index) {
    const auto sizes = allocate_sizes(scn.n, scn.rho);
    std::vector<PointSet> groups;
    groups.reserve(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        const random::CounterStream stream(scn.seed, (static_cast<std::uint64_t>(rep_index) << 32) | j);
        groups.push_back(draw_points(scn.generators.at(j), stream, sizes[j]));
    }
    return GroupedSample(std::move(groups));
}

double gaussian_kernel_cross_expectation(double mu1, double s1, double mu2, double s2, double h) {
    if (!(h > 0.0) || !(s1 >= 0.0) || !(s2 >= 0.0)) {
        throw InputError("need h > 0 and nonnegative standard deviations");
    }
    const double v = h * h + s1 * s1 + s2 * s2;
    const double diff = mu1 - mu2;
    return h / std::sqrt(v) * std::exp(-diff * diff / (2.0 * v));
}

double gaussian_kernel_cross_expectation(const NormalDist& a, const NormalDist& b, double h) {
    if (a.mean.size() != b.mean.size()) {
        throw InputError("distributions have different dimensions");
    }
    double prod = 1.0;
    for (std::size_t k = 0; k < a.mean.size(); ++k) {
        prod *= gaussian_kernel_cross_expectation(a.mean[k], a.sdev[k], b.mean[k], b.sdev[k], h);
    }
    return prod;
}

GaussianEnsemble::GaussianEnsemble(std::vector<NormalDist> dists, std::vector<double> rho, double bandwidth)
    : dists_(std::move(dists)), rho_(std::move(rho)), bandwidth_(bandwidth) {
    if (dists_.size() != rho_.size()) {
        throw InputError("one proportion per distribution");
    }
    validate_proportions(rho_);
    const std::size_t s = dists_.size();
    gram_.resize(s * s);
    for (std::size_t j = 0; j < s; ++j) {
        for (std::size_t l = 0; l < s; ++l) {
            gram_[j * s + l] = gaussian_kernel_cross_expectation(dists_[j], dists_[l], bandwidth_);
        }
    }
}

namespace {

std::vector<NormalDist> normal_generators(const ScenarioSpec& scn) {
    if (scn.kernel.family() != KernelFamily::gaussian) {
        throw UnsupportedOracleError("closed-form embeddings need the Gaussian kernel");
    }
    std::vector<NormalDist> out;
    for (const auto& g : scn.generators) {
        const auto* nd = g.as_normal();
        if (nd == nullptr) {
            throw UnsupportedOracleError("closed-form embeddings need normal generators");
        }
        out.push_back(*nd);
    }
    return out;
}

}  // namespace

GaussianEnsemble GaussianEnsemble::from_scenario(const ScenarioSpec& scn) {
    return GaussianEnsemble(normal_generators(scn), scn.rho, scn.kernel.bandwidth());
}

double GaussianEnsemble::mean_inner(std::size_t j, PointView x) const {
    const NormalDist& dist = dists_.at(j);
    if (x.size() != dist.mean.size()) {
        throw InputError("query point dimension does not match the ensemble");
    }
    const double h2 = bandwidth_ * bandwidth_;
    double prod = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double v = h2 + dist.sdev[k] * dist.sdev[k];
        const double diff = x[k] - dist.mean[k];
        prod *= bandwidth_ / std::sqrt(v) * std::exp(-diff * diff / (2.0 * v));
    }
    return prod;
}

double population_gmmd(const std::vector<NormalDist>& dists, const std::vector<double>& rho, double h) {
    const GaussianEnsemble ens(dists, rho, h);
    const std::size_t s = dists.size();
    double total = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
        for (std::size_t l = 0; l < s; ++l) {
            if (l == j) continue;
            const double mmd_sq = ens.gram_mean(j, j) + ens.gram_mean(l, l) - 2.0 * ens.gram_mean(j, l);
            total += rho[l] * mmd_sq;
        }
    }
    return std::max(total, 0.0);
}

double population_gmmd(const ScenarioSpec& scn) {
    return population_gmmd(normal_generators(scn), scn.rho, scn.kernel.bandwidth());
}

VarianceEstimate theoretical_sigma_sq(const ScenarioSpec& scn, std::size_t mc_draws, std::uint64_t seed) {
    const GaussianEnsemble ens = GaussianEnsemble::from_scenario(scn);
    std::vector<GroupSampler> samplers;
    for (const auto& g : scn.generators) samplers.push_back(make_sampler(g));
    return gmmd::theoretical_sigma_sq(samplers, ens, WeightScheme(scn.gamma), mc_draws, seed);
}

double ks_distance(std::vector<double> values) {
    if (values.empty()) {
        throw InputError("ks_distance needs at least one value");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw InputError("ks_distance needs finite values");
    }
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = normal_cdf(values[i]);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
        d = std::max(d, f - static_cast<double>(i) / n);
    }
    return d;
}

namespace {

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v, double mean) {
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size());
}

ReplicationRecord run_replication(const ScenarioSpec& scn, std::size_t rep, double population_t,
                                  std::optional<double> sigma_theory) {
    const GroupedSample sample = generate_grouped_sample(scn, rep);
    const WeightScheme scheme(scn.gamma);
    const KernelRowSums sums = compute_row_sums(sample, scn.kernel);
    const double stat = weighted_gmmd(sample, sums, scheme).statistic;
    const VarianceEstimate var = sigma_hat_sq(sample, sums, scheme, scn.variant);
    const TestResult t = decide(stat, var.sigma_sq, sample.total_size(), scn.alpha, scheme, scn.variant);

    ReplicationRecord r;
    r.rep = rep;
    r.statistic = stat;
    r.nu_sq = var.nu_sq;
    r.sigma_hat = t.sigma_hat;
    r.z = t.z_score;
    r.p_value = t.p_value;
    r.reject = t.reject;
    r.standardized = sigma_theory
                         ? std::sqrt(static_cast<double>(sample.total_size())) * (stat - population_t) / *sigma_theory
                         : t.z_score;
    return r;
}

std::vector<ReplicationRecord> run_replications(const ScenarioSpec& scn, double population_t,
                                                std::optional<double> sigma_theory, unsigned threads) {
    std::vector<ReplicationRecord> records(scn.replications);
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(scn.replications)));
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t rep = w; rep < scn.replications; rep += workers) {
                records[rep] = run_replication(scn, rep, population_t, sigma_theory);
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return records;
}

}  // namespace

SimulationAggregates aggregate(const ScenarioSpec& scn, std::span<const ReplicationRecord> records,
                               double population_t) {
    if (records.empty()) {
        throw InputError("no replication records");
    }
    const double root_n = std::sqrt(static_cast<double>(scn.n));
    std::vector<double> z, standardized, scaled, nu;
    std::size_t rejects = 0;
    for (const auto& r : records) {
        z.push_back(r.z);
        standardized.push_back(r.standardized);
        scaled.push_back(root_n * (r.statistic - population_t));
        nu.push_back(r.nu_sq);
        rejects += r.reject ? 1 : 0;
    }
    const auto pi = proportions(allocate_sizes(scn.n, scn.rho));
    const WeightScheme scheme(scn.gamma);

    SimulationAggregates a;
    a.mean_z = mean_of(z);
    a.var_z = variance_of(z, a.mean_z);
    a.ks_z = ks_distance(z);
    a.mean_standardized = mean_of(standardized);
    a.var_standardized = variance_of(standardized, a.mean_standardized);
    a.ks_standardized = ks_distance(standardized);
    a.rejection_rate = static_cast<double>(rejects) / static_cast<double>(records.size());
    a.mean_scaled_error = mean_of(scaled);
    a.var_scaled_error = variance_of(scaled, a.mean_scaled_error);
    const double mean_nu = mean_of(nu);
    a.mean_sigma_sq_theorem = null_variance_factor(pi, scheme, VarianceVariant::theorem) * mean_nu;
    a.mean_sigma_sq_printed = null_variance_factor(pi, scheme, VarianceVariant::printed) * mean_nu;
    return a;
}

SimulationReport run_null_calibration(const ScenarioSpec& scn, unsigned threads) {
    scn.validate();
    if (!scn.is_null()) {
        throw InputError("null calibration needs identical generators in every group");
    }
    SimulationReport rep;
    rep.kind = StudyKind::null_calibration;
    rep.scenario = scn;
    rep.sizes = allocate_sizes(scn.n, scn.rho);
    rep.population_t = 0.0;
    rep.records = run_replications(scn, 0.0, std::nullopt, threads);
    rep.aggregates = aggregate(scn, rep.records, 0.0);
    return rep;
}

SimulationReport run_alternative_study(const ScenarioSpec& scn, double population_t, double sigma_theory,
                                       unsigned threads) {
    scn.validate();
    if (!(sigma_theory > 0.0) || !std::isfinite(sigma_theory)) {
        throw InputError("sigma_theory must be finite and > 0");
    }
    SimulationReport rep;
    rep.kind = StudyKind::alternative_study;
    rep.scenario = scn;
    rep.sizes = allocate_sizes(scn.n, scn.rho);
    rep.population_t = population_t;
    rep.sigma_theory = sigma_theory;
    rep.records = run_replications(scn, population_t, sigma_theory, threads);
    rep.aggregates = aggregate(scn, rep.records, population_t);
    return rep;
}

std::vector<PowerPoint> run_power_curve(const ScenarioSpec& base, const std::vector<double>& shift_grid,
                                        unsigned threads) {
    if (shift_grid.empty()) {
        throw InputError("shift grid is empty");
    }
    base.validate();
    if (!base.is_null()) {
        throw InputError("power curve base scenario must have identical generators");
    }
    std::vector<PowerPoint> out;
    for (double shift : shift_grid) {
        ScenarioSpec scn = base;
        GeneratorSpec::Dist dist = scn.generators.at(1).dist();
        if (auto* nd = std::get_if<NormalDist>(&dist)) {
            for (double& m : nd->mean) m += shift;
        } else {
            auto& ud = std::get<UniformDist>(dist);
            for (double& v : ud.lo) v += shift;
            for (double& v : ud.hi) v += shift;
        }
        scn.generators[1] = GeneratorSpec(std::move(dist));
        const auto records = run_replications(scn, 0.0, std::nullopt, threads);
        std::size_t rejects = 0;
        for (const auto& r : records) rejects += r.reject ? 1 : 0;
        out.push_back({shift, static_cast<double>(rejects) / static_cast<double>(records.size())});
    }
    return out;
}

GroupedSample shuffle_within_groups(const GroupedSample& sample, std::uint64_t seed) {
    std::vector<PointSet> groups;
    for (std::size_t j = 0; j < sample.num_groups(); ++j) {
        const PointSet& g = sample.group(j);
        const random::CounterStream stream(seed, j);
        std::vector<std::size_t> order(g.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::uint64_t draw = 0;
        for (std::size_t i = order.size(); i > 1; --i) {
            auto pick = static_cast<std::size_t>(stream.uniform(draw++) * static_cast<double>(i));
            pick = std::min(pick, i - 1);
            std::swap(order[i - 1], order[pick]);
        }
        PointSet shuffled(g.dim());
        shuffled.reserve(g.size());
        for (std::size_t i : order) shuffled.push_back(g[i]);
        groups.push_back(std::move(shuffled));
    }
    return GroupedSample(std::move(groups));
}

}  // namespace gmmd::sim
