#include "gmmd/error.hpp"
#include "gmmd/estimators.hpp"
#include "gmmd/io.hpp"
#include "gmmd/sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace gmmd;
using namespace gmmd::sim;

namespace {

ScenarioSpec small_null(std::size_t n = 60, std::size_t reps = 20) {
    ScenarioSpec scn;
    scn.generators.assign(3, GeneratorSpec::normal({0.0}, {1.0}));
    scn.rho = {0.3, 0.3, 0.4};
    scn.n = n;
    scn.gamma = 0.5;
    scn.replications = reps;
    scn.seed = 77;
    return scn;
}

}  // namespace

TEST_CASE("grouped samples are deterministic and sized by the allocation rule") {
    ScenarioSpec scn = small_null(10);
    const auto a = generate_grouped_sample(scn, 3);
    const auto b = generate_grouped_sample(scn, 3);
    CHECK(a.sizes() == std::vector<std::size_t>{3, 3, 4});
    for (std::size_t j = 0; j < 3; ++j) {
        const auto va = a.group(j).values();
        const auto vb = b.group(j).values();
        CHECK(std::equal(va.begin(), va.end(), vb.begin(), vb.end()));
    }
    const auto c = generate_grouped_sample(scn, 4);
    CHECK(c.group(0)[0][0] != a.group(0)[0][0]);
    CHECK(a.group(0)[0][0] != a.group(1)[0][0]);
}

TEST_CASE("normal generator mean is within the CLT bound") {
    const auto pts = draw_points(GeneratorSpec::normal({0.0}, {1.0}), random::CounterStream(5, 0), 100000);
    double mean = 0.0;
    for (double v : pts.values()) mean += v;
    mean /= 100000.0;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(100000.0));
    const auto uni = draw_points(GeneratorSpec::uniform({2.0, -1.0}, {3.0, 1.0}), random::CounterStream(5, 1), 1000);
    CHECK(uni.dim() == 2);
    for (std::size_t i = 0; i < uni.size(); ++i) {
        CHECK(uni[i][0] > 2.0);
        CHECK(uni[i][0] < 3.0);
        CHECK(std::abs(uni[i][1]) < 1.0);
    }
}

TEST_CASE("closed-form Gaussian kernel expectations") {
    CHECK(gaussian_kernel_cross_expectation(0.0, 1.0, 0.0, 1.0, 1.0) == doctest::Approx(0.5773503).epsilon(1e-7));
    // exp(-1/6) / sqrt 3, confirmed by quadrature.
    CHECK(gaussian_kernel_cross_expectation(0.0, 1.0, 1.0, 1.0, 1.0) == doctest::Approx(0.4887165).epsilon(1e-7));
    CHECK(gaussian_kernel_cross_expectation(0.0, 1e-9, 2.0, 1e-9, 1.0) == doctest::Approx(std::exp(-2.0)));
    const NormalDist a{{0.0, 1.0}, {1.0, 0.5}};
    const NormalDist b{{1.0, 1.0}, {1.0, 2.0}};
    CHECK(gaussian_kernel_cross_expectation(a, b, 1.5) ==
          doctest::Approx(gaussian_kernel_cross_expectation(0.0, 1.0, 1.0, 1.0, 1.5) *
                          gaussian_kernel_cross_expectation(1.0, 0.5, 1.0, 2.0, 1.5)));

    // Monte Carlo cross-check with 10^6 independent pairs.
    const KernelSpec k{KernelFamily::gaussian, 1.0};
    const random::CounterStream sx(9, 0), sy(9, 1);
    double acc_same = 0.0, acc_shift = 0.0;
    const std::size_t draws = 1000000;
    for (std::size_t i = 0; i < draws; ++i) {
        const double x = sx.normal(i);
        const double y = sy.normal(i);
        acc_same += std::exp(-(x - y) * (x - y) / 2.0);
        acc_shift += std::exp(-(x - y - 1.0) * (x - y - 1.0) / 2.0);
    }
    CHECK(std::abs(acc_same / draws - 0.5773503) < 3e-3);
    CHECK(std::abs(acc_shift / draws - 0.4887165) < 3e-3);
}

TEST_CASE("population GMMD closed form") {
    const NormalDist n01{{0.0}, {1.0}};
    const NormalDist n11{{1.0}, {1.0}};
    CHECK(population_gmmd({n01, n01, n01}, {0.2, 0.3, 0.5}, 1.0) == 0.0);
    const double mmd = 2.0 * (1.0 - std::exp(-1.0 / 6.0)) / std::sqrt(3.0);
    CHECK(std::abs(population_gmmd({n01, n11}, {0.5, 0.5}, 1.0) - mmd) <= 1e-15);
    CHECK(std::abs(population_gmmd({n01, n11}, {0.5, 0.5}, 1.0) - 0.1772676) <= 1e-6);
    CHECK(population_gmmd({n01, n11}, {0.5, 0.5}, 1.0) > 0.17);
    // Unequal proportions: rho_2 MMD^2 + rho_1 MMD^2 = MMD^2 for s = 2.
    CHECK(std::abs(population_gmmd({n01, n11}, {0.2, 0.8}, 1.0) - mmd) <= 1e-15);
}

TEST_CASE("Gaussian ensemble refuses unsupported scenarios") {
    ScenarioSpec scn = small_null();
    scn.kernel = KernelSpec(KernelFamily::laplacian, 1.0);
    CHECK_THROWS_AS(GaussianEnsemble::from_scenario(scn), UnsupportedOracleError);
    scn = small_null();
    scn.generators[2] = GeneratorSpec::uniform({0.0}, {1.0});
    CHECK_THROWS_AS(GaussianEnsemble::from_scenario(scn), UnsupportedOracleError);
}

TEST_CASE("ks distance") {
    CHECK(ks_distance({0.0}) == 0.5);
    CHECK(std::abs(ks_distance({10.0, 10.0, 10.0}) - 1.0) <= 1e-15);
    CHECK_THROWS_AS(ks_distance({}), InputError);
    CHECK_THROWS_AS(ks_distance({std::nan("")}), InputError);
}

TEST_CASE("scenario validation names the field") {
    ScenarioSpec scn = small_null();
    scn.rho = {0.5, 0.5};
    CHECK_THROWS_WITH_AS(scn.validate(), doctest::Contains("rho"), InputError);
    scn = small_null();
    scn.replications = 0;
    CHECK_THROWS_WITH_AS(scn.validate(), doctest::Contains("replications"), InputError);
    scn = small_null();
    scn.alpha = 1.5;
    CHECK_THROWS_WITH_AS(scn.validate(), doctest::Contains("alpha"), InputError);
    scn = small_null();
    scn.gamma = 0.0;
    CHECK_THROWS_WITH_AS(scn.validate(), doctest::Contains("gamma"), InputError);
}

TEST_CASE("single replication report mirrors its record") {
    const auto rep = run_null_calibration(small_null(30, 1));
    REQUIRE(rep.records.size() == 1);
    const auto& r = rep.records[0];
    CHECK(rep.aggregates.mean_z == r.z);
    CHECK(rep.aggregates.var_z == 0.0);
    CHECK(rep.aggregates.rejection_rate == (r.reject ? 1.0 : 0.0));
    CHECK(rep.aggregates.mean_standardized == r.z);
    CHECK(r.standardized == r.z);
}

TEST_CASE("null calibration is reproducible and thread-count invariant") {
    const auto scn = small_null(45, 24);
    const auto one = io::report_to_json(run_null_calibration(scn, 1)).dump();
    CHECK(io::report_to_json(run_null_calibration(scn, 1)).dump() == one);
    CHECK(io::report_to_json(run_null_calibration(scn, 3)).dump() == one);
    CHECK(io::report_to_json(run_null_calibration(scn, 8)).dump() == one);
    CHECK(io::report_to_json(run_null_calibration(scn, 64)).dump() == one);
    auto other = scn;
    other.seed = 78;
    CHECK(io::report_to_json(run_null_calibration(other, 1)).dump() != one);
}

TEST_CASE("null calibration refuses alternatives") {
    auto scn = small_null();
    scn.generators[1] = GeneratorSpec::normal({1.0}, {1.0});
    CHECK_THROWS_AS(run_null_calibration(scn), InputError);
}

TEST_CASE("alternative study with equal generators behaves like the null run") {
    const auto scn = small_null(45, 10);
    const auto null_rep = run_null_calibration(scn);
    const auto alt = run_alternative_study(scn, 0.0, 1.0);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(alt.records[i].z == null_rep.records[i].z);
        CHECK(alt.records[i].reject == null_rep.records[i].reject);
    }
    CHECK(alt.aggregates.rejection_rate == null_rep.aggregates.rejection_rate);
    CHECK_THROWS_AS(run_alternative_study(scn, 0.0, 0.0), InputError);
}

TEST_CASE("power grows with sample size and shift") {
    ScenarioSpec base;
    base.generators.assign(2, GeneratorSpec::normal({0.0}, {1.0}));
    base.rho = {0.5, 0.5};
    base.n = 200;
    base.replications = 40;
    base.seed = 5;

    const auto grid0 = run_power_curve(base, {0.0});
    CHECK(grid0[0].power == run_null_calibration(base).aggregates.rejection_rate);

    const auto curve = run_power_curve(base, {0.0, 0.5, 1.0, 3.0}, 2);
    REQUIRE(curve.size() == 4);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].power + 0.02 >= curve[i - 1].power);
    CHECK(curve.back().power >= 0.99);

    auto shifted = base;
    shifted.generators[1] = GeneratorSpec::normal({0.5}, {1.0});
    const double t = population_gmmd(shifted);
    const double small = run_alternative_study(shifted, t, 1.0).aggregates.rejection_rate;
    shifted.n = 400;
    const double big = run_alternative_study(shifted, t, 1.0).aggregates.rejection_rate;
    CHECK(big + 0.02 >= small);

    CHECK_THROWS_AS(run_power_curve(base, {}), InputError);
    CHECK_THROWS_AS(run_power_curve(shifted, {0.0}), InputError);
}

TEST_CASE("within-group shuffle is a seeded permutation") {
    const auto sample = generate_grouped_sample(small_null(30), 0);
    const auto a = shuffle_within_groups(sample, 1);
    const auto b = shuffle_within_groups(sample, 1);
    const auto c = shuffle_within_groups(sample, 2);
    bool differs = false;
    for (std::size_t j = 0; j < sample.num_groups(); ++j) {
        auto orig = std::vector<double>(sample.group(j).values().begin(), sample.group(j).values().end());
        auto sa = std::vector<double>(a.group(j).values().begin(), a.group(j).values().end());
        auto sb = std::vector<double>(b.group(j).values().begin(), b.group(j).values().end());
        auto sc = std::vector<double>(c.group(j).values().begin(), c.group(j).values().end());
        CHECK(sa == sb);
        differs = differs || sa != sc;
        std::sort(orig.begin(), orig.end());
        std::sort(sa.begin(), sa.end());
        CHECK(orig == sa);
    }
    CHECK(differs);
    const KernelSpec k{KernelFamily::gaussian, 1.0};
    CHECK(naive_gmmd(a, k).statistic == doctest::Approx(naive_gmmd(sample, k).statistic).epsilon(1e-12));
}
