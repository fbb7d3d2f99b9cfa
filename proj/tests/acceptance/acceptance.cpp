// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Heavy simulations are shared between criteria (4, 5 and 9 reuse one null run).

#include "oracles.hpp"

#include "gmmd/estimators.hpp"
#include "gmmd/io.hpp"
#include "gmmd/sim.hpp"
#include "gmmd/variance.hpp"
#include "gmmd/weights.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <thread>

using namespace gmmd;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr std::size_t kSideDraws = 100000;

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
    std::printf("CRITERION %d %s  %s: %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof(buf), format, args...);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

unsigned worker_count() { return std::max(1U, std::thread::hardware_concurrency()); }

sim::ScenarioSpec null_scenario(std::size_t n, std::size_t reps) {
    sim::ScenarioSpec scn;
    scn.generators.assign(3, sim::GeneratorSpec::normal({0.0}, {1.0}));
    scn.rho = {0.3, 0.3, 0.4};
    scn.n = n;
    scn.gamma = 0.5;
    scn.kernel = KernelSpec(KernelFamily::gaussian, 1.0);
    scn.replications = reps;
    scn.seed = kSeed;
    scn.alpha = 0.05;
    return scn;
}

sim::ScenarioSpec shift_scenario() {
    sim::ScenarioSpec scn;
    scn.generators = {sim::GeneratorSpec::normal({0.0}, {1.0}), sim::GeneratorSpec::normal({0.5}, {1.0})};
    scn.rho = {0.5, 0.5};
    scn.n = 1500;
    scn.gamma = 0.5;
    scn.kernel = KernelSpec(KernelFamily::gaussian, 1.0);
    scn.replications = 1000;
    scn.seed = kSeed;
    scn.alpha = 0.05;
    return scn;
}

void criterion_oracle() {
    Stopwatch clock;
    std::mt19937_64 rng(kSeed);
    const double gammas[] = {0.3, 0.7, 1.0};
    double worst = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t s = 2 + inst % 3;
        const std::size_t d = 1 + (inst / 3) % 3;
        auto data = oracle::random_instance(rng, s, 8, d);
        data.gaussian = inst % 2 == 0;
        const double gamma = gammas[(inst / 2) % 3];
        const auto sample = oracle::to_sample(data.groups);
        const auto spec = oracle::to_spec(data);
        const double naive = std::max(0.0, oracle::gmmd(data.gaussian, data.h, data.groups,
                                                        oracle::unit_weights(data.groups)));
        const double weighted =
            oracle::gmmd(data.gaussian, data.h, data.groups, oracle::alternating_weights(data.groups, gamma));
        worst = std::max(worst, std::abs(naive_gmmd(sample, spec).statistic - naive));
        worst = std::max(worst, std::abs(weighted_gmmd(sample, spec, WeightScheme(gamma)).statistic - weighted));
    }
    const double t = clock.seconds();
    report(1, worst <= 1e-12 && t < 10.0, "oracle equivalence",
           fmt("200 instances, max |diff| = %.3e (tol 1e-12), %.2f s (limit 10 s)", worst, t));
}

void criterion_collapse() {
    Stopwatch clock;
    std::mt19937_64 rng(kSeed + 1);
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        auto data = oracle::random_instance(rng, 2 + inst % 3, 8, 1 + inst % 3);
        const auto sample = oracle::to_sample(data.groups);
        const auto spec = oracle::to_spec(data);
        worst = std::max(worst, std::abs(weighted_gmmd(sample, spec, WeightScheme::unit()).statistic -
                                         naive_gmmd(sample, spec).statistic));
    }
    const double t = clock.seconds();
    report(2, worst <= 1e-12 && t < 5.0, "weight collapse",
           fmt("100 instances, max |diff| = %.3e (tol 1e-12), %.2f s (limit 5 s)", worst, t));
}

void criterion_assumptions() {
    Stopwatch clock;
    constexpr std::size_t r_max = 100000;
    bool ok = true;
    std::string detail;
    for (int g = 1; g <= 10; ++g) {
        const double gamma = g / 10.0;
        const auto rep = validate_assumptions(WeightScheme(gamma), r_max);
        const double dev = std::abs(rep.k_sq_sequence_tail - (1.0 + gamma * gamma));
        const bool pass = rep.all_pass() && rep.tau_observed <= gamma + 1e-12 &&
                          dev <= 2.0 * gamma * gamma / static_cast<double>(r_max);
        ok = ok && pass;
        if (!pass) detail += fmt(" gamma=%.1f tau=%.3g dev=%.3g;", gamma, rep.tau_observed, dev);
    }
    const double t = clock.seconds();
    report(3, ok && t < 5.0, "assumption suite",
           fmt("gamma 0.1..1.0 at r_max 1e5 all pass=%s, %.2f s (limit 5 s)%s", ok ? "yes" : "no", t,
               detail.c_str()));
}

bool write_and_compare(const sim::SimulationReport& a, const sim::SimulationReport& b, const std::string& stem) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gmmd_acceptance";
    fs::create_directories(dir);
    const std::string pa = (dir / (stem + "_a.json")).string();
    const std::string pb = (dir / (stem + "_b.json")).string();
    io::write_file_atomic(pa, io::report_to_json(a).dump(2) + "\n");
    io::write_file_atomic(pb, io::report_to_json(b).dump(2) + "\n");
    return io::read_file(pa) == io::read_file(pb);
}

}  // namespace

int main() {
    std::printf("acceptance suite, seed %llu, %u worker thread(s)\n", static_cast<unsigned long long>(kSeed),
                worker_count());
    criterion_oracle();
    criterion_collapse();
    criterion_assumptions();

    // Null run shared by criteria 4, 5 and 9.
    const auto null_scn = null_scenario(1500, 1000);
    Stopwatch null_clock;
    const auto null_run = sim::run_null_calibration(null_scn, worker_count());
    const double null_time = null_clock.seconds();
    {
        const auto& a = null_run.aggregates;
        const bool pass = a.ks_z < 0.05 && std::abs(a.mean_z) < 0.1 && a.var_z >= 0.85 && a.var_z <= 1.15 &&
                          a.rejection_rate >= 0.03 && a.rejection_rate <= 0.07;
        report(4, pass, "null normality",
               fmt("KS=%.4f (<0.05) mean_z=%.4f (|.|<0.1) var_z=%.4f ([0.85,1.15]) level=%.4f ([0.03,0.07]), %.1f s",
                   a.ks_z, a.mean_z, a.var_z, a.rejection_rate, null_time));
    }

    const VarianceEstimate side = sim::theoretical_sigma_sq(null_scn, kSideDraws, kSeed);
    {
        const double empirical = null_run.aggregates.var_scaled_error;
        const double theorem = side.sigma_sq;
        const double printed = 4.0 * theorem;
        const double rel = empirical / theorem - 1.0;
        const double ratio_printed = printed / empirical;
        const bool pass = std::abs(rel) <= 0.15 && (ratio_printed > 2.0 || ratio_printed < 0.5);
        report(5, pass, "variance formula",
               fmt("Var(sqrt(n) T)=%.5f theorem sigma^2=%.5f (+/-%.1e) rel=%+.3f (|.|<=0.15) printed=%.5f "
                   "printed/empirical=%.2f (>2)",
                   empirical, theorem, side.sigma_sq_stderr, rel, printed, ratio_printed));
    }

    const auto alt_scn = shift_scenario();
    const double population_t = sim::population_gmmd(alt_scn);
    const VarianceEstimate alt_theory = sim::theoretical_sigma_sq(alt_scn, kSideDraws, kSeed);
    const double sigma_theory = std::sqrt(alt_theory.sigma_sq);
    Stopwatch alt_clock;
    const auto alt_run = sim::run_alternative_study(alt_scn, population_t, sigma_theory, worker_count());
    const double alt_time = alt_clock.seconds();
    {
        const auto& a = alt_run.aggregates;
        const bool pass = a.ks_standardized < 0.07 && a.rejection_rate >= 0.9;
        report(6, pass, "alternative normality",
               fmt("T=%.6f sigma=%.5f KS=%.4f (<0.07) mean=%.4f var=%.4f power=%.4f (>=0.9), %.1f s", population_t,
                   sigma_theory, a.ks_standardized, a.mean_standardized, a.var_standardized, a.rejection_rate,
                   alt_time));
    }

    {
        Stopwatch clock;
        const auto big = sim::run_null_calibration(null_scenario(5000, 200), worker_count());
        const double mean_sigma_sq = big.aggregates.mean_sigma_sq_theorem;
        const double rel = mean_sigma_sq / side.sigma_sq - 1.0;
        report(7, std::abs(rel) <= 0.10, "variance estimator consistency",
               fmt("mean sigma_hat^2=%.5f side sigma^2=%.5f rel=%+.4f (|.|<=0.10), %.1f s", mean_sigma_sq,
                   side.sigma_sq, rel, clock.seconds()));
    }

    {
        const sim::NormalDist n01{{0.0}, {1.0}};
        const sim::NormalDist n11{{1.0}, {1.0}};
        const double same = sim::population_gmmd({n01, n01, n01}, {0.3, 0.3, 0.4}, 1.0);
        const double value = sim::population_gmmd({n01, n11}, {0.5, 0.5}, 1.0);
        // Independent closed form 2 (1 - exp(-1/6)) / sqrt 3.
        const double closed = 2.0 * (1.0 - std::exp(-1.0 / 6.0)) / std::sqrt(3.0);
        sim::ScenarioSpec pair;
        pair.generators = {sim::GeneratorSpec(n01), sim::GeneratorSpec(n11)};
        pair.rho = {0.5, 0.5};
        pair.n = 20000;
        pair.seed = kSeed;
        const double naive = naive_gmmd(sim::generate_grouped_sample(pair, 0), pair.kernel).statistic;
        const bool pass = same == 0.0 && value > 0.17 && std::abs(value - closed) <= 1e-6 &&
                          std::abs(naive - value) <= 0.01;
        report(8, pass, "population characterization",
               fmt("identical=%.1f shifted=%.7f closed form=%.7f (tol 1e-6) naive(n=2e4)=%.5f (tol 0.01)", same, value,
                   closed, naive));
    }

    {
        Stopwatch clock;
        const auto null_1 = sim::run_null_calibration(null_scn, 1);
        const auto null_8 = sim::run_null_calibration(null_scn, 8);
        const auto alt_1 = sim::run_alternative_study(alt_scn, population_t, sigma_theory, 1);
        const auto alt_8 = sim::run_alternative_study(alt_scn, population_t, sigma_theory, 8);
        const bool null_same = write_and_compare(null_run, null_1, "null_1") &&
                               write_and_compare(null_run, null_8, "null_8");
        const bool alt_same = write_and_compare(alt_run, alt_1, "alt_1") && write_and_compare(alt_run, alt_8, "alt_8");
        report(9, null_same && alt_same, "determinism",
               fmt("null reports identical at 1/8 threads=%s, alternative=%s, %.1f s", null_same ? "yes" : "no",
                   alt_same ? "yes" : "no", clock.seconds()));
    }

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
