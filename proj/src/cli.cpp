#include "gmmd/cli.hpp"

#include "gmmd/estimators.hpp"
#include "gmmd/inference.hpp"
#include "gmmd/io.hpp"
#include "gmmd/sim.hpp"
#include "gmmd/variance.hpp"
#include "gmmd/weights.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <optional>

namespace gmmd::cli {

namespace {

using io::Json;

struct RunConfig {
    std::string input;
    std::string kernel = "gaussian";
    std::string bandwidth = "median";
    double gamma = 0.5;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    bool shuffle = false;
    std::string variance_variant = "theorem";
    std::string out;
};

void emit(const Json& j, const std::string& path, std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    if (path.empty()) {
        out << text;
    } else {
        io::write_file_atomic(path, text);
    }
}

void add_kernel_options(CLI::App& cmd, RunConfig& cfg) {
    cmd.add_option("input", cfg.input, "Grouped CSV with header group,x1,...,xd")->required();
    cmd.add_option("--kernel", cfg.kernel,
                   "gaussian: exp(-|x-y|^2 / (2 h^2)); laplacian: exp(-|x-y|_1 / h)")
        ->check(CLI::IsMember({"gaussian", "laplacian"}))
        ->capture_default_str();
    cmd.add_option("--bandwidth", cfg.bandwidth, "Bandwidth h > 0, or 'median' for the pooled median distance")
        ->capture_default_str();
    cmd.add_option("--gamma", cfg.gamma, "Weight parameter in (0, 1]")->capture_default_str();
    cmd.add_option("--seed", cfg.seed, "Seed for --shuffle")->capture_default_str();
    cmd.add_flag("--shuffle", cfg.shuffle, "Shuffle points within each group (seeded) before estimation");
    cmd.add_option("--out", cfg.out, "Write the JSON report here instead of standard output");
}

struct Prepared {
    WeightScheme scheme;
    GroupedSample sample;
    KernelSpec kernel;
};

Prepared prepare(const RunConfig& cfg) {
    const WeightScheme scheme(cfg.gamma);
    const io::InputTable table = io::parse_grouped_csv(io::read_file(cfg.input));
    GroupedSample sample = io::to_grouped_sample(table);
    if (cfg.shuffle) sample = sim::shuffle_within_groups(sample, cfg.seed);

    double h = 0.0;
    if (cfg.bandwidth == "median") {
        h = median_heuristic_bandwidth(sample.pooled());
    } else {
        try {
            std::size_t used = 0;
            h = std::stod(cfg.bandwidth, &used);
            if (used != cfg.bandwidth.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw InputError("--bandwidth must be a number or 'median'");
        }
    }
    return {scheme, std::move(sample), KernelSpec(parse_kernel_family(cfg.kernel), h)};
}

Json kernel_json(const KernelSpec& k) {
    return {{"family", std::string(to_string(k.family()))}, {"bandwidth", k.bandwidth()}};
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out) {
    const Prepared p = prepare(cfg);
    const KernelRowSums sums = compute_row_sums(p.sample, p.kernel);
    Json j;
    j["schema_version"] = io::kSchemaVersion;
    j["command"] = "estimate";
    j["naive"] = naive_gmmd(p.sample, sums).statistic;
    j["weighted"] = weighted_gmmd(p.sample, sums, p.scheme).statistic;
    j["gamma"] = cfg.gamma;
    j["n"] = p.sample.total_size();
    j["sizes"] = p.sample.sizes();
    j["kernel"] = kernel_json(p.kernel);
    j["bandwidth_used"] = p.kernel.bandwidth();
    j["shuffle"] = cfg.shuffle;
    j["seed"] = cfg.seed;
    emit(j, cfg.out, out);
    return kExitOk;
}

int cmd_test(const RunConfig& cfg, std::ostream& out) {
    const VarianceVariant variant = parse_variance_variant(cfg.variance_variant);
    const Prepared p = prepare(cfg);
    const TestResult r = homogeneity_test(p.sample, p.kernel, p.scheme, cfg.alpha, variant);
    Json j;
    j["schema_version"] = io::kSchemaVersion;
    j["command"] = "test";
    j["statistic_raw"] = r.statistic_raw;
    j["sigma_hat"] = r.sigma_hat;
    j["z_score"] = r.z_score;
    j["p_value"] = r.p_value;
    j["reject"] = r.reject;
    j["alpha"] = r.alpha;
    j["n"] = r.n;
    j["gamma"] = r.gamma;
    j["sizes"] = p.sample.sizes();
    j["config"] = {{"kernel", kernel_json(p.kernel)},
                   {"bandwidth_used", p.kernel.bandwidth()},
                   {"variance_variant", std::string(to_string(variant))},
                   {"shuffle", cfg.shuffle},
                   {"seed", cfg.seed}};
    emit(j, cfg.out, out);
    return kExitOk;
}

struct SimulateConfig {
    std::string scenario;
    std::string out;
    std::string csv;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateConfig& cfg, std::ostream& out) {
    io::ScenarioFile file = io::parse_scenario(io::read_file(cfg.scenario));
    if (cfg.seed) file.spec.seed = *cfg.seed;
    const auto start = std::chrono::steady_clock::now();
    auto seconds = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    char line[512];

    if (file.kind == io::ScenarioKind::power) {
        const auto curve = sim::run_power_curve(file.spec, file.shifts, cfg.threads);
        Json j;
        j["schema_version"] = io::kSchemaVersion;
        j["kind"] = "power_curve";
        j["scenario"] = io::scenario_to_json(file.spec);
        Json points = Json::array();
        for (const auto& pt : curve) points.push_back({{"shift", pt.shift}, {"power", pt.power}});
        j["points"] = points;
        io::write_file_atomic(cfg.out, j.dump(2) + "\n");
        out << "power_curve points=" << curve.size();
        for (const auto& pt : curve) {
            std::snprintf(line, sizeof(line), " %g:%.4f", pt.shift, pt.power);
            out << line;
        }
        std::snprintf(line, sizeof(line), " wall_time_s=%.2f\n", seconds());
        out << line;
        return kExitOk;
    }

    sim::SimulationReport report;
    if (file.kind == io::ScenarioKind::null) {
        report = sim::run_null_calibration(file.spec, cfg.threads);
    } else {
        const double t = sim::population_gmmd(file.spec);
        const VarianceEstimate theory = sim::theoretical_sigma_sq(file.spec, file.mc_draws, file.spec.seed);
        report = sim::run_alternative_study(file.spec, t, std::sqrt(theory.sigma_sq), cfg.threads);
    }
    io::write_file_atomic(cfg.out, io::report_to_json(report).dump(2) + "\n");
    if (!cfg.csv.empty()) io::write_file_atomic(cfg.csv, io::records_to_csv(report));

    const auto& a = report.aggregates;
    std::snprintf(line, sizeof(line),
                  "%s R=%zu mean_z=%.4f var_z=%.4f ks_z=%.4f ks_standardized=%.4f rejection_rate=%.4f "
                  "wall_time_s=%.2f\n",
                  report.kind == sim::StudyKind::null_calibration ? "null_calibration" : "alternative_study",
                  report.records.size(), a.mean_z, a.var_z, a.ks_z, a.ks_standardized, a.rejection_rate, seconds());
    out << line;
    return kExitOk;
}

int cmd_validate_weights(double gamma, std::size_t r_max, const std::string& path, std::ostream& out) {
    const WeightScheme scheme(gamma);
    emit(io::assumption_report_to_json(validate_assumptions(scheme, r_max)), path, out);
    return kExitOk;
}

int fail(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    err << Json{{"error", kind}, {"message", message}}.dump() << "\n";
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Generalized maximum mean discrepancy estimation and homogeneity testing", "gmmd"};
    app.require_subcommand(1);

    RunConfig estimate_cfg;
    auto* estimate = app.add_subcommand("estimate", "Naive and weighted GMMD estimates for a grouped CSV");
    add_kernel_options(*estimate, estimate_cfg);

    RunConfig test_cfg;
    auto* test = app.add_subcommand("test", "Asymptotic-normal homogeneity test (one-sided, upper tail)");
    add_kernel_options(*test, test_cfg);
    test->add_option("--alpha", test_cfg.alpha, "Significance level in (0, 1)")->capture_default_str();
    test->add_option("--variance-variant", test_cfg.variance_variant,
                     "theorem: 4(k^2-1) nu^2 sum (1-pi)^2/pi; printed: 4x that")
        ->check(CLI::IsMember({"theorem", "printed"}))
        ->capture_default_str();

    SimulateConfig sim_cfg;
    std::uint64_t seed_override = 0;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo scenario file and write a JSON report");
    simulate->add_option("scenario", sim_cfg.scenario, "Scenario file")->required();
    simulate->add_option("--out", sim_cfg.out, "Report path (written atomically)")->required();
    simulate->add_option("--csv", sim_cfg.csv, "Optional per-replication CSV path");
    simulate->add_option("--threads", sim_cfg.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    auto* seed_opt = simulate->add_option("--seed", seed_override, "Override the scenario seed");

    double vw_gamma = 0.5;
    std::size_t vw_r_max = 10000;
    std::string vw_out;
    auto* validate = app.add_subcommand("validate-weights", "Check the weight assumptions numerically");
    validate->add_option("--gamma", vw_gamma, "Weight parameter in (0, 1]")->capture_default_str();
    validate->add_option("--r-max", vw_r_max, "Largest sequence length checked (>= 2)")->capture_default_str();
    validate->add_option("--out", vw_out, "Write the JSON report here instead of standard output");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return fail(err, "invalid_arguments", e.what(), kExitInvalid);
    }
    if (seed_opt->count() > 0) sim_cfg.seed = seed_override;

    try {
        if (estimate->parsed()) return cmd_estimate(estimate_cfg, out);
        if (test->parsed()) return cmd_test(test_cfg, out);
        if (simulate->parsed()) return cmd_simulate(sim_cfg, out);
        if (validate->parsed()) return cmd_validate_weights(vw_gamma, vw_r_max, vw_out, out);
        return fail(err, "invalid_arguments", "no subcommand", kExitInvalid);
    } catch (const DegenerateVarianceError& e) {
        return fail(err, "degenerate_variance", e.what(), kExitInvalid);
    } catch (const UnsupportedOracleError& e) {
        return fail(err, "unsupported_oracle", e.what(), kExitInvalid);
    } catch (const InputError& e) {
        return fail(err, "invalid_input", e.what(), kExitInvalid);
    } catch (const std::exception& e) {
        return fail(err, "internal", e.what(), kExitInternal);
    }
}

}  // namespace gmmd::cli
