#include "gmmd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace gmmd::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string_view> lines_of(std::string_view text) {
    auto lines = split(text, '\n');
    if (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
    return v;
}

template <typename Int>
std::optional<Int> to_integer(std::string_view s) {
    s = trim(s);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

InputTable parse_grouped_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || trim(lines[0]).empty()) {
        throw ParseError(1, "missing header row 'group,x1,...,xd'");
    }
    InputTable table;
    for (auto field : split(lines[0], ',')) table.header.emplace_back(trim(field));
    if (table.header.front() != "group" || table.header.size() < 2) {
        throw ParseError(1, "missing header row 'group,x1,...,xd'");
    }
    const std::size_t d = table.header.size() - 1;
    table.points = PointSet(d);

    std::vector<double> coords(d);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        if (trim(lines[li]).empty()) continue;
        const auto fields = split(lines[li], ',');
        if (fields.size() != table.header.size()) {
            throw ParseError(line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        const auto label = to_integer<long long>(fields[0]);
        if (!label || *label < 1) {
            throw ParseError(line_no, "group label must be an integer >= 1");
        }
        for (std::size_t k = 0; k < d; ++k) {
            const auto v = to_double(fields[k + 1]);
            if (!v) throw ParseError(line_no, "column " + std::to_string(k + 2) + " is not a finite number");
            coords[k] = *v;
        }
        table.labels.push_back(static_cast<std::size_t>(*label));
        table.points.push_back(coords);
    }
    if (table.labels.empty()) {
        throw ParseError(0, "no data rows");
    }
    const std::set<std::size_t> distinct(table.labels.begin(), table.labels.end());
    const bool contiguous = *distinct.begin() == 1 && *distinct.rbegin() == distinct.size();
    if (!contiguous || distinct.size() < 2) {
        std::string found;
        for (std::size_t l : distinct) found += (found.empty() ? "" : ",") + std::to_string(l);
        throw InputError("labels must be contiguous 1..s with s >= 2 (found " + found + ")");
    }
    table.num_groups = distinct.size();
    return table;
}

std::string write_grouped_csv(const InputTable& table) {
    std::string out;
    for (std::size_t k = 0; k < table.header.size(); ++k) {
        out += (k ? "," : "") + table.header[k];
    }
    out += '\n';
    for (std::size_t i = 0; i < table.labels.size(); ++i) {
        out += std::to_string(table.labels[i]);
        for (double v : table.points[i]) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

GroupedSample to_grouped_sample(const InputTable& table) {
    std::vector<PointSet> groups(table.num_groups, PointSet(table.points.dim()));
    for (std::size_t i = 0; i < table.labels.size(); ++i) {
        groups[table.labels[i] - 1].push_back(table.points[i]);
    }
    return GroupedSample(std::move(groups));
}

namespace {

using Section = std::map<std::string, std::pair<std::string, std::size_t>>;  // key -> (value, line)

std::vector<double> parse_list(const std::string& field, const std::pair<std::string, std::size_t>& entry) {
    std::vector<double> out;
    for (auto part : split(entry.first, ',')) {
        const auto v = to_double(part);
        if (!v) throw ParseError(entry.second, field + ": '" + std::string(trim(part)) + "' is not a number");
        out.push_back(*v);
    }
    return out;
}

const std::pair<std::string, std::size_t>* find(const Section& sec, const std::string& key) {
    const auto it = sec.find(key);
    return it == sec.end() ? nullptr : &it->second;
}

const std::pair<std::string, std::size_t>& need(const Section& sec, const std::string& key,
                                                const std::string& where) {
    const auto* e = find(sec, key);
    if (e == nullptr) throw InputError(key + ": missing in " + where);
    return *e;
}

double get_double(const Section& sec, const std::string& key, double fallback) {
    const auto* e = find(sec, key);
    if (e == nullptr) return fallback;
    const auto v = to_double(e->first);
    if (!v) throw ParseError(e->second, key + ": not a number");
    return *v;
}

template <typename Int>
Int get_integer(const Section& sec, const std::string& key, Int fallback) {
    const auto* e = find(sec, key);
    if (e == nullptr) return fallback;
    const auto v = to_integer<Int>(e->first);
    if (!v) throw ParseError(e->second, key + ": not a nonnegative integer");
    return *v;
}

void check_keys(const Section& sec, const std::set<std::string>& allowed) {
    for (const auto& [key, entry] : sec) {
        if (!allowed.contains(key)) throw ParseError(entry.second, "unknown key '" + key + "'");
    }
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
    std::optional<Section> scenario;
    std::vector<Section> groups;
    Section* current = nullptr;

    const auto lines = lines_of(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        std::string_view line = lines[li];
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line == "[scenario]") {
            if (scenario) throw ParseError(line_no, "duplicate [scenario] section");
            scenario.emplace();
            current = &*scenario;
            continue;
        }
        if (line == "[group]") {
            groups.emplace_back();
            current = &groups.back();
            continue;
        }
        if (line.front() == '[') throw ParseError(line_no, "unknown section " + std::string(line));
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
        if (current == nullptr) throw ParseError(line_no, "entry outside of a section");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ParseError(line_no, "empty key");
        if (!current->emplace(key, std::make_pair(value, line_no)).second) {
            throw ParseError(line_no, "duplicate key '" + key + "'");
        }
    }
    if (!scenario) throw ParseError(0, "missing [scenario] section");

    const Section& sc = *scenario;
    check_keys(sc, {"kind", "n", "replications", "seed", "gamma", "alpha", "kernel", "bandwidth",
                    "variance_variant", "mc_draws", "shifts"});

    ScenarioFile out;
    const std::string kind = find(sc, "kind") ? find(sc, "kind")->first : "null";
    if (kind == "null") {
        out.kind = ScenarioKind::null;
    } else if (kind == "alternative") {
        out.kind = ScenarioKind::alternative;
    } else if (kind == "power") {
        out.kind = ScenarioKind::power;
    } else {
        throw InputError("kind: expected null, alternative or power");
    }

    sim::ScenarioSpec& scn = out.spec;
    scn.n = get_integer<std::size_t>(sc, "n", 0);
    if (scn.n == 0) throw InputError("n: must be given and > 0");
    scn.replications = get_integer<std::size_t>(sc, "replications", 1);
    scn.seed = get_integer<std::uint64_t>(sc, "seed", 0);
    scn.gamma = get_double(sc, "gamma", 0.5);
    scn.alpha = get_double(sc, "alpha", 0.05);
    try {
        const std::string family = find(sc, "kernel") ? find(sc, "kernel")->first : "gaussian";
        scn.kernel = KernelSpec(parse_kernel_family(family), get_double(sc, "bandwidth", 1.0));
    } catch (const ParseError&) {
        throw;
    } catch (const InputError& e) {
        throw InputError(std::string("kernel: ") + e.what());
    }
    if (const auto* e = find(sc, "variance_variant")) {
        try {
            scn.variant = parse_variance_variant(e->first);
        } catch (const InputError& err) {
            throw InputError(std::string("variance_variant: ") + err.what());
        }
    }
    out.mc_draws = get_integer<std::size_t>(sc, "mc_draws", out.mc_draws);
    if (const auto* e = find(sc, "shifts")) out.shifts = parse_list("shifts", *e);
    if (out.kind == ScenarioKind::power && out.shifts.empty()) throw InputError("shifts: required for kind = power");
    if (out.kind == ScenarioKind::alternative && out.mc_draws < 1000) throw InputError("mc_draws: must be >= 1000");

    for (std::size_t j = 0; j < groups.size(); ++j) {
        const Section& g = groups[j];
        const std::string where = "group " + std::to_string(j + 1);
        check_keys(g, {"rho", "distribution", "mean", "sdev", "lo", "hi"});
        scn.rho.push_back(get_double(g, "rho", std::nan("")));
        if (std::isnan(scn.rho.back())) throw InputError("rho: missing in " + where);
        const std::string dist = find(g, "distribution") ? find(g, "distribution")->first : "normal";
        try {
            if (dist == "normal") {
                scn.generators.push_back(sim::GeneratorSpec::normal(parse_list("mean", need(g, "mean", where)),
                                                                    parse_list("sdev", need(g, "sdev", where))));
            } else if (dist == "uniform") {
                scn.generators.push_back(sim::GeneratorSpec::uniform(parse_list("lo", need(g, "lo", where)),
                                                                     parse_list("hi", need(g, "hi", where))));
            } else {
                throw InputError("distribution: expected normal or uniform in " + where);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const InputError& e) {
            const std::string what = e.what();
            throw InputError(what.find(where) == std::string::npos ? what + " (" + where + ")" : what);
        }
    }
    scn.validate();
    if (out.kind != ScenarioKind::alternative && !scn.is_null()) {
        throw InputError("kind: '" + kind + "' scenarios need identical generators in every group");
    }
    return out;
}

namespace {

Json generator_to_json(const sim::GeneratorSpec& g) {
    Json j;
    if (const auto* nd = g.as_normal()) {
        j["distribution"] = "normal";
        j["mean"] = nd->mean;
        j["sdev"] = nd->sdev;
    } else {
        const auto& ud = std::get<sim::UniformDist>(g.dist());
        j["distribution"] = "uniform";
        j["lo"] = ud.lo;
        j["hi"] = ud.hi;
    }
    return j;
}

sim::GeneratorSpec generator_from_json(const Json& j) {
    if (j.at("distribution") == "normal") {
        return sim::GeneratorSpec::normal(j.at("mean").get<std::vector<double>>(),
                                          j.at("sdev").get<std::vector<double>>());
    }
    return sim::GeneratorSpec::uniform(j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>());
}

sim::ScenarioSpec scenario_from_json(const Json& j) {
    sim::ScenarioSpec scn;
    scn.n = j.at("n").get<std::size_t>();
    scn.replications = j.at("replications").get<std::size_t>();
    scn.seed = j.at("seed").get<std::uint64_t>();
    scn.gamma = j.at("gamma").get<double>();
    scn.alpha = j.at("alpha").get<double>();
    scn.kernel = KernelSpec(parse_kernel_family(j.at("kernel").at("family").get<std::string>()),
                            j.at("kernel").at("bandwidth").get<double>());
    scn.variant = parse_variance_variant(j.at("variance_variant").get<std::string>());
    scn.rho = j.at("rho").get<std::vector<double>>();
    for (const auto& g : j.at("groups")) scn.generators.push_back(generator_from_json(g));
    return scn;
}

Json aggregates_to_json(const sim::SimulationAggregates& a) {
    Json j;
    j["mean_z"] = a.mean_z;
    j["var_z"] = a.var_z;
    j["ks_z"] = a.ks_z;
    j["mean_standardized"] = a.mean_standardized;
    j["var_standardized"] = a.var_standardized;
    j["ks_standardized"] = a.ks_standardized;
    j["rejection_rate"] = a.rejection_rate;
    j["mean_scaled_error"] = a.mean_scaled_error;
    j["var_scaled_error"] = a.var_scaled_error;
    j["mean_sigma_sq_theorem"] = a.mean_sigma_sq_theorem;
    j["mean_sigma_sq_printed"] = a.mean_sigma_sq_printed;
    return j;
}

sim::SimulationAggregates aggregates_from_json(const Json& j) {
    sim::SimulationAggregates a;
    a.mean_z = j.at("mean_z");
    a.var_z = j.at("var_z");
    a.ks_z = j.at("ks_z");
    a.mean_standardized = j.at("mean_standardized");
    a.var_standardized = j.at("var_standardized");
    a.ks_standardized = j.at("ks_standardized");
    a.rejection_rate = j.at("rejection_rate");
    a.mean_scaled_error = j.at("mean_scaled_error");
    a.var_scaled_error = j.at("var_scaled_error");
    a.mean_sigma_sq_theorem = j.at("mean_sigma_sq_theorem");
    a.mean_sigma_sq_printed = j.at("mean_sigma_sq_printed");
    return a;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12; }

}  // namespace

Json scenario_to_json(const sim::ScenarioSpec& scn) {
    Json j;
    j["n"] = scn.n;
    j["replications"] = scn.replications;
    j["seed"] = scn.seed;
    j["gamma"] = scn.gamma;
    j["alpha"] = scn.alpha;
    j["kernel"] = {{"family", std::string(to_string(scn.kernel.family()))}, {"bandwidth", scn.kernel.bandwidth()}};
    j["variance_variant"] = std::string(to_string(scn.variant));
    j["rho"] = scn.rho;
    Json groups = Json::array();
    for (const auto& g : scn.generators) groups.push_back(generator_to_json(g));
    j["groups"] = groups;
    return j;
}

Json report_to_json(const sim::SimulationReport& report) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = report.kind == sim::StudyKind::null_calibration ? "null_calibration" : "alternative_study";
    j["scenario"] = scenario_to_json(report.scenario);
    j["sizes"] = report.sizes;
    j["population_t"] = report.population_t;
    j["sigma_theory"] = report.sigma_theory ? Json(*report.sigma_theory) : Json(nullptr);
    j["aggregates"] = aggregates_to_json(report.aggregates);
    Json records = Json::array();
    for (const auto& r : report.records) {
        Json rec;
        rec["rep"] = r.rep;
        rec["statistic"] = r.statistic;
        rec["nu_sq"] = r.nu_sq;
        rec["sigma_hat"] = r.sigma_hat;
        rec["z"] = r.z;
        rec["p_value"] = r.p_value;
        rec["reject"] = r.reject;
        rec["standardized"] = r.standardized;
        records.push_back(std::move(rec));
    }
    j["records"] = std::move(records);
    return j;
}

sim::SimulationReport report_from_json(const Json& j) {
    sim::SimulationReport rep;
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
            throw InputError("unsupported schema_version");
        }
        const std::string kind = j.at("kind");
        rep.kind = kind == "null_calibration" ? sim::StudyKind::null_calibration : sim::StudyKind::alternative_study;
        rep.scenario = scenario_from_json(j.at("scenario"));
        rep.sizes = j.at("sizes").get<std::vector<std::size_t>>();
        rep.population_t = j.at("population_t");
        if (!j.at("sigma_theory").is_null()) rep.sigma_theory = j.at("sigma_theory").get<double>();
        rep.aggregates = aggregates_from_json(j.at("aggregates"));
        for (const auto& r : j.at("records")) {
            sim::ReplicationRecord rec;
            rec.rep = r.at("rep");
            rec.statistic = r.at("statistic");
            rec.nu_sq = r.at("nu_sq");
            rec.sigma_hat = r.at("sigma_hat");
            rec.z = r.at("z");
            rec.p_value = r.at("p_value");
            rec.reject = r.at("reject");
            rec.standardized = r.at("standardized");
            rep.records.push_back(rec);
        }
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed report: ") + e.what());
    }
    if (rep.records.size() != rep.scenario.replications) {
        throw InputError("report has " + std::to_string(rep.records.size()) + " records, expected " +
                         std::to_string(rep.scenario.replications));
    }
    const auto again = sim::aggregate(rep.scenario, rep.records, rep.population_t);
    const auto& a = rep.aggregates;
    const bool ok = close(a.mean_z, again.mean_z) && close(a.var_z, again.var_z) && close(a.ks_z, again.ks_z) &&
                    close(a.mean_standardized, again.mean_standardized) &&
                    close(a.var_standardized, again.var_standardized) &&
                    close(a.ks_standardized, again.ks_standardized) && close(a.rejection_rate, again.rejection_rate) &&
                    close(a.mean_scaled_error, again.mean_scaled_error) &&
                    close(a.var_scaled_error, again.var_scaled_error) &&
                    close(a.mean_sigma_sq_theorem, again.mean_sigma_sq_theorem) &&
                    close(a.mean_sigma_sq_printed, again.mean_sigma_sq_printed);
    if (!ok) {
        throw InputError("report aggregates do not match its records");
    }
    return rep;
}

std::string records_to_csv(const sim::SimulationReport& report) {
    std::string out = "rep,statistic,nu_sq,sigma_hat,z,p_value,reject,standardized\n";
    for (const auto& r : report.records) {
        out += std::to_string(r.rep) + ',' + format_double(r.statistic) + ',' + format_double(r.nu_sq) + ',' +
               format_double(r.sigma_hat) + ',' + format_double(r.z) + ',' + format_double(r.p_value) + ',' +
               (r.reject ? "1" : "0") + ',' + format_double(r.standardized) + '\n';
    }
    return out;
}

Json assumption_report_to_json(const AssumptionReport& rep) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["gamma"] = rep.gamma;
    j["r_max"] = rep.r_max;
    j["tau_observed"] = rep.tau_observed;
    j["tau_bound"] = rep.tau_bound;
    j["c_k_observed"] = rep.c_k_observed;
    j["k_sq_sequence_tail"] = rep.k_sq_sequence_tail;
    j["k_sq_limit"] = rep.k_sq_limit;
    j["pass"] = {{"mean_bounded", rep.mean_bounded},
                 {"uniformly_bounded", rep.uniformly_bounded},
                 {"second_moment_limit", rep.second_moment_limit}};
    j["all_pass"] = rep.all_pass();
    return j;
}

void write_file_atomic(const std::string& path, std::string_view contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        f.flush();
        if (!f) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace gmmd::io
