#pragma once

#include "gmmd/error.hpp"
#include "gmmd/estimators.hpp"
#include "gmmd/sim.hpp"

#include <json.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gmmd::io {

inline constexpr int kSchemaVersion = 1;

// Malformed text input; line is 1-based, 0 when not tied to a line.
class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& message)
        : InputError(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Rows of (label, coordinates) in file order. Labels are contiguous 1..s with s >= 2.
struct InputTable {
    std::vector<std::string> header;
    std::vector<std::size_t> labels;
    PointSet points{1};
    std::size_t num_groups = 0;
};

// CSV with header `group,x1,...,xd`.
InputTable parse_grouped_csv(std::string_view text);
std::string write_grouped_csv(const InputTable& table);
// Groups in label order; points keep their file order within each group.
GroupedSample to_grouped_sample(const InputTable& table);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// Scenario text file:
//   [scenario]   kind, n, replications, seed, gamma, alpha, kernel, bandwidth,
//                variance_variant, mc_draws (alternative), shifts (power)
//   [group]      one section per group: rho, distribution (normal|uniform),
//                mean + sdev or lo + hi, comma-separated per coordinate
// Lines are `key = value`; `#` starts a comment.
enum class ScenarioKind { null, alternative, power };

struct ScenarioFile {
    ScenarioKind kind = ScenarioKind::null;
    sim::ScenarioSpec spec;
    std::size_t mc_draws = 100000;
    std::vector<double> shifts;
};

// Throws ParseError for syntax problems and InputError("field: ...") for invalid values.
ScenarioFile parse_scenario(std::string_view text);

using Json = nlohmann::ordered_json;

Json scenario_to_json(const sim::ScenarioSpec& scn);
Json report_to_json(const sim::SimulationReport& report);
// Parses a report and checks that the stored aggregates equal those recomputed
// from its records (to 1e-12); throws InputError otherwise.
sim::SimulationReport report_from_json(const Json& j);
std::string records_to_csv(const sim::SimulationReport& report);

Json assumption_report_to_json(const AssumptionReport& rep);

// Writes to a sibling temporary file, then renames over path.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace gmmd::io
