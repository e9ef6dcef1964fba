#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arht/engine.hpp"
#include "arht/simgen.hpp"
#include "arht/spectral.hpp"

namespace arht::io {

inline constexpr std::string_view kSchema = "arht/1";
inline constexpr std::string_view kVersion = "0.1.0";

using Json = nlohmann::json;

/// Parsed delimited text: cells as strings, blank lines dropped.
struct CsvTable {
    std::vector<std::string> header;  // empty when the file has none
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// RFC 4180 style: quoted fields, doubled quotes, CRLF or LF line ends.
CsvTable parse_csv(std::string_view text, char delimiter = ',', bool has_header = false);
std::string read_file(const std::string& path);

struct InputSpec {
    enum class Mode { two_files, labeled_single };
    Mode mode = Mode::two_files;
    std::vector<std::string> paths;
    char delimiter = ',';
    bool has_header = false;
    /// Header name of the label column (or a 1-based index when there is no header).
    std::string group_column;
};

struct LoadedData {
    Dataset data;
    std::vector<std::string> group_labels;  // labeled_single only: labels of sample 1 and 2
    std::uint64_t content_hash = 0;
};

/// Rows are observations, columns variables. Errors name the offending row and column.
LoadedData load_dataset(const InputSpec& spec);
Dataset load_dataset_only(const InputSpec& spec);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Shortest text form that reads back to the same double (17 significant digits at most).
std::string format_double(double v);

Json to_json(const PriorWeights& w);
PriorWeights prior_from_json(const Json& j);
std::vector<PriorWeights> priors_from_json(const Json& j);

Json to_json(const ArhtOptions& opts);
ArhtOptions options_from_json(const Json& j);

Json to_json(const TestResult& r);
TestResult test_result_from_json(const Json& j);

struct InputFingerprint {
    int n1 = 0;
    int n2 = 0;
    int p = 0;
    std::string content_hash;
    bool operator==(const InputFingerprint&) const = default;
};

struct ResultDocument {
    TestResult result;
    InputFingerprint input;
    ArhtOptions options;
    double alpha = 0.05;
    std::string version{kVersion};
    double wall_time_seconds = 0.0;
};

Json to_json(const ResultDocument& doc);
ResultDocument result_document_from_json(const Json& j);
std::string serialize(const ResultDocument& doc);
ResultDocument deserialize(std::string_view text);

/// Experiment config; requires "schema": "arht/1".
ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);
Json size_results_to_json(const ExperimentConfig& cfg, const std::vector<SizeResult>& results);
Json power_results_to_json(const ExperimentConfig& cfg, const std::vector<PowerCurve>& curves);
/// One row per (method, c): method,c,signal,power,mc_se,rejections,replicates,failures.
std::string power_curves_to_csv(const std::vector<PowerCurve>& curves);

}  // namespace arht::io
