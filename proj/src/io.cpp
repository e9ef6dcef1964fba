#include "arht/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "arht/error.hpp"

namespace arht::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& cell, std::size_t line, std::size_t column) {
    const std::string_view t = trim(cell);
    if (t.empty()) {
        throw DataError("empty cell at row " + std::to_string(line) + ", column " + std::to_string(column));
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw DataError("non-numeric value '" + std::string(t) + "' at row " + std::to_string(line) +
                        ", column " + std::to_string(column));
    }
    return v;
}

Eigen::MatrixXd numeric_matrix(const CsvTable& table, const std::vector<std::size_t>& rows,
                               const std::vector<std::size_t>& columns) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = table.rows[rows[i]];
        for (std::size_t j = 0; j < columns.size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                parse_cell(row[columns[j]], table.line_numbers[rows[i]], columns[j] + 1);
        }
    }
    return m;
}

void require_rectangular(const CsvTable& table, const std::string& path) {
    const std::size_t width = table.header.empty() ? (table.rows.empty() ? 0 : table.rows[0].size())
                                                   : table.header.size();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].size() != width) {
            throw DataError(path + ": row " + std::to_string(table.line_numbers[i]) + " has " +
                            std::to_string(table.rows[i].size()) + " columns, expected " + std::to_string(width));
        }
    }
    if (table.rows.empty()) throw DataError(path + ": no data rows");
}

std::vector<std::size_t> iota_n(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
    const Eigen::Index r = static_cast<Eigen::Index>(j.size());
    const Eigen::Index c = r ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = j.at(i).at(k).get<double>();
    return m;
}

Json lambda_to_json(double l) {
    if (std::isinf(l)) return "inf";
    return l;
}

double lambda_from_json(const Json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw DataError("invalid lambda value " + j.dump());
    }
    return j.get<double>();
}

template <typename T, std::size_t N>
Json array_to_json(const std::array<T, N>& a) {
    Json out = Json::array();
    for (const auto& v : a) out.push_back(v);
    return out;
}

template <typename T, std::size_t N>
std::array<T, N> array_from_json(const Json& j) {
    if (j.size() != N) throw DataError("expected an array of " + std::to_string(N) + " entries");
    std::array<T, N> a{};
    for (std::size_t i = 0; i < N; ++i) a[i] = j.at(i).get<T>();
    return a;
}

Json chi2_to_json(const ChiSquareApprox& c) {
    Json shared = Json::array();
    for (const auto& row : c.shared) shared.push_back(array_to_json(row));
    return {{"lambdas", array_to_json(c.lambdas)}, {"scales", array_to_json(c.scales)},
            {"centers", array_to_json(c.centers)}, {"spreads", array_to_json(c.spreads)},
            {"dofs", array_to_json(c.dofs)},       {"target", matrix_to_json(c.target)},
            {"shared", shared},                    {"segments", array_to_json(c.segments)}};
}

ChiSquareApprox chi2_from_json(const Json& j) {
    ChiSquareApprox c;
    c.lambdas = array_from_json<double, 3>(j.at("lambdas"));
    c.scales = array_from_json<double, 3>(j.at("scales"));
    c.centers = array_from_json<double, 3>(j.at("centers"));
    c.spreads = array_from_json<double, 3>(j.at("spreads"));
    c.dofs = array_from_json<long, 3>(j.at("dofs"));
    c.target = matrix_from_json(j.at("target"));
    for (std::size_t i = 0; i < 3; ++i) c.shared[i] = array_from_json<long, 3>(j.at("shared").at(i));
    c.segments = array_from_json<long, 7>(j.at("segments"));
    return c;
}

void require_schema(const Json& j) {
    if (!j.contains("schema") || j.at("schema") != std::string(kSchema)) {
        throw DataError("expected \"schema\": \"" + std::string(kSchema) + "\"");
    }
}

}  // namespace

CsvTable parse_csv(std::string_view text, char delimiter, bool has_header) {
    CsvTable table;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false;
    bool row_has_content = false;
    std::size_t line = 1;
    std::size_t row_line = 1;

    auto end_row = [&] {
        row.push_back(std::move(cell));
        cell.clear();
        const bool blank = !row_has_content && row.size() == 1 && row[0].empty();
        if (!blank) {
            if (has_header && table.header.empty() && table.rows.empty()) {
                table.header = std::move(row);
            } else {
                table.rows.push_back(std::move(row));
                table.line_numbers.push_back(row_line);
            }
        }
        row.clear();
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                cell.push_back(ch);
            }
            continue;
        }
        if (ch == '"') {
            in_quotes = true;
            row_has_content = true;
        } else if (ch == delimiter) {
            row.push_back(std::move(cell));
            cell.clear();
            row_has_content = true;
        } else if (ch == '\r') {
            // tolerated before \n
        } else if (ch == '\n') {
            end_row();
            ++line;
            row_line = line;
        } else {
            cell.push_back(ch);
            if (ch != ' ' && ch != '\t') row_has_content = true;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted field starting near line " + std::to_string(row_line));
    if (!cell.empty() || !row.empty() || row_has_content) end_row();
    return table;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash) {
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex;
    ss.width(16);
    ss.fill('0');
    ss << v;
    return ss.str();
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

LoadedData load_dataset(const InputSpec& spec) {
    LoadedData out;
    if (spec.mode == InputSpec::Mode::two_files) {
        if (spec.paths.size() != 2) throw std::invalid_argument("two input files are required");
        Eigen::MatrixXd samples[2];
        std::uint64_t hash = 0xcbf29ce484222325ULL;
        for (int k = 0; k < 2; ++k) {
            const std::string text = read_file(spec.paths[k]);
            hash = fnv1a(text, hash);
            const CsvTable table = parse_csv(text, spec.delimiter, spec.has_header);
            require_rectangular(table, spec.paths[k]);
            try {
                samples[k] = numeric_matrix(table, iota_n(table.rows.size()), iota_n(table.rows[0].size()));
            } catch (const DataError& e) {
                throw DataError(spec.paths[k] + ": " + e.what());
            }
        }
        if (samples[0].cols() != samples[1].cols()) {
            throw DataError("input files have different column counts (" + std::to_string(samples[0].cols()) +
                            " vs " + std::to_string(samples[1].cols()) + ")");
        }
        out.data.x1 = std::move(samples[0]);
        out.data.x2 = std::move(samples[1]);
        out.content_hash = hash;
    } else {
        if (spec.paths.size() != 1) throw std::invalid_argument("labeled mode takes exactly one file");
        const std::string text = read_file(spec.paths[0]);
        out.content_hash = fnv1a(text);
        const CsvTable table = parse_csv(text, spec.delimiter, spec.has_header);
        require_rectangular(table, spec.paths[0]);
        std::size_t label_col = 0;
        if (spec.has_header) {
            const auto it = std::find(table.header.begin(), table.header.end(), spec.group_column);
            if (it == table.header.end()) throw DataError("group column '" + spec.group_column + "' not found");
            label_col = static_cast<std::size_t>(it - table.header.begin());
        } else {
            std::size_t idx = 0;
            const auto [ptr, ec] =
                std::from_chars(spec.group_column.data(), spec.group_column.data() + spec.group_column.size(), idx);
            if (ec != std::errc() || idx < 1 || idx > table.rows[0].size()) {
                throw DataError("without a header the group column must be a 1-based index");
            }
            label_col = idx - 1;
        }
        std::set<std::string> labels;
        for (const auto& row : table.rows) labels.insert(std::string(trim(row[label_col])));
        if (labels.size() != 2) {
            throw DataError("expected exactly 2 group labels, found " + std::to_string(labels.size()));
        }
        out.group_labels.assign(labels.begin(), labels.end());
        std::vector<std::size_t> rows[2];
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            rows[std::string(trim(table.rows[i][label_col])) == out.group_labels[0] ? 0 : 1].push_back(i);
        }
        std::vector<std::size_t> columns;
        for (std::size_t c = 0; c < table.rows[0].size(); ++c) {
            if (c != label_col) columns.push_back(c);
        }
        try {
            out.data.x1 = numeric_matrix(table, rows[0], columns);
            out.data.x2 = numeric_matrix(table, rows[1], columns);
        } catch (const DataError& e) {
            throw DataError(spec.paths[0] + ": " + e.what());
        }
    }
    out.data.validate();
    return out;
}

Dataset load_dataset_only(const InputSpec& spec) { return load_dataset(spec).data; }

Json to_json(const PriorWeights& w) { return Json::array({w.pi0(), w.pi1(), w.pi2()}); }

PriorWeights prior_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw DataError("a prior is an array [pi0, pi1, pi2]");
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

std::vector<PriorWeights> priors_from_json(const Json& j) {
    if (j.is_string() && j.get<std::string>() == "canonical") return PriorWeights::canonical();
    if (!j.is_array() || j.empty()) throw DataError("priors must be \"canonical\" or a nonempty array");
    std::vector<PriorWeights> out;
    for (const auto& p : j) out.push_back(prior_from_json(p));
    return out;
}

Json to_json(const ArhtOptions& opts) {
    Json priors = Json::array();
    for (const auto& p : opts.priors) priors.push_back(to_json(p));
    Json j = {{"priors", priors},
              {"calibration", std::string(to_string(opts.calibration))},
              {"bootstrap_B", opts.bootstrap_B},
              {"seed", opts.seed},
              {"grid_points", opts.grid_points},
              {"chi2_draws", opts.chi2_draws}};
    j["permutations"] = opts.permutations ? Json(*opts.permutations) : Json(nullptr);
    j["lambda_range"] = opts.lambda_range ? Json::array({opts.lambda_range->first, opts.lambda_range->second})
                                          : Json(nullptr);
    return j;
}

ArhtOptions options_from_json(const Json& j) {
    ArhtOptions o;
    if (j.contains("priors")) o.priors = priors_from_json(j.at("priors"));
    if (j.contains("calibration")) o.calibration = calibration_from_string(j.at("calibration").get<std::string>());
    if (j.contains("bootstrap_B")) o.bootstrap_B = j.at("bootstrap_B").get<int>();
    if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid_points")) o.grid_points = j.at("grid_points").get<int>();
    if (j.contains("chi2_draws")) o.chi2_draws = j.at("chi2_draws").get<int>();
    if (j.contains("permutations") && !j.at("permutations").is_null()) o.permutations = j.at("permutations").get<int>();
    if (j.contains("lambda_range") && !j.at("lambda_range").is_null()) {
        o.lambda_range = std::make_pair(j.at("lambda_range").at(0).get<double>(), j.at("lambda_range").at(1).get<double>());
    }
    return o;
}

Json to_json(const TestResult& r) {
    Json stats = Json::array();
    for (const auto& s : r.per_lambda_stats) {
        stats.push_back({{"lambda", lambda_to_json(s.lambda)},
                         {"value", s.value},
                         {"calibration", std::string(to_string(s.calibration))}});
    }
    Json selections = Json::array();
    for (std::size_t i = 0; i < r.selection.priors.size(); ++i) {
        selections.push_back({{"prior", to_json(r.selection.priors[i])},
                              {"lambda", r.selection.per_prior[i]},
                              {"index", r.selection.prior_to_index[i]}});
    }
    Json j = {{"statistic", r.statistic},
              {"calibration", std::string(to_string(r.calibration))},
              {"p_value", r.p_value},
              {"method", std::string(to_string(r.method))},
              {"seed", r.seed},
              {"resamples", r.resamples},
              {"lambda_fixed_across_permutations", r.lambda_fixed_across_permutations},
              {"grid", {{"lo", r.grid.lo}, {"hi", r.grid.hi}, {"points", r.grid.points}}},
              {"lambdas", r.selection.lambdas},
              {"selections", selections},
              {"per_lambda_stats", stats},
              {"kernel",
               {{"lambdas", r.kernel.lambdas},
                {"gamma", matrix_to_json(r.kernel.gamma)},
                {"gamma_psd", matrix_to_json(r.kernel.gamma_psd)},
                {"sqrt_psd", matrix_to_json(r.kernel.sqrt_psd)},
                {"warnings", r.kernel.warnings}}},
              {"warnings", r.warnings}};
    j["chi2"] = r.chi2 ? chi2_to_json(*r.chi2) : Json(nullptr);
    return j;
}

TestResult test_result_from_json(const Json& j) {
    TestResult r;
    r.statistic = j.at("statistic").get<double>();
    r.calibration = calibration_from_string(j.at("calibration").get<std::string>());
    r.p_value = j.at("p_value").get<double>();
    r.method = pvalue_method_from_string(j.at("method").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.resamples = j.at("resamples").get<int>();
    r.lambda_fixed_across_permutations = j.at("lambda_fixed_across_permutations").get<bool>();
    r.grid.lo = j.at("grid").at("lo").get<double>();
    r.grid.hi = j.at("grid").at("hi").get<double>();
    r.grid.points = j.at("grid").at("points").get<std::vector<double>>();
    r.selection.lambdas = j.at("lambdas").get<std::vector<double>>();
    for (const auto& s : j.at("selections")) {
        r.selection.priors.push_back(prior_from_json(s.at("prior")));
        r.selection.per_prior.push_back(s.at("lambda").get<double>());
        r.selection.prior_to_index.push_back(s.at("index").get<std::size_t>());
    }
    for (const auto& s : j.at("per_lambda_stats")) {
        r.per_lambda_stats.push_back({lambda_from_json(s.at("lambda")), s.at("value").get<double>(),
                                      calibration_from_string(s.at("calibration").get<std::string>())});
    }
    const Json& k = j.at("kernel");
    r.kernel.lambdas = k.at("lambdas").get<std::vector<double>>();
    r.kernel.gamma = matrix_from_json(k.at("gamma"));
    r.kernel.gamma_psd = matrix_from_json(k.at("gamma_psd"));
    r.kernel.sqrt_psd = matrix_from_json(k.at("sqrt_psd"));
    r.kernel.warnings = k.at("warnings").get<std::vector<std::string>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (!j.at("chi2").is_null()) r.chi2 = chi2_from_json(j.at("chi2"));
    return r;
}

Json to_json(const ResultDocument& doc) {
    return {{"schema", std::string(kSchema)},
            {"version", doc.version},
            {"input",
             {{"n1", doc.input.n1}, {"n2", doc.input.n2}, {"p", doc.input.p}, {"content_hash", doc.input.content_hash}}},
            {"options", to_json(doc.options)},
            {"result", to_json(doc.result)},
            {"decision", {{"alpha", doc.alpha}, {"reject", doc.result.p_value <= doc.alpha}}},
            {"wall_time_seconds", doc.wall_time_seconds}};
}

ResultDocument result_document_from_json(const Json& j) {
    require_schema(j);
    ResultDocument doc;
    doc.version = j.at("version").get<std::string>();
    const Json& in = j.at("input");
    doc.input = {in.at("n1").get<int>(), in.at("n2").get<int>(), in.at("p").get<int>(),
                 in.at("content_hash").get<std::string>()};
    doc.options = options_from_json(j.at("options"));
    doc.result = test_result_from_json(j.at("result"));
    doc.alpha = j.at("decision").at("alpha").get<double>();
    doc.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    return doc;
}

std::string serialize(const ResultDocument& doc) { return to_json(doc).dump(2) + "\n"; }

ResultDocument deserialize(std::string_view text) {
    try {
        return result_document_from_json(Json::parse(text));
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed result document: ") + e.what());
    }
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    require_schema(j);
    ExperimentConfig c;
    try {
        if (j.contains("cov")) {
            const Json& cov = j.at("cov");
            if (cov.is_string()) {
                c.cov.kind = cov_kind_from_string(cov.get<std::string>());
            } else {
                c.cov.kind = cov_kind_from_string(cov.at("kind").get<std::string>());
                if (cov.contains("rotation_seed")) c.cov.rotation_seed = cov.at("rotation_seed").get<std::uint64_t>();
                if (cov.contains("sparse_exponent")) c.cov.sparse_exponent = cov.at("sparse_exponent").get<double>();
            }
        }
        if (j.contains("noise")) c.noise = noise_kind_from_string(j.at("noise").get<std::string>());
        if (j.contains("p")) c.p = j.at("p").get<int>();
        if (j.contains("n1")) c.n1 = j.at("n1").get<int>();
        if (j.contains("n2")) c.n2 = j.at("n2").get<int>();
        if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
        if (j.contains("replicates")) c.replicates = j.at("replicates").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("bootstrap_B")) c.bootstrap_B = j.at("bootstrap_B").get<int>();
        if (j.contains("chi2_draws")) c.chi2_draws = j.at("chi2_draws").get<int>();
        if (j.contains("grid_points")) c.grid_points = j.at("grid_points").get<int>();
        if (j.contains("priors")) c.priors = priors_from_json(j.at("priors"));
        if (j.contains("lambda_range") && !j.at("lambda_range").is_null()) {
            c.lambda_range = std::make_pair(j.at("lambda_range").at(0).get<double>(),
                                            j.at("lambda_range").at(1).get<double>());
        }
        if (j.contains("method")) {
            c.methods = {method_from_string(j.at("method").get<std::string>())};
        } else if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
        }
        if (j.contains("mu")) {
            const Json& mu = j.at("mu");
            c.mu_kind = mu_kind_from_string(mu.is_string() ? mu.get<std::string>() : mu.at("kind").get<std::string>());
        }
        if (j.contains("c_grid")) c.c_grid = j.at("c_grid").get<std::vector<double>>();
        if (j.contains("size_adjusted")) c.size_adjusted = j.at("size_adjusted").get<bool>();
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed experiment config: ") + e.what());
    }
    c.cov.p = c.p;
    c.validate();
    return c;
}

Json to_json(const ExperimentConfig& cfg) {
    Json methods = Json::array();
    for (Method m : cfg.methods) methods.push_back(std::string(to_string(m)));
    Json priors = Json::array();
    for (const auto& p : cfg.priors) priors.push_back(to_json(p));
    Json j = {{"schema", std::string(kSchema)},
              {"cov",
               {{"kind", std::string(to_string(cfg.cov.kind))},
                {"rotation_seed", cfg.cov.rotation_seed},
                {"sparse_exponent", cfg.cov.sparse_exponent}}},
              {"noise", std::string(to_string(cfg.noise))},
              {"p", cfg.p},
              {"n1", cfg.n1},
              {"n2", cfg.n2},
              {"alpha", cfg.alpha},
              {"replicates", cfg.replicates},
              {"methods", methods},
              {"seed", cfg.seed},
              {"bootstrap_B", cfg.bootstrap_B},
              {"chi2_draws", cfg.chi2_draws},
              {"grid_points", cfg.grid_points},
              {"priors", priors},
              {"mu", std::string(to_string(cfg.mu_kind))},
              {"c_grid", cfg.c_grid},
              {"size_adjusted", cfg.size_adjusted}};
    j["lambda_range"] =
        cfg.lambda_range ? Json::array({cfg.lambda_range->first, cfg.lambda_range->second}) : Json(nullptr);
    return j;
}

Json size_results_to_json(const ExperimentConfig& cfg, const std::vector<SizeResult>& results) {
    Json rows = Json::array();
    for (const auto& r : results) {
        rows.push_back({{"method", std::string(to_string(r.method))},
                        {"empirical_size", r.empirical_size},
                        {"mc_se", r.mc_se},
                        {"rejections", r.rejections},
                        {"replicates", r.replicates},
                        {"failures", r.failures}});
    }
    Json j = {{"schema", std::string(kSchema)}, {"kind", "size"}, {"config", to_json(cfg)}, {"results", rows}};
    if (!results.empty()) {
        j["empirical_size"] = results.front().empirical_size;
        j["mc_se"] = results.front().mc_se;
    }
    return j;
}

Json power_results_to_json(const ExperimentConfig& cfg, const std::vector<PowerCurve>& curves) {
    Json out = Json::array();
    for (const auto& c : curves) {
        Json pts = Json::array();
        for (const auto& p : c.points) {
            pts.push_back({{"c", p.c},
                           {"signal", p.signal},
                           {"power", p.power},
                           {"mc_se", p.mc_se},
                           {"rejections", p.rejections},
                           {"replicates", p.replicates},
                           {"failures", p.failures}});
        }
        out.push_back({{"method", std::string(to_string(c.method))},
                       {"cutoff", c.cutoff ? Json(*c.cutoff) : Json(nullptr)},
                       {"points", pts}});
    }
    return {{"schema", std::string(kSchema)}, {"kind", "power"}, {"config", to_json(cfg)}, {"curves", out}};
}

std::string power_curves_to_csv(const std::vector<PowerCurve>& curves) {
    std::ostringstream ss;
    ss << "method,c,signal,power,mc_se,rejections,replicates,failures\n";
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            ss << to_string(c.method) << ',' << format_double(p.c) << ',' << format_double(p.signal) << ','
               << format_double(p.power) << ',' << format_double(p.mc_se) << ',' << p.rejections << ','
               << p.replicates << ',' << p.failures << '\n';
        }
    }
    return ss.str();
}

}  // namespace arht::io
