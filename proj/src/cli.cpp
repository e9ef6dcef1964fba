#include "arht/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "arht/engine.hpp"
#include "arht/error.hpp"
#include "arht/fdr.hpp"
#include "arht/io.hpp"
#include "arht/selector.hpp"
#include "arht/simgen.hpp"

namespace arht {

namespace {

struct DataArgs {
    std::vector<std::string> files;
    std::string labels;
    bool header = false;
    std::string delimiter = ",";
};

struct TestArgs {
    DataArgs data;
    std::string priors = "canonical";
    std::string calibration = "cuberoot";
    int bootstrap = 10000;
    std::optional<int> permutations;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int grid_points = 200;
    std::vector<double> lambda_range;
    int chi2_draws = 100000;
    std::string out;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
    cmd->add_option("files", a.files, "Sample CSV files (two), or one file with --labels")->required();
    cmd->add_option("--labels", a.labels, "Group column (header name, or 1-based index without --header)");
    cmd->add_flag("--header", a.header, "First row is a header");
    cmd->add_option("--delimiter", a.delimiter, "Field delimiter");
}

io::InputSpec input_spec(const DataArgs& a) {
    io::InputSpec spec;
    if (a.delimiter.size() != 1) throw std::invalid_argument("--delimiter takes a single character");
    spec.delimiter = a.delimiter[0];
    spec.has_header = a.header;
    spec.paths = a.files;
    if (!a.labels.empty()) {
        spec.mode = io::InputSpec::Mode::labeled_single;
        spec.group_column = a.labels;
        if (a.files.size() != 1) throw std::invalid_argument("--labels takes exactly one input file");
    } else if (a.files.size() != 2) {
        throw std::invalid_argument("expected two input files (or one file with --labels)");
    }
    return spec;
}

std::vector<PriorWeights> parse_priors(const std::string& arg) {
    if (arg == "canonical") return PriorWeights::canonical();
    std::string text = arg;
    if (std::filesystem::exists(arg)) text = io::read_file(arg);
    io::Json j;
    try {
        j = io::Json::parse(text);
    } catch (const io::Json::exception& e) {
        throw std::invalid_argument("--priors must be 'canonical', a JSON array, or a JSON file: " +
                                    std::string(e.what()));
    }
    if (j.is_object() && j.contains("priors")) j = j.at("priors");
    try {
        return io::priors_from_json(j);
    } catch (const DataError& e) {
        throw std::invalid_argument(std::string("--priors: ") + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

ArhtOptions options_from(const TestArgs& a) {
    ArhtOptions o;
    o.priors = parse_priors(a.priors);
    o.calibration = calibration_from_string(a.calibration);
    o.bootstrap_B = a.bootstrap;
    o.permutations = a.permutations;
    o.seed = a.seed;
    o.grid_points = a.grid_points;
    o.chi2_draws = a.chi2_draws;
    if (!a.lambda_range.empty()) {
        if (a.lambda_range.size() != 2) throw std::invalid_argument("--lambda-range takes two values");
        o.lambda_range = std::make_pair(a.lambda_range[0], a.lambda_range[1]);
    }
    o.validate();
    return o;
}

int run_test(const TestArgs& a) {
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw std::invalid_argument("--alpha must lie in (0, 1)");
    const ArhtOptions opts = options_from(a);
    const io::LoadedData loaded = io::load_dataset(input_spec(a.data));
    const auto start = std::chrono::steady_clock::now();
    io::ResultDocument doc;
    doc.result = opts.permutations ? permutation_test(loaded.data, opts) : arht_test(loaded.data, opts);
    doc.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    doc.options = opts;
    doc.alpha = a.alpha;
    doc.input = {static_cast<int>(loaded.data.n1()), static_cast<int>(loaded.data.n2()),
                 static_cast<int>(loaded.data.p()), io::hex64(loaded.content_hash)};
    if (!loaded.group_labels.empty()) {
        std::cerr << "sample 1 = '" << loaded.group_labels[0] << "', sample 2 = '" << loaded.group_labels[1]
                  << "'\n";
    }
    const std::string text = io::serialize(doc);
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text(a.out, text);
        std::cout << "statistic " << io::format_double(doc.result.statistic) << "  p-value "
                  << io::format_double(doc.result.p_value) << "  " << (doc.result.p_value <= a.alpha ? "reject" : "retain")
                  << " at alpha " << io::format_double(a.alpha) << "\n";
    }
    for (const auto& w : doc.result.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int run_lambda(const TestArgs& a, const std::string& profile_path) {
    const ArhtOptions opts = options_from(a);
    const Dataset data = io::load_dataset_only(input_spec(a.data));
    const SampleSummary s = summarize(data);
    const auto bounds = lambda_bounds(s);
    const auto range = opts.lambda_range ? *opts.lambda_range : bounds;
    const LambdaGrid grid = build_grid(range.first, range.second, opts.grid_points);
    const LambdaSet set = select_lambda_set(s, opts.priors, grid);

    io::Json selections = io::Json::array();
    std::vector<std::vector<std::optional<double>>> profiles;
    for (const auto& prior : opts.priors) {
        const Selection sel = select_lambda_detail(s, prior, grid);
        selections.push_back({{"prior", io::to_json(prior)},
                              {"lambda", sel.lambda},
                              {"objective", sel.objective},
                              {"index", sel.index},
                              {"warnings", sel.warnings}});
        profiles.push_back(q_profile(s, prior, grid));
    }
    const io::Json j = {{"schema", std::string(io::kSchema)},
                        {"bounds", {{"lo", bounds.first}, {"hi", bounds.second}}},
                        {"grid", {{"lo", grid.lo}, {"hi", grid.hi}, {"points", grid.points}}},
                        {"selections", selections},
                        {"lambdas", set.lambdas},
                        {"minimax_lambda", minimax_lambda(grid)}};
    write_text(a.out, j.dump(2) + "\n");

    if (!profile_path.empty()) {
        std::ostringstream csv;
        csv << "lambda";
        for (std::size_t k = 0; k < opts.priors.size(); ++k) csv << ",q_prior" << k;
        csv << "\n";
        for (std::size_t i = 0; i < grid.points.size(); ++i) {
            csv << io::format_double(grid.points[i]);
            for (const auto& prof : profiles) {
                csv << ',';
                if (prof[i]) csv << io::format_double(*prof[i]);
            }
            csv << "\n";
        }
        write_text(profile_path, csv.str());
    }
    return 0;
}

int run_simulate(const std::string& kind, const std::string& config, const std::string& out,
                 const std::string& csv) {
    io::Json j;
    try {
        j = io::Json::parse(io::read_file(config));
    } catch (const io::Json::exception& e) {
        throw DataError(config + ": " + e.what());
    }
    const ExperimentConfig cfg = io::experiment_config_from_json(j);
    if (kind == "size") {
        const auto results = run_size_experiment(cfg);
        write_text(out, io::size_results_to_json(cfg, results).dump(2) + "\n");
        if (!out.empty()) {
            for (const auto& r : results) {
                std::cout << to_string(r.method) << "  size " << io::format_double(r.empirical_size) << "  se "
                          << io::format_double(r.mc_se) << "  failures " << r.failures << "\n";
            }
        }
    } else {
        if (cfg.c_grid.empty()) throw DataError("power simulations need a nonempty c_grid");
        const auto curves = run_power_curve(cfg);
        write_text(out, io::power_results_to_json(cfg, curves).dump(2) + "\n");
        if (!csv.empty()) write_text(csv, io::power_curves_to_csv(curves));
    }
    return 0;
}

int run_fdr(const std::string& path, const std::string& out, const std::string& column) {
    const io::CsvTable raw = io::parse_csv(io::read_file(path));
    if (raw.rows.empty()) throw DataError(path + ": no rows");
    // A first row that is not numeric is taken as the header.
    bool has_header = false;
    {
        const auto& first = raw.rows.front();
        for (const auto& cell : first) {
            char* end = nullptr;
            std::strtod(cell.c_str(), &end);
            if (cell.empty() || *end != '\0') has_header = true;
        }
    }
    const io::CsvTable table = io::parse_csv(io::read_file(path), ',', has_header);
    std::size_t col = table.rows.front().size() - 1;
    if (!column.empty()) {
        const auto it = std::find(table.header.begin(), table.header.end(), column);
        if (it == table.header.end()) throw DataError("column '" + column + "' not found in " + path);
        col = static_cast<std::size_t>(it - table.header.begin());
    }
    std::vector<double> p;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (col >= table.rows[i].size()) {
            throw DataError(path + ": row " + std::to_string(table.line_numbers[i]) + " is too short");
        }
        const std::string& cell = table.rows[i][col];
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || *end != '\0') {
            throw DataError(path + ": non-numeric p-value at row " + std::to_string(table.line_numbers[i]) +
                            ", column " + std::to_string(col + 1));
        }
        p.push_back(v);
    }
    std::vector<double> adj;
    try {
        adj = bh_adjust(p);
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
    std::ostringstream csv;
    csv << (has_header ? table.header[col] : std::string("p")) << ",p_adjusted\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        csv << io::format_double(p[i]) << ',' << io::format_double(adj[i]) << "\n";
    }
    write_text(out, csv.str());
    return 0;
}

void add_test_options(CLI::App* cmd, TestArgs& a) {
    add_data_options(cmd, a.data);
    cmd->add_option("--priors", a.priors, "'canonical', a JSON array of [pi0,pi1,pi2], or a JSON file");
    cmd->add_option("--calibration", a.calibration, "raw | cuberoot | chi2")
        ->check(CLI::IsMember({"raw", "cuberoot", "chi2"}));
    cmd->add_option("--grid-points", a.grid_points, "Number of grid points");
    cmd->add_option("--lambda-range", a.lambda_range, "Search range LO HI")->expected(2);
    cmd->add_option("--seed", a.seed, "Random seed");
    cmd->add_option("--out", a.out, "Output path (stdout when omitted)");
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Adaptable regularized Hotelling T^2 two-sample test"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(io::kVersion));

    TestArgs test_args;
    auto* test_cmd = app.add_subcommand("test", "Run the test on two samples");
    add_test_options(test_cmd, test_args);
    test_cmd->add_option("--bootstrap", test_args.bootstrap, "Bootstrap draws");
    test_cmd->add_option("--permutations", test_args.permutations, "Use a permutation p-value with N shuffles");
    test_cmd->add_option("--chi2-draws", test_args.chi2_draws, "Monte Carlo draws for the chi-square p-value");
    test_cmd->add_option("--alpha", test_args.alpha, "Significance level for the reported decision");

    TestArgs lambda_args;
    std::string profile_path;
    auto* lambda_cmd = app.add_subcommand("lambda", "Report lambda bounds, grid, selections and Q profiles");
    add_test_options(lambda_cmd, lambda_args);
    lambda_cmd->add_option("--profile", profile_path, "Write the Q profile CSV here");

    std::string sim_kind, sim_config, sim_out, sim_csv;
    auto* sim_cmd = app.add_subcommand("simulate", "Run a size or power simulation");
    sim_cmd->add_option("kind", sim_kind, "size | power")->required()->check(CLI::IsMember({"size", "power"}));
    sim_cmd->add_option("--config", sim_config, "Experiment config JSON")->required();
    sim_cmd->add_option("--out", sim_out, "Results JSON (stdout when omitted)");
    sim_cmd->add_option("--csv", sim_csv, "Power curve CSV");

    std::string fdr_in, fdr_out, fdr_column;
    auto* fdr_cmd = app.add_subcommand("fdr", "Benjamini-Hochberg adjustment of a p-value column");
    fdr_cmd->add_option("pvals", fdr_in, "CSV of p-values")->required();
    fdr_cmd->add_option("--column", fdr_column, "Header name of the p-value column (default: last)");
    fdr_cmd->add_option("--out", fdr_out, "Output CSV (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (test_cmd->parsed()) return run_test(test_args);
        if (lambda_cmd->parsed()) return run_lambda(lambda_args, profile_path);
        if (sim_cmd->parsed()) return run_simulate(sim_kind, sim_config, sim_out, sim_csv);
        if (fdr_cmd->parsed()) return run_fdr(fdr_in, fdr_out, fdr_column);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace arht
