#include "arht/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "arht/error.hpp"
#include "arht/parallel.hpp"
#include "arht/rng.hpp"

namespace arht {

namespace {

constexpr std::size_t kChunk = 256;
constexpr std::uint64_t kPermutationStream = 0x7065726d75746eULL;

std::size_t chunk_count(std::size_t draws) { return (draws + kChunk - 1) / kChunk; }

LambdaGrid grid_for(const SampleSummary& s, const ArhtOptions& opts) {
    auto [lo, hi] = opts.lambda_range ? *opts.lambda_range : lambda_bounds(s);
    return build_grid(lo, hi, opts.grid_points);
}

std::vector<StatValue> stats_at(const SampleSummary& s, const std::vector<ThetaEstimates>& est,
                                Calibration c) {
    std::vector<StatValue> out;
    out.reserve(est.size());
    for (const auto& t : est) out.push_back(calibrated_stat(s, t, c));
    return out;
}

double max_value(const std::vector<StatValue>& stats) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : stats) best = std::max(best, v.value);
    return best;
}

std::vector<ThetaEstimates> estimates_at(const SampleSummary& s, const std::vector<double>& lambdas) {
    std::vector<ThetaEstimates> est;
    est.reserve(lambdas.size());
    for (double l : lambdas) est.push_back(theta_estimates(s, l));
    return est;
}

Dataset permuted(const Eigen::MatrixXd& pooled, const std::vector<Eigen::Index>& order, Eigen::Index n1) {
    const Eigen::Index n = pooled.rows();
    Dataset d;
    d.x1.resize(n1, pooled.cols());
    d.x2.resize(n - n1, pooled.cols());
    for (Eigen::Index i = 0; i < n1; ++i) d.x1.row(i) = pooled.row(order[i]);
    for (Eigen::Index i = n1; i < n; ++i) d.x2.row(i - n1) = pooled.row(order[i]);
    return d;
}

}  // namespace

void ArhtOptions::validate() const {
    if (priors.empty()) throw std::invalid_argument("at least one prior is required");
    if (bootstrap_B < 100) throw std::invalid_argument("bootstrap_B must be >= 100");
    if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
    if (permutations && *permutations < 100) throw std::invalid_argument("permutations must be >= 100");
    if (chi2_draws < 100) throw std::invalid_argument("chi2_draws must be >= 100");
    if (calibration == Calibration::chi2 && priors.size() != 3) {
        throw std::invalid_argument(
            "chi2 calibration needs exactly three priors; use bootstrap calibration (raw or cuberoot) otherwise");
    }
    if (lambda_range && !(lambda_range->first > 0.0 && lambda_range->second > lambda_range->first)) {
        throw std::invalid_argument("lambda range must satisfy 0 < lo < hi");
    }
}

std::string_view to_string(PValueMethod m) {
    switch (m) {
        case PValueMethod::bootstrap: return "bootstrap";
        case PValueMethod::chi2: return "chi2";
        case PValueMethod::permutation: return "permutation";
    }
    return "unknown";
}

PValueMethod pvalue_method_from_string(std::string_view name) {
    if (name == "bootstrap") return PValueMethod::bootstrap;
    if (name == "chi2") return PValueMethod::chi2;
    if (name == "permutation") return PValueMethod::permutation;
    throw std::invalid_argument("unknown p-value method '" + std::string(name) + "'");
}

long ChiSquareApprox::block_dof(int i) const {
    long total = 0;
    for (int s = 0; s < 7; ++s) {
        if (kSegmentBlocks[s][i]) total += segments[s];
    }
    return total;
}

long ChiSquareApprox::block_overlap(int i, int j) const {
    long total = 0;
    for (int s = 0; s < 7; ++s) {
        if (kSegmentBlocks[s][i] && kSegmentBlocks[s][j]) total += segments[s];
    }
    return total;
}

void chi2_allocate(ChiSquareApprox& a) {
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double half = a.target(i, j) / 2.0;
            a.shared[i][j] = static_cast<long>(i == j ? std::ceil(half) : std::floor(half));
        }
        a.dofs[i] = a.shared[i][i];
    }

    const auto& phi = a.shared;
    const long m = std::min({phi[0][1], phi[0][2], phi[1][2]});
    a.segments = {m,
                  phi[0][1] - m,
                  phi[0][2] - m,
                  phi[1][2] - m,
                  a.dofs[0] - phi[0][1] - phi[0][2] + m,
                  a.dofs[1] - phi[0][1] - phi[1][2] + m,
                  a.dofs[2] - phi[0][2] - phi[1][2] + m};
    if (*std::min_element(a.segments.begin(), a.segments.end()) < 0) {
        std::ostringstream msg;
        msg << "chi-square segment allocation infeasible: dofs (" << a.dofs[0] << ", " << a.dofs[1]
            << ", " << a.dofs[2] << "), shared (" << phi[0][1] << ", " << phi[0][2] << ", " << phi[1][2]
            << "), residual segments (" << a.segments[4] << ", " << a.segments[5] << ", "
            << a.segments[6] << ")";
        throw NumericalError(msg.str());
    }
}

ChiSquareApprox chi2_calibrate(const SampleSummary& s, const std::array<double, 3>& lambdas) {
    std::vector<ThetaEstimates> est;
    for (double l : lambdas) est.push_back(theta_estimates(s, l));
    for (const auto& t : est) {
        if (!(t.theta1 > 0.0) || !(t.theta2 > 0.0)) {
            throw NumericalError("theta estimates are not positive at lambda " + std::to_string(t.lambda));
        }
    }

    // Full 3x3 kernel including repeated lambdas (their entries are 1).
    Eigen::Matrix3d gamma = Eigen::Matrix3d::Identity();
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            gamma(i, j) = gamma(j, i) = kernel_entry(est[i], est[j], s.gamma_n);
        }
    }
    const Eigen::MatrixXd gamma_psd = psd_project(gamma);

    ChiSquareApprox out;
    const double p = s.p;
    Eigen::Vector3d d;
    for (int i = 0; i < 3; ++i) {
        out.lambdas[i] = lambdas[i];
        out.scales[i] = est[i].theta2 / est[i].theta1;
        out.centers[i] = p * est[i].theta1;
        out.spreads[i] = std::sqrt(2.0 * p * est[i].theta2);
        d[i] = std::sqrt(2.0 * p) * std::sqrt(est[i].theta2) / out.scales[i];
    }
    out.target = (d.asDiagonal() * gamma_psd * d.asDiagonal()).cwiseMax(0.0);

    chi2_allocate(out);
    return out;
}

double chi2_pvalue(const ChiSquareApprox& approx, const std::array<double, 3>& observed_rht, int draws,
                   std::uint64_t seed) {
    if (draws < 1) throw std::invalid_argument("draws must be positive");
    double observed = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        observed = std::max(observed, (observed_rht[i] - approx.centers[i]) / approx.spreads[i]);
    }

    const std::size_t total = static_cast<std::size_t>(draws);
    const std::size_t chunks = chunk_count(total);
    std::vector<std::size_t> exceed(chunks, 0);
    parallel_for(chunks, [&](std::size_t c) {
        Rng rng = Rng::derive(seed, c);
        std::array<std::chi_squared_distribution<double>, 7> dist;
        for (int s = 0; s < 7; ++s) {
            dist[s] = std::chi_squared_distribution<double>(std::max<long>(approx.segments[s], 1));
        }
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(total, begin + kChunk);
        std::size_t count = 0;
        for (std::size_t b = begin; b < end; ++b) {
            std::array<double, 3> q{0.0, 0.0, 0.0};
            for (int s = 0; s < 7; ++s) {
                if (approx.segments[s] == 0) continue;
                const double x = dist[s](rng);
                for (int i = 0; i < 3; ++i) {
                    if (ChiSquareApprox::kSegmentBlocks[s][i]) q[i] += x;
                }
            }
            double sim = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < 3; ++i) {
                sim = std::max(sim, (approx.scales[i] * q[i] - approx.centers[i]) / approx.spreads[i]);
            }
            if (sim > observed) ++count;
        }
        exceed[c] = count;
    });
    const std::size_t hits = std::accumulate(exceed.begin(), exceed.end(), std::size_t{0});
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> bootstrap_null_max(const KernelMatrix& kernel, int B, std::uint64_t seed) {
    if (B < 1) throw std::invalid_argument("bootstrap size must be positive");
    const Eigen::Index k = kernel.sqrt_psd.rows();
    if (k < 1 || kernel.sqrt_psd.cols() != k) throw std::invalid_argument("kernel has no square root");
    const std::size_t total = static_cast<std::size_t>(B);
    std::vector<double> out(total);
    parallel_for(chunk_count(total), [&](std::size_t c) {
        Rng rng = Rng::derive(seed, c);
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(k);
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(total, begin + kChunk);
        for (std::size_t b = begin; b < end; ++b) {
            for (Eigen::Index i = 0; i < k; ++i) z[i] = normal(rng);
            out[b] = (kernel.sqrt_psd * z).maxCoeff();
        }
    });
    return out;
}

double bootstrap_pvalue(const std::vector<double>& null_max, double statistic) {
    if (null_max.empty()) throw std::invalid_argument("empty bootstrap sample");
    const auto hits = std::count_if(null_max.begin(), null_max.end(), [statistic](double e) { return e > statistic; });
    return static_cast<double>(hits) / static_cast<double>(null_max.size());
}

TestResult arht_test(const SampleSummary& s, const ArhtOptions& opts) {
    opts.validate();
    TestResult r;
    r.calibration = opts.calibration;
    r.seed = opts.seed;
    r.grid = grid_for(s, opts);
    r.selection = select_lambda_set(s, opts.priors, r.grid);
    r.warnings = r.selection.warnings;

    const std::vector<ThetaEstimates> est = estimates_at(s, r.selection.lambdas);
    r.kernel = gamma_hat(est, s.gamma_n);
    for (const auto& w : r.kernel.warnings) r.warnings.push_back(w);
    r.per_lambda_stats = stats_at(s, est, opts.calibration);
    r.statistic = max_value(r.per_lambda_stats);

    if (opts.calibration == Calibration::chi2) {
        const std::array<double, 3> lambdas{r.selection.per_prior[0], r.selection.per_prior[1],
                                            r.selection.per_prior[2]};
        ChiSquareApprox approx = chi2_calibrate(s, lambdas);
        const std::array<double, 3> observed{rht(s, lambdas[0]), rht(s, lambdas[1]), rht(s, lambdas[2])};
        r.p_value = chi2_pvalue(approx, observed, opts.chi2_draws, opts.seed);
        r.chi2 = approx;
        r.method = PValueMethod::chi2;
        r.resamples = opts.chi2_draws;
    } else {
        r.p_value = bootstrap_pvalue(bootstrap_null_max(r.kernel, opts.bootstrap_B, opts.seed), r.statistic);
        r.method = PValueMethod::bootstrap;
        r.resamples = opts.bootstrap_B;
    }
    return r;
}

TestResult arht_test(const Dataset& data, const ArhtOptions& opts) {
    opts.validate();
    return arht_test(summarize(data), opts);
}

TestResult permutation_test(const Dataset& data, const ArhtOptions& opts) {
    opts.validate();
    if (!opts.permutations) throw std::invalid_argument("permutation count is not set");
    const SampleSummary observed_summary = summarize(data);

    TestResult r;
    r.calibration = opts.calibration;
    r.seed = opts.seed;
    r.grid = grid_for(observed_summary, opts);
    r.selection = select_lambda_set(observed_summary, opts.priors, r.grid);
    r.warnings = r.selection.warnings;
    const std::vector<ThetaEstimates> est = estimates_at(observed_summary, r.selection.lambdas);
    r.kernel = gamma_hat(est, observed_summary.gamma_n);
    for (const auto& w : r.kernel.warnings) r.warnings.push_back(w);
    r.per_lambda_stats = stats_at(observed_summary, est, opts.calibration);
    r.statistic = max_value(r.per_lambda_stats);

    const Eigen::Index n1 = data.n1();
    const Eigen::Index n = data.n1() + data.n2();
    Eigen::MatrixXd pooled(n, data.p());
    pooled.topRows(n1) = data.x1;
    pooled.bottomRows(data.n2()) = data.x2;

    const int n_perm = *opts.permutations;
    const std::vector<double>& lambdas = r.selection.lambdas;
    std::vector<char> at_least(static_cast<std::size_t>(n_perm), 0);
    parallel_for(static_cast<std::size_t>(n_perm), [&](std::size_t b) {
        Rng rng = Rng::derive(opts.seed ^ kPermutationStream, b);
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        const SampleSummary s = summarize(permuted(pooled, order, n1));
        const double stat = max_value(stats_at(s, estimates_at(s, lambdas), opts.calibration));
        at_least[b] = stat >= r.statistic ? 1 : 0;
    });
    const long count = std::count(at_least.begin(), at_least.end(), char{1});
    r.p_value = (1.0 + count) / (1.0 + n_perm);
    r.method = PValueMethod::permutation;
    r.resamples = n_perm;
    r.lambda_fixed_across_permutations = true;
    return r;
}

}  // namespace arht
