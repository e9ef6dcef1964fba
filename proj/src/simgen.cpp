#include "arht/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "arht/error.hpp"
#include "arht/parallel.hpp"

namespace arht {

namespace {

constexpr std::uint64_t kMuStream = 0x6d752d73747265ULL;
constexpr std::uint64_t kBootStream = 0x626f6f74737472ULL;

template <typename Enum, std::size_t N>
Enum lookup(std::string_view s, const std::pair<std::string_view, Enum> (&table)[N], const char* what) {
    for (const auto& [name, value] : table) {
        if (name == s) return value;
    }
    throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <typename Enum, std::size_t N>
std::string_view name_of(Enum e, const std::pair<std::string_view, Enum> (&table)[N]) {
    for (const auto& [name, value] : table) {
        if (value == e) return name;
    }
    return "unknown";
}

constexpr std::pair<std::string_view, CovKind> kCovNames[] = {
    {"identity", CovKind::identity}, {"sparse_diag", CovKind::sparse_diag}, {"dense_rotated", CovKind::dense_rotated}};
constexpr std::pair<std::string_view, MuKind> kMuNames[] = {{"gauss_iso", MuKind::gauss_iso},
                                                            {"gauss_sigma", MuKind::gauss_sigma},
                                                            {"gauss_sigma2", MuKind::gauss_sigma2},
                                                            {"sparse_signed", MuKind::sparse_signed}};
constexpr std::pair<std::string_view, NoiseKind> kNoiseNames[] = {{"gaussian", NoiseKind::gaussian},
                                                                  {"scaled_t4", NoiseKind::scaled_t4}};
constexpr std::pair<std::string_view, Method> kMethodNames[] = {{"arht_raw", Method::arht_raw},
                                                                {"arht_cuberoot", Method::arht_cuberoot},
                                                                {"arht_chi2", Method::arht_chi2},
                                                                {"bs", Method::bs}};

Eigen::MatrixXd noise_matrix(int rows, int cols, NoiseKind kind, Rng& rng) {
    Eigen::MatrixXd z(rows, cols);
    if (kind == NoiseKind::gaussian) {
        std::normal_distribution<double> normal;
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) z(i, j) = normal(rng);
    } else {
        std::student_t_distribution<double> t4(4.0);
        const double unit = 1.0 / std::sqrt(2.0);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) z(i, j) = t4(rng) * unit;
    }
    return z;
}

double rejection_se(double rate, int n) { return n > 0 ? std::sqrt(rate * (1.0 - rate) / n) : 0.0; }

// Upper (1 - alpha) empirical quantile: smallest value exceeded by at most alpha * n values.
double empirical_cutoff(std::vector<double> values, double alpha) {
    if (values.empty()) throw NumericalError("no successful null replicates for the size-adjusted cut-off");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const std::size_t allowed = static_cast<std::size_t>(std::floor(alpha * n));
    return values[n - 1 - std::min(allowed, n - 1)];
}

}  // namespace

std::string_view to_string(CovKind k) { return name_of(k, kCovNames); }
std::string_view to_string(MuKind k) { return name_of(k, kMuNames); }
std::string_view to_string(NoiseKind k) { return name_of(k, kNoiseNames); }
std::string_view to_string(Method m) { return name_of(m, kMethodNames); }
CovKind cov_kind_from_string(std::string_view s) { return lookup(s, kCovNames, "covariance model"); }
MuKind mu_kind_from_string(std::string_view s) { return lookup(s, kMuNames, "mean model"); }
NoiseKind noise_kind_from_string(std::string_view s) { return lookup(s, kNoiseNames, "noise model"); }
Method method_from_string(std::string_view s) {
    if (s == "arht") return Method::arht_raw;
    return lookup(s, kMethodNames, "method");
}

Eigen::VectorXd SigmaFactor::apply_power(const Eigen::VectorXd& v, double power) const {
    const Eigen::VectorXd scale = eigenvalues.array().pow(power).matrix();
    if (!rotation) return scale.cwiseProduct(v);
    const Eigen::MatrixXd& r = *rotation;
    return r.transpose() * scale.cwiseProduct(r * v);
}

Eigen::MatrixXd SigmaFactor::apply_sqrt_rows(const Eigen::MatrixXd& z) const {
    const Eigen::VectorXd root = eigenvalues.cwiseSqrt();
    if (!rotation) return z * root.asDiagonal();
    const Eigen::MatrixXd& r = *rotation;
    // Z Sigma^{1/2} with Sigma^{1/2} = R^T diag(root) R symmetric
    return ((z * r.transpose()) * root.asDiagonal()) * r;
}

Eigen::MatrixXd SigmaFactor::dense() const {
    if (!rotation) return eigenvalues.asDiagonal();
    const Eigen::MatrixXd& r = *rotation;
    return r.transpose() * eigenvalues.asDiagonal() * r;
}

double SigmaFactor::trace_power(double power) const { return eigenvalues.array().pow(power).sum(); }

Eigen::MatrixXd haar_orthogonal(int p, Rng& rng) {
    if (p < 1) throw std::invalid_argument("dimension must be >= 1");
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
    const Eigen::MatrixXd& r = qr.matrixQR();
    for (int j = 0; j < p; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

SigmaFactor make_sigma(const CovModel& model) {
    if (model.p < 1) throw std::invalid_argument("dimension must be >= 1");
    SigmaFactor f;
    if (model.kind == CovKind::identity) {
        f.eigenvalues = Eigen::VectorXd::Ones(model.p);
        return f;
    }
    f.eigenvalues.resize(model.p);
    for (int j = 1; j <= model.p; ++j) {
        f.eigenvalues[j - 1] = 0.01 + std::pow(0.1 + j, model.sparse_exponent);
    }
    f.eigenvalues /= f.eigenvalues.mean();
    if (model.kind == CovKind::dense_rotated) {
        Rng rng(model.rotation_seed);
        f.rotation = haar_orthogonal(model.p, rng);
    }
    return f;
}

int sparse_support(int p) { return static_cast<int>(std::lround(0.05 * p)); }

Eigen::VectorXd draw_mu(const MuModel& model, const SigmaFactor& sigma, Rng& rng) {
    if (!(model.c >= 0.0)) throw std::invalid_argument("signal scale c must be >= 0");
    const int p = sigma.p();
    if (model.c == 0.0) return Eigen::VectorXd::Zero(p);
    if (model.kind == MuKind::sparse_signed) {
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
        std::vector<int> idx(static_cast<std::size_t>(p));
        std::iota(idx.begin(), idx.end(), 0);
        const int k = sparse_support(p);
        for (int i = 0; i < k; ++i) {
            std::uniform_int_distribution<int> pick(i, p - 1);
            std::swap(idx[i], idx[pick(rng)]);
            const bool positive = std::bernoulli_distribution(0.5)(rng);
            mu[idx[i]] = positive ? model.c : -model.c;
        }
        return mu;
    }
    std::normal_distribution<double> normal;
    Eigen::VectorXd xi(p);
    for (int i = 0; i < p; ++i) xi[i] = normal(rng);
    const double root_c = std::sqrt(model.c);
    switch (model.kind) {
        case MuKind::gauss_iso: return root_c * xi;
        case MuKind::gauss_sigma: return root_c * sigma.apply_power(xi, 0.5);
        case MuKind::gauss_sigma2: return root_c * sigma.apply_power(xi, 1.0);
        case MuKind::sparse_signed: break;
    }
    return xi;
}

double expected_mu_norm2(const MuModel& model, const SigmaFactor& sigma) {
    switch (model.kind) {
        case MuKind::gauss_iso: return model.c * sigma.p();
        case MuKind::gauss_sigma: return model.c * sigma.trace_power(1.0);
        case MuKind::gauss_sigma2: return model.c * sigma.trace_power(2.0);
        case MuKind::sparse_signed: return sparse_support(sigma.p()) * model.c * model.c;
    }
    return 0.0;
}

double signal_strength(const MuModel& model, const SigmaFactor& sigma, int n) {
    return std::sqrt(std::sqrt(static_cast<double>(n)) * expected_mu_norm2(model, sigma));
}

Dataset draw_dataset(int n1, int n2, const Eigen::VectorXd& mu, const SigmaFactor& sigma, NoiseKind noise,
                     Rng& rng) {
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("sample sizes must be >= 2");
    const int p = sigma.p();
    if (mu.size() != p) throw std::invalid_argument("mean vector has the wrong dimension");
    Dataset d;
    d.x1 = sigma.apply_sqrt_rows(noise_matrix(n1, p, noise, rng));
    d.x2 = sigma.apply_sqrt_rows(noise_matrix(n2, p, noise, rng));
    d.x2.rowwise() -= mu.transpose();
    return d;
}

void ExperimentConfig::validate() const {
    if (p < 1) throw std::invalid_argument("p must be >= 1");
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("sample sizes must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
    if (replicates < 100) throw std::invalid_argument("replicates must be >= 100");
    if (methods.empty()) throw std::invalid_argument("at least one method is required");
    for (double c : c_grid) {
        if (!(c >= 0.0)) throw std::invalid_argument("c_grid entries must be >= 0");
    }
}

std::vector<MethodOutcome> evaluate_methods(const SampleSummary& s, const ExperimentConfig& cfg,
                                            std::uint64_t replicate_seed) {
    std::vector<MethodOutcome> out(cfg.methods.size());
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        try {
            if (cfg.methods[m] == Method::bs) {
                const double v = bs_stat(s).value;
                out[m] = {true, v, 1.0 - normal_cdf(v)};
                continue;
            }
            ArhtOptions opts;
            opts.priors = cfg.priors;
            opts.bootstrap_B = cfg.bootstrap_B;
            opts.chi2_draws = cfg.chi2_draws;
            opts.grid_points = cfg.grid_points;
            opts.lambda_range = cfg.lambda_range;
            opts.seed = replicate_seed;
            opts.calibration = cfg.methods[m] == Method::arht_raw      ? Calibration::raw
                               : cfg.methods[m] == Method::arht_chi2 ? Calibration::chi2
                                                                      : Calibration::cuberoot;
            const TestResult r = arht_test(s, opts);
            out[m] = {true, r.statistic, r.p_value};
        } catch (const NumericalError&) {
            out[m] = {};
        }
    }
    return out;
}

namespace {

// outcomes[r][m] for replicates r at signal scale c (c = 0: null).
std::vector<std::vector<MethodOutcome>> simulate(const ExperimentConfig& cfg, const SigmaFactor& sigma, double c) {
    const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
    std::vector<std::vector<MethodOutcome>> outcomes(reps);
    const MuModel mu_model{cfg.mu_kind, c};
    parallel_for(reps, [&](std::size_t r) {
        Rng data_rng = Rng::derive(cfg.seed, r);
        Rng mu_rng = Rng::derive(cfg.seed ^ kMuStream, r);
        const Eigen::VectorXd mu = draw_mu(mu_model, sigma, mu_rng);
        const Dataset d = draw_dataset(cfg.n1, cfg.n2, mu, sigma, cfg.noise, data_rng);
        outcomes[r] = evaluate_methods(summarize(d), cfg, Rng::derive_seed(cfg.seed ^ kBootStream, r));
    });
    return outcomes;
}

SigmaFactor sigma_for(const ExperimentConfig& cfg) {
    CovModel cov = cfg.cov;
    cov.p = cfg.p;
    return make_sigma(cov);
}

}  // namespace

std::vector<SizeResult> run_size_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const SigmaFactor sigma = sigma_for(cfg);
    const auto outcomes = simulate(cfg, sigma, 0.0);
    std::vector<SizeResult> results;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        SizeResult res;
        res.method = cfg.methods[m];
        for (const auto& rep : outcomes) {
            if (!rep[m].ok) {
                ++res.failures;
                continue;
            }
            ++res.replicates;
            if (rep[m].p_value <= cfg.alpha) ++res.rejections;
        }
        res.empirical_size = res.replicates ? static_cast<double>(res.rejections) / res.replicates : 0.0;
        res.mc_se = rejection_se(res.empirical_size, res.replicates);
        results.push_back(res);
    }
    return results;
}

std::vector<PowerCurve> run_power_curve(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.c_grid.empty()) throw std::invalid_argument("c_grid must not be empty");
    const SigmaFactor sigma = sigma_for(cfg);
    const int n = cfg.n1 + cfg.n2;

    std::vector<PowerCurve> curves(cfg.methods.size());
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) curves[m].method = cfg.methods[m];

    if (cfg.size_adjusted) {
        const auto null_outcomes = simulate(cfg, sigma, 0.0);
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            std::vector<double> stats;
            for (const auto& rep : null_outcomes) {
                if (rep[m].ok) stats.push_back(rep[m].statistic);
            }
            curves[m].cutoff = empirical_cutoff(std::move(stats), cfg.alpha);
        }
    }

    for (double c : cfg.c_grid) {
        const auto outcomes = simulate(cfg, sigma, c);
        const double signal = signal_strength(MuModel{cfg.mu_kind, c}, sigma, n);
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            PowerPoint pt;
            pt.c = c;
            pt.signal = signal;
            for (const auto& rep : outcomes) {
                if (!rep[m].ok) {
                    ++pt.failures;
                    continue;
                }
                ++pt.replicates;
                const bool reject = curves[m].cutoff ? rep[m].statistic > *curves[m].cutoff
                                                     : rep[m].p_value <= cfg.alpha;
                if (reject) ++pt.rejections;
            }
            pt.power = pt.replicates ? static_cast<double>(pt.rejections) / pt.replicates : 0.0;
            pt.mc_se = rejection_se(pt.power, pt.replicates);
            curves[m].points.push_back(pt);
        }
    }
    return curves;
}

}  // namespace arht
