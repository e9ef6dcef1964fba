#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arht/engine.hpp"
#include "arht/rng.hpp"
#include "arht/spectral.hpp"

namespace arht {

enum class CovKind { identity, sparse_diag, dense_rotated };

struct CovModel {
    CovKind kind = CovKind::identity;
    int p = 0;
    std::uint64_t rotation_seed = 0;
    /// tau_j = 0.01 + (0.1 + j)^exponent before normalization to unit mean.
    double sparse_exponent = -1.0;
};

/// Sigma = R^T diag(eigenvalues) R; R is absent for diagonal models.
struct SigmaFactor {
    Eigen::VectorXd eigenvalues;
    std::optional<Eigen::MatrixXd> rotation;

    int p() const { return static_cast<int>(eigenvalues.size()); }
    /// Sigma^power applied to v (power may be fractional).
    Eigen::VectorXd apply_power(const Eigen::VectorXd& v, double power) const;
    /// Rows of z mapped through the symmetric square root, i.e. Z Sigma^{1/2}.
    Eigen::MatrixXd apply_sqrt_rows(const Eigen::MatrixXd& z) const;
    Eigen::MatrixXd dense() const;
    double trace_power(double power) const;
};

SigmaFactor make_sigma(const CovModel& model);

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of R's diagonal folded into Q.
Eigen::MatrixXd haar_orthogonal(int p, Rng& rng);

enum class MuKind { gauss_iso, gauss_sigma, gauss_sigma2, sparse_signed };

struct MuModel {
    MuKind kind = MuKind::gauss_iso;
    double c = 0.0;
};

/// round(0.05 p), the nonzero count of the sparse model.
int sparse_support(int p);

Eigen::VectorXd draw_mu(const MuModel& model, const SigmaFactor& sigma, Rng& rng);
double expected_mu_norm2(const MuModel& model, const SigmaFactor& sigma);
/// (sqrt(n) E||mu||^2)^{1/2}.
double signal_strength(const MuModel& model, const SigmaFactor& sigma, int n);

enum class NoiseKind { gaussian, scaled_t4 };

/// Sample 1 has mean 0 and sample 2 mean -mu, both with covariance Sigma.
Dataset draw_dataset(int n1, int n2, const Eigen::VectorXd& mu, const SigmaFactor& sigma, NoiseKind noise,
                     Rng& rng);

enum class Method { arht_raw, arht_cuberoot, arht_chi2, bs };

std::string_view to_string(CovKind k);
std::string_view to_string(MuKind k);
std::string_view to_string(NoiseKind k);
std::string_view to_string(Method m);
CovKind cov_kind_from_string(std::string_view s);
MuKind mu_kind_from_string(std::string_view s);
NoiseKind noise_kind_from_string(std::string_view s);
Method method_from_string(std::string_view s);

struct ExperimentConfig {
    CovModel cov;
    NoiseKind noise = NoiseKind::gaussian;
    int p = 200;
    int n1 = 50;
    int n2 = 50;
    double alpha = 0.05;
    int replicates = 2000;
    std::vector<Method> methods{Method::arht_cuberoot};
    std::uint64_t seed = 1;
    int bootstrap_B = 2000;
    int chi2_draws = 20000;
    int grid_points = 200;
    std::optional<std::pair<double, double>> lambda_range;
    std::vector<PriorWeights> priors = PriorWeights::canonical();
    // power curves only
    MuKind mu_kind = MuKind::gauss_iso;
    std::vector<double> c_grid;
    bool size_adjusted = false;

    void validate() const;
};

struct SizeResult {
    Method method = Method::arht_cuberoot;
    double empirical_size = 0.0;
    double mc_se = 0.0;
    int rejections = 0;
    int replicates = 0;  // successful replicates
    int failures = 0;    // replicates with degenerate estimates
};

/// Per-replicate statistic and p-value of one method.
struct MethodOutcome {
    bool ok = false;
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Evaluates every configured method on one dataset summary.
std::vector<MethodOutcome> evaluate_methods(const SampleSummary& s, const ExperimentConfig& cfg,
                                            std::uint64_t replicate_seed);

/// Null rejection rates at level alpha; all methods see the same datasets.
std::vector<SizeResult> run_size_experiment(const ExperimentConfig& cfg);

struct PowerPoint {
    double c = 0.0;
    double signal = 0.0;
    double power = 0.0;
    double mc_se = 0.0;
    int rejections = 0;
    int replicates = 0;
    int failures = 0;
};

struct PowerCurve {
    Method method = Method::arht_cuberoot;
    std::optional<double> cutoff;  // empirical null cut-off when size adjusted
    std::vector<PowerPoint> points;
};

/// Rejection rates along c_grid. Replicate r uses the same noise stream at
/// every c, so c = 0 reproduces the size experiment for the same seed.
std::vector<PowerCurve> run_power_curve(const ExperimentConfig& cfg);

}  // namespace arht
