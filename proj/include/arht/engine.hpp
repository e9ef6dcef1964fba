#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arht/estimators.hpp"
#include "arht/selector.hpp"
#include "arht/spectral.hpp"
#include "arht/teststats.hpp"

namespace arht {

struct ArhtOptions {
    std::vector<PriorWeights> priors = PriorWeights::canonical();
    Calibration calibration = Calibration::cuberoot;
    int bootstrap_B = 10000;
    std::uint64_t seed = 0;
    int grid_points = 200;
    std::optional<int> permutations;
    int chi2_draws = 100000;
    /// Overrides the data-driven (lo, hi) search range when set.
    std::optional<std::pair<double, double>> lambda_range;

    void validate() const;
};

enum class PValueMethod { bootstrap, chi2, permutation };

std::string_view to_string(PValueMethod m);
PValueMethod pvalue_method_from_string(std::string_view name);

/// Scaled chi-square surrogate for three RHT statistics sharing degrees of
/// freedom through seven diagonal segments.
struct ChiSquareApprox {
    /// Segment s contributes to block i iff kSegmentBlocks[s][i].
    static constexpr bool kSegmentBlocks[7][3] = {
        {true, true, true},  {true, true, false}, {true, false, true}, {false, true, true},
        {true, false, false}, {false, true, false}, {false, false, true}};

    std::array<double, 3> lambdas{};
    std::array<double, 3> scales{};   // a_i = theta2 / theta1
    std::array<double, 3> centers{};  // p theta1, the mean of RHT(lambda_i)
    std::array<double, 3> spreads{};  // sqrt(2 p theta2)
    std::array<long, 3> dofs{};       // l_i
    Eigen::Matrix3d target = Eigen::Matrix3d::Zero();  // D Gamma+ D with negatives zeroed
    std::array<std::array<long, 3>, 3> shared{};       // phi_ij; diagonal equals dofs
    std::array<long, 7> segments{};

    /// Total number of ones on diagonal i.
    long block_dof(int i) const;
    /// Shared ones between diagonals i and j.
    long block_overlap(int i, int j) const;
};

/// Rounds target into shared degrees and the seven segment lengths. Throws
/// NumericalError if a residual segment would be negative.
void chi2_allocate(ChiSquareApprox& approx);

/// Builds the surrogate from three lambdas (repeats allowed). Throws
/// NumericalError with the offending residuals if a segment would be negative.
ChiSquareApprox chi2_calibrate(const SampleSummary& s, const std::array<double, 3>& lambdas);

/// Tail probability of max_i (a_i Q_i - center_i) / spread_i beyond the same
/// standardization of the observed RHT values, by simulating the segment construction.
double chi2_pvalue(const ChiSquareApprox& approx, const std::array<double, 3>& observed_rht,
                   int draws = 100000, std::uint64_t seed = 0);

/// B draws of max_i Z_i with Z ~ N_k(0, Gamma+), via the symmetric root of Gamma+.
std::vector<double> bootstrap_null_max(const KernelMatrix& kernel, int B, std::uint64_t seed);

/// Fraction of draws strictly above the statistic.
double bootstrap_pvalue(const std::vector<double>& null_max, double statistic);

struct TestResult {
    double statistic = 0.0;
    Calibration calibration = Calibration::cuberoot;
    LambdaGrid grid;
    LambdaSet selection;
    double p_value = 1.0;
    KernelMatrix kernel;
    std::vector<StatValue> per_lambda_stats;
    PValueMethod method = PValueMethod::bootstrap;
    std::uint64_t seed = 0;
    int resamples = 0;  // bootstrap draws, chi-square draws, or permutations
    bool lambda_fixed_across_permutations = false;
    std::optional<ChiSquareApprox> chi2;
    std::vector<std::string> warnings;
};

/// Composite test: select one lambda per prior, take the max of the
/// normalized statistics, calibrate by parametric bootstrap or chi-square surrogate.
TestResult arht_test(const Dataset& data, const ArhtOptions& opts);
TestResult arht_test(const SampleSummary& s, const ArhtOptions& opts);

/// Label-permutation p-value with the lambda set fixed from the observed data.
/// p = (1 + #{perm stat >= observed}) / (1 + n_perm).
TestResult permutation_test(const Dataset& data, const ArhtOptions& opts);

}  // namespace arht
