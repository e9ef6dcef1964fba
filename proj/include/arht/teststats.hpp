#pragma once

#include <limits>
#include <string_view>

#include "arht/estimators.hpp"
#include "arht/spectral.hpp"

namespace arht {

enum class Calibration { raw, cuberoot, chi2 };

std::string_view to_string(Calibration c);
Calibration calibration_from_string(std::string_view name);

/// One normalized statistic. lambda is +infinity for the Bai-Saranadasa limit.
struct StatValue {
    double lambda = 0.0;
    double value = 0.0;
    Calibration calibration = Calibration::raw;

    bool is_limit() const { return lambda == std::numeric_limits<double>::infinity(); }
};

/// sqrt(p) (RHT/p - theta1) / sqrt(2 theta2).
StatValue t_stat(const SampleSummary& s, double lambda);
StatValue t_stat(const SampleSummary& s, const ThetaEstimates& t);

/// Delta-method cube-root version of t_stat.
StatValue t_stat_cuberoot(const SampleSummary& s, double lambda);
StatValue t_stat_cuberoot(const SampleSummary& s, const ThetaEstimates& t);

StatValue calibrated_stat(const SampleSummary& s, const ThetaEstimates& t, Calibration c);

/// Reference lambda for the large-lambda limit: 10^4 * max(delta_1, trace_s).
double bs_reference_lambda(const SampleSummary& s);

/// Bai-Saranadasa statistic as the stabilized lambda -> infinity limit of
/// t_stat. Throws NumericalError if t_stat at 10^4 M and 10^5 M differ by more than
/// 1e-3 * max(1, |t|).
StatValue bs_stat(const SampleSummary& s);

}  // namespace arht
