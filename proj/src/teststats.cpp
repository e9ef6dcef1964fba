#include "arht/teststats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "arht/error.hpp"

namespace arht {

std::string_view to_string(Calibration c) {
    switch (c) {
        case Calibration::raw: return "raw";
        case Calibration::cuberoot: return "cuberoot";
        case Calibration::chi2: return "chi2";
    }
    return "unknown";
}

Calibration calibration_from_string(std::string_view name) {
    if (name == "raw") return Calibration::raw;
    if (name == "cuberoot") return Calibration::cuberoot;
    if (name == "chi2") return Calibration::chi2;
    throw std::invalid_argument("unknown calibration '" + std::string(name) + "'");
}

namespace {

void require_theta2(const ThetaEstimates& t) {
    if (!(t.theta2 > 0.0)) {
        throw NumericalError("theta2 estimate is not positive at lambda " + std::to_string(t.lambda));
    }
}

}  // namespace

StatValue t_stat(const SampleSummary& s, const ThetaEstimates& t) {
    require_theta2(t);
    const double p = s.p;
    const double value = std::sqrt(p) * (rht(s, t.lambda) / p - t.theta1) / std::sqrt(2.0 * t.theta2);
    return {t.lambda, value, Calibration::raw};
}

StatValue t_stat(const SampleSummary& s, double lambda) { return t_stat(s, theta_estimates(s, lambda)); }

StatValue t_stat_cuberoot(const SampleSummary& s, const ThetaEstimates& t) {
    require_theta2(t);
    if (!(t.theta1 > 0.0)) {
        throw NumericalError("theta1 estimate is not positive at lambda " + std::to_string(t.lambda));
    }
    const double p = s.p;
    const double scaled = rht(s, t.lambda) / p;
    const double spread = (std::sqrt(2.0) / 3.0) * std::sqrt(t.theta2) / std::cbrt(t.theta1 * t.theta1);
    const double value = std::sqrt(p) * (std::cbrt(scaled) - std::cbrt(t.theta1)) / spread;
    return {t.lambda, value, Calibration::cuberoot};
}

StatValue t_stat_cuberoot(const SampleSummary& s, double lambda) {
    return t_stat_cuberoot(s, theta_estimates(s, lambda));
}

StatValue calibrated_stat(const SampleSummary& s, const ThetaEstimates& t, Calibration c) {
    // chi2 mode keeps the raw statistic and only changes the reference distribution
    return c == Calibration::cuberoot ? t_stat_cuberoot(s, t) : t_stat(s, t);
}

double bs_reference_lambda(const SampleSummary& s) {
    const double m = std::max(s.top_eigenvalue(), s.trace_s);
    if (!(m > 0.0)) throw NumericalError("all-zero spectrum has no large-lambda limit");
    return 1e4 * m;
}

StatValue bs_stat(const SampleSummary& s) {
    const double lambda = bs_reference_lambda(s);
    const double near = t_stat(s, lambda).value;
    const double far = t_stat(s, 10.0 * lambda).value;
    if (!(std::abs(near - far) <= 1e-3 * std::max(1.0, std::abs(near)))) {
        throw NumericalError("large-lambda limit is unstable: " + std::to_string(near) + " vs " +
                             std::to_string(far));
    }
    return {std::numeric_limits<double>::infinity(), near, Calibration::raw};
}

}  // namespace arht
