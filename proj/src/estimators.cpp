#include "arht/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "arht/error.hpp"

namespace arht {

namespace {

constexpr double kNearDiagonal = 1e-4;
constexpr double kDedupRelative = 1e-6;

void require_positive_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be positive and finite");
    }
}

}  // namespace

ThetaEstimates theta_estimates(const SampleSummary& s, double lambda) {
    require_positive_lambda(lambda);
    double m = 0.0, m2 = 0.0, a = 0.0, b = 0.0, c = 0.0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        const double d = s.eigenvalues[i];
        const double r = 1.0 / (d + lambda);
        const double dr = d * r;
        m += r;
        m2 += r * r;
        a += dr;
        b += dr * r;
        c += dr * dr;
    }
    const double inv_p = 1.0 / s.p;
    ThetaEstimates t;
    t.lambda = lambda;
    t.m_hat = m * inv_p;
    t.m_prime_hat = m2 * inv_p;
    t.shrink = a * inv_p;
    t.shrink_slope = b * inv_p;
    t.phi1 = s.trace_s;
    t.denom = 1.0 - s.gamma_n * t.shrink;
    if (!(t.denom > 0.0)) {
        throw NumericalError("degenerate spectrum: 1 - gamma (1 - lambda m) <= 0 at lambda " +
                             std::to_string(lambda));
    }
    t.theta1 = t.shrink / t.denom;
    const double d2 = t.denom * t.denom;
    t.theta2 = (c * inv_p - s.gamma_n * t.shrink * t.shrink) / (d2 * d2);
    return t;
}

double lambda_theta1_slope(const ThetaEstimates& t) {
    return t.theta1 - t.lambda * t.shrink_slope / (t.denom * t.denom);
}

RhoEstimates rho_hat(const ThetaEstimates& t, double gamma_n) {
    RhoEstimates r;
    r.rho0 = t.m_hat;
    r.rho1 = t.theta1;
    r.rho2 = (1.0 + gamma_n * t.theta1) * (t.phi1 - t.lambda * t.theta1);
    return r;
}

RhoEstimates rho_hat(const SampleSummary& s, double lambda) {
    return rho_hat(theta_estimates(s, lambda), s.gamma_n);
}

PriorWeights::PriorWeights(double pi0, double pi1, double pi2) : pi_{pi0, pi1, pi2} {
    if (!std::isfinite(pi0) || !std::isfinite(pi1) || !std::isfinite(pi2)) {
        throw std::invalid_argument("prior weights must be finite");
    }
    if (pi0 == 0.0 && pi1 == 0.0 && pi2 == 0.0) {
        throw std::invalid_argument("prior weights must not all be zero");
    }
}

bool PriorWeights::nonnegative_on(double upper) const {
    constexpr int kPoints = 1000;
    const double hi = 1.01 * std::max(upper, 0.0);
    for (int i = 0; i < kPoints; ++i) {
        const double x = hi * i / (kPoints - 1);
        if (polynomial(x) < 0.0) return false;
    }
    return true;
}

std::vector<PriorWeights> PriorWeights::canonical() {
    return {PriorWeights(1, 0, 0), PriorWeights(0, 1, 0), PriorWeights(0, 0, 1)};
}

double q_hat_polynomial(const ThetaEstimates& t, double gamma_n, const PriorWeights& weights) {
    const RhoEstimates r = rho_hat(t, gamma_n);
    return weights.pi0() * r.rho0 + weights.pi1() * r.rho1 + weights.pi2() * r.rho2;
}

double q_hat_polynomial(const SampleSummary& s, double lambda, const PriorWeights& weights) {
    return q_hat_polynomial(theta_estimates(s, lambda), s.gamma_n, weights);
}

double q_hat_specified(const Eigen::MatrixXd& pooled_cov, double lambda, const Eigen::MatrixXd& b) {
    require_positive_lambda(lambda);
    const Eigen::Index p = pooled_cov.rows();
    if (pooled_cov.cols() != p || b.rows() != p || b.cols() != p) {
        throw std::invalid_argument("prior covariance must be p x p");
    }
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw std::invalid_argument("prior covariance must be symmetric");
    }
    Eigen::MatrixXd regularized = pooled_cov;
    regularized.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(regularized);
    if (llt.info() != Eigen::Success) throw NumericalError("S + lambda I is not positive definite");
    return llt.solve(b).trace() / static_cast<double>(p);
}

double q_hat_specified(const Dataset& data, double lambda, const Eigen::MatrixXd& b) {
    return q_hat_specified(pooled_covariance(data), lambda, b);
}

double q_objective(const ThetaEstimates& t, double gamma_n, const PriorWeights& weights) {
    if (!(t.theta2 > 0.0)) {
        throw NumericalError("theta2 estimate is not positive at lambda " + std::to_string(t.lambda));
    }
    return q_hat_polynomial(t, gamma_n, weights) / std::sqrt(gamma_n * t.theta2);
}

double q_objective(const SampleSummary& s, double lambda, const PriorWeights& weights) {
    return q_objective(theta_estimates(s, lambda), s.gamma_n, weights);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_upper_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
    return boost::math::quantile(boost::math::complement(boost::math::normal(), alpha));
}

double asymptotic_power(double q, double gamma, double kappa, double theta2, double alpha) {
    if (!(theta2 > 0.0)) throw std::invalid_argument("theta2 must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must be in (0, 1)");
    const double shift = kappa * (1.0 - kappa) * q / std::sqrt(2.0 * gamma * theta2);
    return normal_cdf(-normal_upper_quantile(alpha) + shift);
}

std::vector<double> dedup_lambdas(const std::vector<double>& lambdas) {
    std::vector<double> out;
    for (double l : lambdas) {
        require_positive_lambda(l);
        bool duplicate = std::any_of(out.begin(), out.end(), [l](double kept) {
            return std::abs(kept - l) <= kDedupRelative * std::max(kept, l);
        });
        if (!duplicate) out.push_back(l);
    }
    return out;
}

double kernel_entry(const ThetaEstimates& a, const ThetaEstimates& b, double gamma_n) {
    const ThetaEstimates& lo = a.lambda <= b.lambda ? a : b;
    const ThetaEstimates& hi = a.lambda <= b.lambda ? b : a;
    double quotient;
    if (hi.lambda - lo.lambda < kNearDiagonal * lo.lambda) {
        quotient = 0.5 * (lambda_theta1_slope(lo) + lambda_theta1_slope(hi));
    } else {
        quotient = (hi.lambda * hi.theta1 - lo.lambda * lo.theta1) / (hi.lambda - lo.lambda);
    }
    return (1.0 + gamma_n * lo.theta1) * (1.0 + gamma_n * hi.theta1) * quotient /
           std::sqrt(lo.theta2 * hi.theta2);
}

KernelMatrix gamma_hat(const std::vector<ThetaEstimates>& estimates, double gamma_n) {
    if (estimates.empty()) throw std::invalid_argument("kernel needs at least one lambda");
    const Eigen::Index k = static_cast<Eigen::Index>(estimates.size());
    KernelMatrix km;
    km.gamma = Eigen::MatrixXd::Identity(k, k);
    for (const auto& t : estimates) {
        if (!(t.theta2 > 0.0)) {
            throw NumericalError("theta2 estimate is not positive at lambda " + std::to_string(t.lambda));
        }
        km.lambdas.push_back(t.lambda);
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double g = kernel_entry(estimates[i], estimates[j], gamma_n);
            km.gamma(i, j) = g;
            km.gamma(j, i) = g;
            if (!(g > -1e-8 && g <= 1.0 + 1e-8)) {
                std::ostringstream msg;
                msg << "kernel entry (" << estimates[i].lambda << ", " << estimates[j].lambda
                    << ") = " << g << " outside (0, 1]";
                km.warnings.push_back(msg.str());
            }
        }
    }
    PsdProjection proj = psd_project_with_root(km.gamma);
    km.gamma_psd = std::move(proj.matrix);
    km.sqrt_psd = std::move(proj.sqrt_factor);
    return km;
}

KernelMatrix gamma_hat(const SampleSummary& s, const std::vector<double>& lambdas) {
    const std::vector<double> distinct = dedup_lambdas(lambdas);
    if (distinct.empty()) throw std::invalid_argument("kernel needs at least one lambda");
    std::vector<ThetaEstimates> estimates;
    estimates.reserve(distinct.size());
    for (double l : distinct) estimates.push_back(theta_estimates(s, l));
    return gamma_hat(estimates, s.gamma_n);
}

PsdProjection psd_project_with_root(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix must be square");
    if (!m.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw std::invalid_argument("matrix must be symmetric");
    }
    const Eigen::MatrixXd sym = (m + m.transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const Eigen::VectorXd ev = solver.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd& v = solver.eigenvectors();
    PsdProjection out;
    out.matrix = v * ev.asDiagonal() * v.transpose();
    out.matrix = (out.matrix + out.matrix.transpose()).eval() * 0.5;
    out.sqrt_factor = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
    out.sqrt_factor = (out.sqrt_factor + out.sqrt_factor.transpose()).eval() * 0.5;
    return out;
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& m) { return psd_project_with_root(m).matrix; }

}  // namespace arht
