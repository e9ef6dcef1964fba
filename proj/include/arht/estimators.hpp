#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arht/spectral.hpp"

namespace arht {

/// Plug-in Stieltjes quantities and the centering/variance functionals of
/// p^-1 RHT(lambda) at one lambda.
struct ThetaEstimates {
    double lambda = 0.0;
    double m_hat = 0.0;        // p^-1 tr (S + lambda I)^-1
    double m_prime_hat = 0.0;  // p^-1 tr (S + lambda I)^-2
    double theta1 = 0.0;
    double theta2 = 0.0;
    double phi1 = 0.0;         // p^-1 tr S
    // 1 - lambda m_hat, its lambda-derivative (negated), and 1 - gamma_n (1 - lambda m_hat).
    // Kept because several formulas are better conditioned in these terms.
    double shrink = 0.0;
    double shrink_slope = 0.0;
    double denom = 0.0;
};

/// theta1 = (1 - lambda m) / (1 - gamma (1 - lambda m)) and
/// theta2 = (1 - lambda m) / D^3 - lambda (m - lambda m') / D^4 with D the denominator of theta1.
/// theta2 is evaluated as (p^-1 sum delta^2/(delta+lambda)^2 - gamma (1 - lambda m)^2) / D^4,
/// which is the same quantity without the cancellation that appears for large lambda.
ThetaEstimates theta_estimates(const SampleSummary& s, double lambda);

/// Derivative of lambda * theta1(lambda).
double lambda_theta1_slope(const ThetaEstimates& t);

struct RhoEstimates {
    double rho0 = 0.0;
    double rho1 = 0.0;
    double rho2 = 0.0;
};

RhoEstimates rho_hat(const SampleSummary& s, double lambda);
RhoEstimates rho_hat(const ThetaEstimates& t, double gamma_n);

/// Weights of the alternative prior Var(mu) proportional to pi0 I + pi1 Sigma + pi2 Sigma^2.
class PriorWeights {
public:
    PriorWeights(double pi0, double pi1, double pi2);

    double pi0() const { return pi_[0]; }
    double pi1() const { return pi_[1]; }
    double pi2() const { return pi_[2]; }
    double operator[](int m) const { return pi_[m]; }

    double polynomial(double x) const { return pi_[0] + x * (pi_[1] + x * pi_[2]); }
    /// Checks pi0 + pi1 x + pi2 x^2 >= 0 on a 1000-point grid over [0, 1.01 * upper].
    bool nonnegative_on(double upper) const;

    PriorWeights scaled(double c) const { return {c * pi_[0], c * pi_[1], c * pi_[2]}; }
    PriorWeights operator+(const PriorWeights& o) const {
        return {pi_[0] + o.pi_[0], pi_[1] + o.pi_[1], pi_[2] + o.pi_[2]};
    }
    bool operator==(const PriorWeights& o) const = default;

    static std::vector<PriorWeights> canonical();

private:
    double pi_[3];
};

double q_hat_polynomial(const SampleSummary& s, double lambda, const PriorWeights& weights);
double q_hat_polynomial(const ThetaEstimates& t, double gamma_n, const PriorWeights& weights);

/// p^-1 tr((S + lambda I)^-1 B) for a fully specified prior covariance B,
/// computed with dense solves against the pooled covariance.
double q_hat_specified(const Eigen::MatrixXd& pooled_cov, double lambda, const Eigen::MatrixXd& b);
double q_hat_specified(const Dataset& data, double lambda, const Eigen::MatrixXd& b);

/// Local power objective q / sqrt(gamma_n theta2). Throws NumericalError if theta2 <= 0.
double q_objective(const SampleSummary& s, double lambda, const PriorWeights& weights);
double q_objective(const ThetaEstimates& t, double gamma_n, const PriorWeights& weights);

/// Limiting local power Phi(-xi_alpha + kappa (1 - kappa) q / sqrt(2 gamma theta2)).
double asymptotic_power(double q, double gamma, double kappa, double theta2, double alpha);

double normal_cdf(double x);
/// Upper alpha quantile of N(0, 1).
double normal_upper_quantile(double alpha);

/// Estimated covariance kernel of the normalized RHT process at a finite set
/// of lambdas, with its PSD projection and a symmetric square root of the
/// projection for sampling.
struct KernelMatrix {
    std::vector<double> lambdas;
    Eigen::MatrixXd gamma;
    Eigen::MatrixXd gamma_psd;
    Eigen::MatrixXd sqrt_psd;
    std::vector<std::string> warnings;

    Eigen::Index size() const { return static_cast<Eigen::Index>(lambdas.size()); }
};

/// Drops lambdas within 1e-6 (relative) of an earlier entry; order is preserved.
std::vector<double> dedup_lambdas(const std::vector<double>& lambdas);

/// Off-diagonal kernel entry. Symmetric in its arguments bit for bit; pairs
/// closer than 1e-4 relative use the analytic derivative of lambda * theta1.
double kernel_entry(const ThetaEstimates& a, const ThetaEstimates& b, double gamma_n);

KernelMatrix gamma_hat(const SampleSummary& s, const std::vector<double>& lambdas);

/// Kernel from the given (already validated) estimates, one per lambda.
KernelMatrix gamma_hat(const std::vector<ThetaEstimates>& estimates, double gamma_n);

struct PsdProjection {
    Eigen::MatrixXd matrix;
    Eigen::MatrixXd sqrt_factor;  // symmetric, sqrt_factor^2 == matrix
};

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues set to zero.
PsdProjection psd_project_with_root(const Eigen::MatrixXd& m);
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& m);

}  // namespace arht
