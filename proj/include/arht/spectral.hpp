#pragma once

#include <Eigen/Dense>

namespace arht {

/// Two independent samples; rows are observations, columns are variables.
struct Dataset {
    Eigen::MatrixXd x1;
    Eigen::MatrixXd x2;

    Eigen::Index n1() const { return x1.rows(); }
    Eigen::Index n2() const { return x2.rows(); }
    Eigen::Index p() const { return x1.cols(); }

    /// Throws DataError unless both samples have >= 2 rows, equal column
    /// counts >= 1, and only finite entries.
    void validate() const;
};

/// Spectral sufficient statistics of a two-sample dataset. Every
/// lambda-dependent quantity downstream is a function of (eigenvalues, w).
struct SampleSummary {
    int n1 = 0;
    int n2 = 0;
    int p = 0;
    double gamma_n = 0.0;          // p / (n1 + n2)
    Eigen::VectorXd eigenvalues;   // pooled covariance spectrum, nonincreasing, >= 0
    Eigen::VectorXd w;             // mean difference in the eigenbasis
    double trace_s = 0.0;          // p^-1 * sum of eigenvalues

    int n() const { return n1 + n2; }
    double top_eigenvalue() const { return eigenvalues.size() ? eigenvalues[0] : 0.0; }
    /// n1 n2 / (n1 + n2)
    double size_factor() const { return static_cast<double>(n1) * n2 / n(); }
};

/// Pooled within-group covariance with divisor n - 2 (two-pass centering).
Eigen::MatrixXd pooled_covariance(const Dataset& data);

/// Eigendecomposes the pooled covariance and rotates the mean difference into
/// its eigenbasis. For p > n the n x n Gram matrix is decomposed instead and the
/// component of the mean difference orthogonal to the sample span is carried on
/// a zero eigenvalue, which leaves every resolvent quantity unchanged.
SampleSummary summarize(const Dataset& data);

/// Builds a summary from a precomputed spectrum, mainly for tests and tools.
SampleSummary make_summary(int n1, int n2, Eigen::VectorXd eigenvalues, Eigen::VectorXd w);

/// p^-1 sum_i (delta_i + lambda)^-(k+1).
///
/// k = 0 is the empirical Stieltjes transform m(-lambda); k = 1 its derivative
/// m'(-lambda) = p^-1 tr (S + lambda I)^-2. In general this is the k-th
/// derivative of m at -lambda divided by k!.
double resolvent_moment(const SampleSummary& s, double lambda, int k);

/// Ridge-regularized Hotelling statistic (n1 n2 / n) d^T (S + lambda I)^-1 d.
double rht(const SampleSummary& s, double lambda);

}  // namespace arht
