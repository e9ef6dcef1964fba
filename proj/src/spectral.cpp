#include "arht/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "arht/error.hpp"

namespace arht {

namespace {

constexpr double kClipRelative = 1e-10;
constexpr double kNegativeRelative = 1e-6;

Eigen::MatrixXd centered_stack(const Dataset& data) {
    const Eigen::RowVectorXd mean1 = data.x1.colwise().mean();
    const Eigen::RowVectorXd mean2 = data.x2.colwise().mean();
    Eigen::MatrixXd xc(data.n1() + data.n2(), data.p());
    xc.topRows(data.n1()) = data.x1.rowwise() - mean1;
    xc.bottomRows(data.n2()) = data.x2.rowwise() - mean2;
    return xc;
}

// Ascending solver output -> nonincreasing, validated and clipped.
Eigen::VectorXd clip_spectrum(const Eigen::VectorXd& ascending) {
    const Eigen::Index k = ascending.size();
    Eigen::VectorXd out = ascending.reverse();
    const double top = k ? std::max(out[0], 0.0) : 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (out[i] < -kNegativeRelative * top) {
            throw NumericalError("pooled covariance has eigenvalue " + std::to_string(out[i]) +
                                 " well below zero");
        }
        if (out[i] <= kClipRelative * top) out[i] = 0.0;
    }
    return out;
}

}  // namespace

void Dataset::validate() const {
    if (x1.rows() < 2 || x2.rows() < 2) {
        throw DataError("each sample needs at least 2 observations (got " + std::to_string(x1.rows()) +
                        " and " + std::to_string(x2.rows()) + ")");
    }
    if (x1.cols() != x2.cols()) {
        throw DataError("samples have different dimensions: " + std::to_string(x1.cols()) + " vs " +
                        std::to_string(x2.cols()));
    }
    if (x1.cols() < 1) throw DataError("samples have no variables");
    if (!x1.allFinite() || !x2.allFinite()) throw DataError("data contains non-finite values");
}

Eigen::MatrixXd pooled_covariance(const Dataset& data) {
    data.validate();
    const Eigen::MatrixXd xc = centered_stack(data);
    const double divisor = static_cast<double>(data.n1() + data.n2() - 2);
    Eigen::MatrixXd s = (xc.transpose() * xc) / divisor;
    return (s + s.transpose()) * 0.5;
}

SampleSummary summarize(const Dataset& data) {
    data.validate();
    const Eigen::Index n = data.n1() + data.n2();
    const Eigen::Index p = data.p();
    const double divisor = static_cast<double>(n - 2);
    const Eigen::VectorXd diff =
        (data.x1.colwise().mean() - data.x2.colwise().mean()).transpose();
    const Eigen::MatrixXd xc = centered_stack(data);

    Eigen::VectorXd eigenvalues;
    Eigen::VectorXd w;

    if (p <= n) {
        Eigen::MatrixXd s = (xc.transpose() * xc) / divisor;
        s = (s + s.transpose()) * 0.5;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
        if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
        eigenvalues = clip_spectrum(solver.eigenvalues());
        w = (solver.eigenvectors().transpose() * diff).reverse();
    } else {
        Eigen::MatrixXd gram = (xc * xc.transpose()) / divisor;
        gram = (gram + gram.transpose()) * 0.5;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
        const Eigen::VectorXd spectrum = clip_spectrum(solver.eigenvalues());
        const Eigen::MatrixXd u = solver.eigenvectors().rowwise().reverse();

        eigenvalues = Eigen::VectorXd::Zero(p);
        w = Eigen::VectorXd::Zero(p);
        Eigen::VectorXd residual = diff;
        Eigen::Index rank = 0;
        while (rank < n && spectrum[rank] > 0.0) ++rank;
        if (rank > 0) {
            // right singular vectors of xc / sqrt(n - 2) for the nonzero spectrum
            Eigen::MatrixXd v = xc.transpose() * u.leftCols(rank);
            for (Eigen::Index j = 0; j < rank; ++j) v.col(j) /= std::sqrt(divisor * spectrum[j]);
            eigenvalues.head(rank) = spectrum.head(rank);
            w.head(rank) = v.transpose() * diff;
            residual -= v * w.head(rank);
        }
        w[rank] = residual.norm();
    }

    SampleSummary s;
    s.n1 = static_cast<int>(data.n1());
    s.n2 = static_cast<int>(data.n2());
    s.p = static_cast<int>(p);
    s.gamma_n = static_cast<double>(p) / static_cast<double>(n);
    s.eigenvalues = std::move(eigenvalues);
    s.w = std::move(w);
    s.trace_s = s.eigenvalues.sum() / static_cast<double>(p);
    return s;
}

SampleSummary make_summary(int n1, int n2, Eigen::VectorXd eigenvalues, Eigen::VectorXd w) {
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("sample sizes must be >= 2");
    if (eigenvalues.size() < 1 || eigenvalues.size() != w.size()) {
        throw std::invalid_argument("eigenvalues and w must be nonempty and of equal length");
    }
    std::sort(eigenvalues.data(), eigenvalues.data() + eigenvalues.size(), std::greater<>());
    if (eigenvalues[eigenvalues.size() - 1] < 0.0) {
        throw std::invalid_argument("eigenvalues must be nonnegative");
    }
    SampleSummary s;
    s.n1 = n1;
    s.n2 = n2;
    s.p = static_cast<int>(eigenvalues.size());
    s.gamma_n = static_cast<double>(s.p) / (n1 + n2);
    s.eigenvalues = std::move(eigenvalues);
    s.w = std::move(w);
    s.trace_s = s.eigenvalues.sum() / s.p;
    return s;
}

double resolvent_moment(const SampleSummary& s, double lambda, int k) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (k < 0 || k > 4) throw std::invalid_argument("resolvent moment order must be in [0, 4]");
    const double power = static_cast<double>(k + 1);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        sum += std::pow(s.eigenvalues[i] + lambda, -power);
    }
    return sum / s.p;
}

double rht(const SampleSummary& s, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < s.w.size(); ++i) {
        sum += s.w[i] * s.w[i] / (s.eigenvalues[i] + lambda);
    }
    return s.size_factor() * sum;
}

}  // namespace arht
