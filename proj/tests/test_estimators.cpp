#include <doctest.h>

#include <cmath>
#include <vector>

#include "arht/error.hpp"
#include "arht/estimators.hpp"
#include "oracle.hpp"

using namespace arht;

namespace {

SampleSummary toy() { return make_summary(2, 2, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)); }

// Direct-form plug-in estimates computed straight from the spectrum.
struct Direct {
    double m, mp, theta1, theta2;
};

Direct direct(const SampleSummary& s, double l) {
    double m = 0.0, mp = 0.0;
    for (int i = 0; i < s.p; ++i) {
        m += 1.0 / (s.eigenvalues[i] + l);
        mp += 1.0 / std::pow(s.eigenvalues[i] + l, 2);
    }
    m /= s.p;
    mp /= s.p;
    const double g = s.gamma_n;
    const double d = 1.0 - g * (1.0 - l * m);
    return {m, mp, (1.0 - l * m) / d, (1.0 - l * m) / std::pow(d, 3) - l * (m - l * mp) / std::pow(d, 4)};
}

double direct_kernel(const SampleSummary& s, double a, double b) {
    const Direct x = direct(s, a);
    const Direct y = direct(s, b);
    const double g = s.gamma_n;
    return (1 + g * x.theta1) * (1 + g * y.theta1) * (b * y.theta1 - a * x.theta1) /
           ((b - a) * std::sqrt(x.theta2 * y.theta2));
}

void check_kernel_invariants(const KernelMatrix& k) {
    const Eigen::Index n = k.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(k.gamma(i, i) == 1.0);
        for (Eigen::Index j = 0; j < n; ++j) CHECK(k.gamma(i, j) == k.gamma(j, i));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.gamma_psd);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK((k.sqrt_psd * k.sqrt_psd - k.gamma_psd).cwiseAbs().maxCoeff() < 1e-10);
}

}  // namespace

TEST_CASE("toy theta, rho and Q values") {
    const SampleSummary s = toy();
    const ThetaEstimates t = theta_estimates(s, 1.0);
    CHECK(t.m_hat == doctest::Approx(0.5));
    CHECK(t.m_prime_hat == doctest::Approx(0.25));
    CHECK(t.theta1 == doctest::Approx(0.5 / 0.875));
    CHECK(t.theta1 == doctest::Approx(0.57143).epsilon(1e-5));
    CHECK(t.theta2 == doctest::Approx(0.5 / std::pow(0.875, 3) - 0.25 / std::pow(0.875, 4)).epsilon(1e-13));
    CHECK(t.theta2 == doctest::Approx(0.31987).epsilon(1e-4));
    CHECK(t.phi1 == 1.0);

    const RhoEstimates r = rho_hat(s, 1.0);
    CHECK(r.rho0 == doctest::Approx(0.5));
    CHECK(r.rho1 == doctest::Approx(0.57143).epsilon(1e-5));
    CHECK(r.rho2 == doctest::Approx((1 + 0.25 * t.theta1) * (1 - t.theta1)).epsilon(1e-13));
    CHECK(r.rho2 == doctest::Approx(0.48980).epsilon(1e-4));

    CHECK(q_hat_polynomial(s, 1.0, {1, 0, 0}) == doctest::Approx(0.5));
    CHECK(q_objective(s, 1.0, {0, 1, 0}) == doctest::Approx(2.0206).epsilon(1e-4));
}

TEST_CASE("theta estimates agree with the direct formulas on random spectra") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const SampleSummary s = summarize(oracle::gaussian_dataset(20, 30, 35, seed));
        for (double l : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            const ThetaEstimates t = theta_estimates(s, l);
            const Direct d = direct(s, l);
            CHECK(t.m_hat == doctest::Approx(d.m).epsilon(1e-12));
            CHECK(t.m_prime_hat == doctest::Approx(d.mp).epsilon(1e-12));
            CHECK(t.theta1 == doctest::Approx(d.theta1).epsilon(1e-11));
            CHECK(t.theta2 == doctest::Approx(d.theta2).epsilon(1e-7));
            CHECK(t.m_hat > 0.0);
            CHECK(t.m_prime_hat > 0.0);
            CHECK(t.theta1 > 0.0);
            CHECK(t.theta2 > 0.0);
            // Analytic slope against a central difference.
            const double h = 1e-5 * l;
            const double fd = ((l + h) * theta_estimates(s, l + h).theta1 - (l - h) * theta_estimates(s, l - h).theta1) /
                              (2 * h);
            CHECK(lambda_theta1_slope(t) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("MP oracle values at gamma = 2") {
    CHECK(oracle::mp_m(1.0, 2.0) == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(oracle::mp_m_prime(1.0, 2.0) == doctest::Approx(0.60355).epsilon(1e-4));
    CHECK(oracle::mp_theta1(1.0, 2.0) == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(oracle::mp_theta2(1.0, 2.0) == doctest::Approx(0.6036).epsilon(1e-3));
    // The fixed point solves the quadratic and its derivative matches a finite difference.
    for (double l : {0.5, 1.0, 2.0, 5.0}) {
        const double m = oracle::mp_m(l, 2.0);
        CHECK(2.0 * l * m * m + (1.0 - 2.0 + l) * m - 1.0 == doctest::Approx(0.0).epsilon(1e-12));
        const double h = 1e-6;
        CHECK(oracle::mp_m_prime(l, 2.0) ==
              doctest::Approx(-(oracle::mp_m(l + h, 2.0) - oracle::mp_m(l - h, 2.0)) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("theta estimates converge to the MP values") {
    const int n = 400;
    const SampleSummary s = summarize(oracle::gaussian_dataset(n / 2, n / 2, 400, 77));
    for (double l : {0.5, 1.0, 2.0, 5.0}) {
        const ThetaEstimates t = theta_estimates(s, l);
        CHECK(std::abs(t.theta1 - oracle::mp_theta1(l, s.gamma_n)) <= 5.0 / std::sqrt(n));
        CHECK(std::abs(t.theta2 - oracle::mp_theta2(l, s.gamma_n)) <= 20.0 / std::sqrt(n));
    }
    const SampleSummary wide = summarize(oracle::gaussian_dataset(100, 100, 400, 78));
    const ThetaEstimates t = theta_estimates(wide, 1.0);
    CHECK(std::abs(t.theta1 - 1.0 / std::sqrt(2.0)) <= 0.05);
    CHECK(std::abs(t.theta2 - 0.6036) <= 0.1);
}

TEST_CASE("theta1 vanishes for huge lambda") {
    const SampleSummary s = summarize(oracle::gaussian_dataset(30, 30, 20, 4));
    CHECK(theta_estimates(s, 1e8).theta1 < 1e-6);
    CHECK_THROWS_AS(theta_estimates(s, 0.0), std::invalid_argument);
}

TEST_CASE("degenerate denominator is an error") {
    // gamma_n = 5 with a spectrum far above lambda makes 1 - gamma (1 - lambda m) negative.
    const SampleSummary s = make_summary(2, 2, Eigen::VectorXd::Constant(20, 100.0), Eigen::VectorXd::Ones(20));
    CHECK_THROWS_AS(theta_estimates(s, 0.01), NumericalError);
}

TEST_CASE("rho ordering for identity covariance with many samples") {
    const SampleSummary s = summarize(oracle::gaussian_dataset(500, 500, 200, 9));
    for (double l : {0.1, 1.0, 10.0}) {
        const RhoEstimates r = rho_hat(s, l);
        CHECK(r.rho0 >= r.rho1 - 0.02);
        CHECK(r.rho1 >= r.rho2 - 0.02);
    }
}

TEST_CASE("estimates are functions of the spectrum only") {
    const SampleSummary s = summarize(oracle::gaussian_dataset(10, 10, 8, 31));
    SampleSummary moved = s;
    moved.w *= 3.0;
    moved.w[0] += 1.0;
    const ThetaEstimates a = theta_estimates(s, 0.7);
    const ThetaEstimates b = theta_estimates(moved, 0.7);
    CHECK(a.theta1 == b.theta1);
    CHECK(a.theta2 == b.theta2);
    const RhoEstimates ra = rho_hat(s, 0.7);
    const RhoEstimates rb = rho_hat(moved, 0.7);
    CHECK(ra.rho0 == rb.rho0);
    CHECK(ra.rho1 == rb.rho1);
    CHECK(ra.rho2 == rb.rho2);
}

TEST_CASE("prior weights") {
    CHECK_THROWS_AS(PriorWeights(0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(PriorWeights(std::nan(""), 0, 0), std::invalid_argument);
    CHECK(PriorWeights(1, 0, 0).nonnegative_on(5.0));
    CHECK(PriorWeights(1, -1, 0).nonnegative_on(0.5));
    CHECK_FALSE(PriorWeights(1, -1, 0).nonnegative_on(2.0));
    CHECK_FALSE(PriorWeights(-1, 0, 0).nonnegative_on(1.0));
    const auto c = PriorWeights::canonical();
    REQUIRE(c.size() == 3);
    CHECK(c[0] == PriorWeights(1, 0, 0));
    CHECK(c[1] == PriorWeights(0, 1, 0));
    CHECK(c[2] == PriorWeights(0, 0, 1));
}

TEST_CASE("q is linear and Q is homogeneous in the weights") {
    const SampleSummary s = summarize(oracle::gaussian_dataset(25, 25, 40, 12));
    const PriorWeights a(0.3, 1.2, 0.0), b(0.0, 0.4, 2.0);
    for (double l : {0.05, 0.5, 5.0}) {
        CHECK(q_hat_polynomial(s, l, a + b) ==
              doctest::Approx(q_hat_polynomial(s, l, a) + q_hat_polynomial(s, l, b)).epsilon(1e-13));
        CHECK(q_objective(s, l, a.scaled(3.5)) == doctest::Approx(3.5 * q_objective(s, l, a)).epsilon(1e-13));
        CHECK(q_hat_polynomial(s, l, {1, 0, 0}) == resolvent_moment(s, l, 0));
    }
}

TEST_CASE("q with a fully specified prior") {
    const Dataset d = oracle::gaussian_dataset(12, 14, 6, 5);
    const SampleSummary s = summarize(d);
    const Eigen::MatrixXd sn = pooled_covariance(d);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(6, 6);
    CHECK(q_hat_specified(d, 0.4, id) == doctest::Approx(resolvent_moment(s, 0.4, 0)).epsilon(1e-12));
    CHECK(q_hat_specified(sn, 0.4, sn + 0.4 * id) == doctest::Approx(1.0).epsilon(1e-12));
    // A polynomial in the sample covariance is not what the plug-in estimates.
    const PriorWeights w(0.5, 1.0, 1.0);
    const Eigen::MatrixXd b = 0.5 * id + sn + sn * sn;
    CHECK(std::abs(q_hat_specified(sn, 0.4, b) - q_hat_polynomial(s, 0.4, w)) > 1e-3);
    Eigen::MatrixXd asym = id;
    asym(0, 1) = 0.1;
    CHECK_THROWS_AS(q_hat_specified(sn, 0.4, asym), std::invalid_argument);
    CHECK_THROWS_AS(q_hat_specified(sn, 0.4, Eigen::MatrixXd::Identity(5, 5)), std::invalid_argument);
}

TEST_CASE("asymptotic power") {
    CHECK(asymptotic_power(0.0, 1.0, 0.5, 1.0, 0.05) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(asymptotic_power(0.0, 2.0, 0.3, 0.7, 0.01) == doctest::Approx(0.01).epsilon(1e-10));
    CHECK(asymptotic_power(2.0 * std::sqrt(2.0), 1.0, 0.5, 1.0, 0.05) == doctest::Approx(0.1261).epsilon(1e-3));
    CHECK(asymptotic_power(2.0 * std::sqrt(2.0), 1.0, 0.5, 1.0, 0.05) ==
          doctest::Approx(oracle::normal_cdf(-1.6448536269514722 + 0.5)).epsilon(1e-12));
    double prev = 0.0;
    for (double q = 0.0; q < 20.0; q += 0.5) {
        const double cur = asymptotic_power(q, 1.5, 0.4, 0.8, 0.05);
        CHECK(cur > prev);
        prev = cur;
    }
    CHECK_THROWS(asymptotic_power(1.0, 1.0, 0.5, 0.0, 0.05));
    CHECK_THROWS(asymptotic_power(1.0, 1.0, 1.5, 1.0, 0.05));
    CHECK(normal_upper_quantile(0.05) == doctest::Approx(1.6448536269514722).epsilon(1e-12));
    CHECK(normal_cdf(-1.1449) == doctest::Approx(0.1261).epsilon(1e-3));
}

TEST_CASE("kernel entries follow the closed form") {
    const SampleSummary s = summarize(oracle::gaussian_dataset(40, 40, 60, 6));
    const std::vector<double> ls{0.05, 0.3, 2.0, 15.0};
    const KernelMatrix k = gamma_hat(s, ls);
    REQUIRE(k.size() == 4);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            CHECK(k.gamma(i, j) == doctest::Approx(direct_kernel(s, ls[i], ls[j])).epsilon(1e-8));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) {
                CHECK(k.gamma(i, j) > 0.0);
                CHECK(k.gamma(i, j) <= 1.0 + 1e-8);
            }
    CHECK(k.warnings.empty());
    check_kernel_invariants(k);
}

TEST_CASE("kernel edge cases") {
    const SampleSummary s = summarize(oracle::gaussian_dataset(30, 30, 50, 13));
    const KernelMatrix one = gamma_hat(s, {0.7});
    CHECK(one.gamma.rows() == 1);
    CHECK(one.gamma(0, 0) == 1.0);
    for (double l : {0.01, 0.5, 3.0, 40.0}) {
        const KernelMatrix k = gamma_hat(s, {l, l * (1 + 1e-8) + 1e-300});
        if (k.size() == 2) CHECK(std::abs(k.gamma(0, 1) - 1.0) <= 1e-4);
        const ThetaEstimates a = theta_estimates(s, l);
        const ThetaEstimates b = theta_estimates(s, l * (1 + 1e-8));
        CHECK(std::abs(kernel_entry(a, b, s.gamma_n) - 1.0) <= 1e-4);
        // Just inside and outside the near-diagonal switch the two branches agree.
        const ThetaEstimates c = theta_estimates(s, l * (1 + 0.99e-4));
        const ThetaEstimates e = theta_estimates(s, l * (1 + 1.01e-4));
        CHECK(kernel_entry(a, c, s.gamma_n) == doctest::Approx(kernel_entry(a, e, s.gamma_n)).epsilon(1e-6));
        CHECK(kernel_entry(a, c, s.gamma_n) == kernel_entry(c, a, s.gamma_n));
    }
    // Repeated lambdas merge.
    CHECK(gamma_hat(s, {1.0, 1.0 + 1e-9, 2.0}).size() == 2);
    CHECK(dedup_lambdas({1.0, 2.0, 1.0000001, 3.0}) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK_THROWS_AS(gamma_hat(s, {}), std::invalid_argument);
}

TEST_CASE("kernel reversal permutes the matrix exactly") {
    const SampleSummary s = summarize(oracle::gaussian_dataset(20, 20, 70, 14));
    const std::vector<double> ls{0.02, 0.4, 1.1, 9.0, 60.0};
    std::vector<double> rev(ls.rbegin(), ls.rend());
    const KernelMatrix a = gamma_hat(s, ls);
    const KernelMatrix b = gamma_hat(s, rev);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(a.gamma(i, j) == b.gamma(4 - i, 4 - j));
    check_kernel_invariants(a);
    check_kernel_invariants(b);
}

TEST_CASE("psd projection") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0.5, 0.5, 1;
    CHECK((psd_project(m) - m).cwiseAbs().maxCoeff() < 1e-12);
    m << 1, 2, 2, 1;
    const Eigen::MatrixXd p = psd_project(m);
    CHECK((p - Eigen::MatrixXd::Constant(2, 2, 1.5)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((psd_project(p) - p).cwiseAbs().maxCoeff() < 1e-10);
    const PsdProjection r = psd_project_with_root(m);
    CHECK((r.sqrt_factor * r.sqrt_factor - r.matrix).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((r.sqrt_factor - r.sqrt_factor.transpose()).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd a = oracle::gaussian_matrix(5, 5, gen);
        a = (a + a.transpose()).eval();
        const Eigen::MatrixXd q = psd_project(a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        CHECK((psd_project(q) - q).cwiseAbs().maxCoeff() < 1e-10);
    }
    m(0, 1) = 2.1;
    CHECK_THROWS_AS(psd_project(m), std::invalid_argument);
    m(0, 1) = m(1, 0) = std::nan("");
    CHECK_THROWS_AS(psd_project(m), std::invalid_argument);
}
