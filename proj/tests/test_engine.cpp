#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "arht/engine.hpp"
#include "arht/error.hpp"
#include "oracle.hpp"

using namespace arht;

namespace {

KernelMatrix kernel_from(const Eigen::MatrixXd& g) {
    KernelMatrix k;
    for (Eigen::Index i = 0; i < g.rows(); ++i) k.lambdas.push_back(1.0 + static_cast<double>(i));
    k.gamma = g;
    const PsdProjection p = psd_project_with_root(g);
    k.gamma_psd = p.matrix;
    k.sqrt_psd = p.sqrt_factor;
    return k;
}

double tail_fraction(const std::vector<double>& x, double t) {
    return static_cast<double>(std::count_if(x.begin(), x.end(), [t](double v) { return v > t; })) / x.size();
}

ArhtOptions quick(std::uint64_t seed = 1) {
    ArhtOptions o;
    o.bootstrap_B = 2000;
    o.seed = seed;
    o.chi2_draws = 20000;
    return o;
}

Dataset shifted(int n1, int n2, int p, double shift, std::uint64_t seed) {
    Dataset d = oracle::gaussian_dataset(n1, n2, p, seed);
    d.x2.array() += shift;
    return d;
}

}  // namespace

TEST_CASE("bootstrap maximum oracles") {
    const auto indep = bootstrap_null_max(kernel_from(Eigen::MatrixXd::Identity(3, 3)), 100000, 5);
    CHECK(std::abs(tail_fraction(indep, 1.0) - (1.0 - std::pow(oracle::normal_cdf(1.0), 3))) <= 0.005);
    const auto ones = bootstrap_null_max(kernel_from(Eigen::MatrixXd::Ones(3, 3)), 100000, 6);
    CHECK(std::abs(tail_fraction(ones, 1.0) - (1.0 - oracle::normal_cdf(1.0))) <= 0.005);
    CHECK(bootstrap_null_max(kernel_from(Eigen::MatrixXd::Identity(3, 3)), 1000, 5) ==
          std::vector<double>(indep.begin(), indep.begin() + 1000));
    CHECK(bootstrap_null_max(kernel_from(Eigen::MatrixXd::Identity(3, 3)), 1000, 7) !=
          std::vector<double>(indep.begin(), indep.begin() + 1000));
}

TEST_CASE("bootstrap sample does not depend on the thread count") {
    const KernelMatrix k = kernel_from(Eigen::MatrixXd::Identity(2, 2));
    setenv("ARHT_THREADS", "1", 1);
    const auto a = bootstrap_null_max(k, 5000, 11);
    setenv("ARHT_THREADS", "4", 1);
    const auto b = bootstrap_null_max(k, 5000, 11);
    unsetenv("ARHT_THREADS");
    CHECK(a == b);
}

TEST_CASE("bootstrap p-value counts strict exceedances") {
    CHECK(bootstrap_pvalue({0.0, 1.0, 2.0, 3.0}, 1.0) == 0.5);
    CHECK(bootstrap_pvalue({0.0, 1.0, 2.0, 3.0}, 5.0) == 0.0);
    CHECK_THROWS(bootstrap_pvalue({}, 1.0));
}

TEST_CASE("end-to-end result invariants") {
    const Dataset d = oracle::gaussian_dataset(40, 35, 60, 3);
    for (Calibration c : {Calibration::raw, Calibration::cuberoot}) {
        ArhtOptions o = quick();
        o.calibration = c;
        const TestResult r = arht_test(d, o);
        double mx = -INFINITY;
        for (const auto& s : r.per_lambda_stats) mx = std::max(mx, s.value);
        CHECK(r.statistic == mx);
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
        CHECK(r.method == PValueMethod::bootstrap);
        CHECK(r.resamples == 2000);
        CHECK(r.per_lambda_stats.size() == r.selection.lambdas.size());
        CHECK(r.kernel.lambdas == r.selection.lambdas);
        const TestResult again = arht_test(d, o);
        CHECK(again.p_value == r.p_value);
        CHECK(again.statistic == r.statistic);
    }
}

TEST_CASE("separated samples reject with p = 0") {
    ArhtOptions o;
    o.bootstrap_B = 10000;
    const TestResult r = arht_test(shifted(50, 50, 50, 5.0, 4), o);
    CHECK(r.p_value == 0.0);
}

TEST_CASE("single prior bootstrap matches the normal tail") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ArhtOptions o;
        o.priors = {{0, 1, 0}};
        o.bootstrap_B = 10000;
        o.seed = seed;
        const TestResult r = arht_test(oracle::gaussian_dataset(50, 50, 100, 100 + seed), o);
        CHECK(std::abs(r.p_value - (1.0 - oracle::normal_cdf(r.statistic))) <= 0.02);
    }
}

TEST_CASE("option validation") {
    ArhtOptions o;
    o.bootstrap_B = 99;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = ArhtOptions{};
    o.grid_points = 1;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = ArhtOptions{};
    o.calibration = Calibration::chi2;
    o.priors = {{1, 0, 0}, {0, 1, 0}};
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = ArhtOptions{};
    o.permutations = 50;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = ArhtOptions{};
    o.priors.clear();
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    CHECK(pvalue_method_from_string(to_string(PValueMethod::permutation)) == PValueMethod::permutation);
}

TEST_CASE("chi-square allocation from a diagonal target") {
    ChiSquareApprox a;
    a.target = Eigen::Vector3d(40.0, 31.0, 60.0).asDiagonal();
    chi2_allocate(a);
    CHECK(a.dofs == std::array<long, 3>{20, 16, 30});
    CHECK(a.segments == std::array<long, 7>{0, 0, 0, 0, 20, 16, 30});
    for (int i = 0; i < 3; ++i) CHECK(a.block_dof(i) == a.dofs[i]);
    CHECK(a.block_overlap(0, 1) == 0);

    a.target << 40, 30.5, 21, 30.5, 40, 25.9, 21, 25.9, 40;
    chi2_allocate(a);
    CHECK(a.shared[0][1] == 15);
    CHECK(a.shared[0][2] == 10);
    CHECK(a.shared[1][2] == 12);
    for (int i = 0; i < 3; ++i) {
        CHECK(a.block_dof(i) == a.dofs[i]);
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(a.block_overlap(i, j) == a.shared[i][j]);
    }

    a.target << 40, 38, 38, 38, 40, 2, 38, 2, 40;
    CHECK_THROWS_AS(chi2_allocate(a), NumericalError);
}

TEST_CASE("chi-square calibration moments and simulated correlations") {
    const SampleSummary s = summarize(oracle::gaussian_dataset(50, 50, 200, 21));
    // Widely spaced lambdas need more shared degrees than the smaller block has.
    CHECK_THROWS_AS(chi2_calibrate(s, {0.5, 2.0, 8.0}), NumericalError);
    const std::array<double, 3> ls{20.0, 40.0, 80.0};
    const ChiSquareApprox a = chi2_calibrate(s, ls);
    for (int i = 0; i < 3; ++i) {
        const ThetaEstimates t = theta_estimates(s, ls[i]);
        const double ai = a.scales[i];
        CHECK(ai == doctest::Approx(t.theta2 / t.theta1));
        CHECK(std::abs(ai * a.dofs[i] - s.p * t.theta1) <= ai);
        CHECK(std::abs(2 * ai * ai * a.dofs[i] - 2 * s.p * t.theta2) <= 2 * ai * ai);
        CHECK(a.block_dof(i) == a.dofs[i]);
        for (int j = 0; j < 3; ++j) {
            CHECK(a.shared[i][j] >= 0);
            if (i != j) CHECK(std::abs(2.0 * a.shared[i][j] - a.target(i, j)) <= 2.0);
        }
    }
    for (long seg : a.segments) CHECK(seg >= 0);

    // Direct simulation of the shared-block quadratic forms.
    std::mt19937_64 gen(3);
    std::normal_distribution<double> z;
    const int draws = 20000;
    Eigen::MatrixXd q(draws, 3);
    for (int b = 0; b < draws; ++b) {
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        for (int seg = 0; seg < 7; ++seg) {
            double sum = 0.0;
            for (long k = 0; k < a.segments[seg]; ++k) sum += std::pow(z(gen), 2);
            for (int i = 0; i < 3; ++i)
                if (ChiSquareApprox::kSegmentBlocks[seg][i]) acc[i] += sum;
        }
        q.row(b) = acc.transpose();
    }
    const Eigen::MatrixXd c = q.rowwise() - q.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / (draws - 1.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(q.col(i).mean() == doctest::Approx(a.dofs[i]).epsilon(0.02));
        for (int j = i + 1; j < 3; ++j) {
            const double corr = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
            CHECK(std::abs(corr - a.shared[i][j] / std::sqrt(double(a.dofs[i]) * a.dofs[j])) <= 0.03);
        }
    }
}

TEST_CASE("chi-square p-value") {
    const SampleSummary s = summarize(oracle::gaussian_dataset(50, 50, 200, 21));
    const ChiSquareApprox a = chi2_calibrate(s, {20.0, 40.0, 80.0});
    CHECK(chi2_pvalue(a, {1e6, 1e6, 1e6}, 20000, 1) == 0.0);
    double prev = 1.0;
    for (double k = -3.0; k <= 3.0; k += 0.5) {
        std::array<double, 3> obs;
        for (int i = 0; i < 3; ++i) obs[i] = a.centers[i] + k * a.spreads[i];
        const double p = chi2_pvalue(a, obs, 20000, 1);
        CHECK(p <= prev);
        prev = p;
    }
    CHECK(chi2_pvalue(a, {300, 200, 100}, 5000, 9) == chi2_pvalue(a, {300, 200, 100}, 5000, 9));

    // Repeated lambdas share all but the rounding residue.
    const ChiSquareApprox same = chi2_calibrate(s, {1.0, 1.0, 1.0});
    CHECK(same.segments[0] >= same.dofs[0] - 1);
    for (int seg = 1; seg < 4; ++seg) CHECK(same.segments[seg] == 0);

    // With the other two blocks empty the maximum is a single scaled chi-square.
    ChiSquareApprox one = same;
    one.segments = {0, 0, 0, 0, same.dofs[0], 0, 0};
    boost::math::chi_squared dist(static_cast<double>(one.dofs[0]));
    for (double x : {0.9, 1.0, 1.1, 1.2}) {
        const double obs = x * one.centers[0];
        const double exact = boost::math::cdf(boost::math::complement(dist, obs / one.scales[0]));
        CHECK(std::abs(chi2_pvalue(one, {obs, obs, obs}, 100000, 4) - exact) <= 0.01);
    }
}

TEST_CASE("chi-square mode end to end") {
    ArhtOptions o = quick();
    o.calibration = Calibration::chi2;
    const TestResult r = arht_test(oracle::gaussian_dataset(50, 50, 200, 23), o);
    CHECK(r.method == PValueMethod::chi2);
    REQUIRE(r.chi2.has_value());
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(r.resamples == 20000);
}

TEST_CASE("permutation p-values") {
    ArhtOptions o = quick();
    o.permutations = 199;
    const TestResult sep = permutation_test(shifted(20, 20, 30, 10.0, 5), o);
    CHECK(sep.p_value == doctest::Approx(1.0 / 200.0));
    CHECK(sep.lambda_fixed_across_permutations);
    CHECK(sep.method == PValueMethod::permutation);
    const TestResult null = permutation_test(oracle::gaussian_dataset(20, 20, 30, 6), o);
    CHECK(null.p_value >= 1.0 / 200.0);
    CHECK(null.p_value <= 1.0);
    CHECK(permutation_test(oracle::gaussian_dataset(20, 20, 30, 6), o).p_value == null.p_value);
    o.permutations.reset();
    CHECK_THROWS(permutation_test(oracle::gaussian_dataset(20, 20, 30, 6), o));
}
