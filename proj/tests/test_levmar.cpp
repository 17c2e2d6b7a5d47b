#include <cmath>

#include <doctest.h>

#include <Eigen/Dense>

#include "magpol/levmar.hpp"
#include "magpol/rng.hpp"

using namespace magpol;

namespace {

// y = a * exp(-b * t) sampled on t = 0..19, clean
struct DecaySet {
    Eigen::VectorXd t{20};
    Eigen::VectorXd y{20};

    DecaySet(double a, double b) {
        for (int i = 0; i < 20; ++i) {
            t(i) = 0.25 * i;
            y(i) = a * std::exp(-b * t(i));
        }
    }
};

} // namespace

TEST_CASE("recovers exponential-decay parameters from a cold start") {
    const DecaySet data(3.7, 0.9);
    auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        for (int i = 0; i < 20; ++i) r(i) = x(0) * std::exp(-x(1) * data.t(i)) - data.y(i);
        return true;
    };
    Eigen::VectorXd x0(2);
    x0 << 1.0, 0.2;
    const auto res = levmar_fit(fn, 20, x0);
    CHECK(res.converged);
    CHECK(res.status == FitStatus::converged);
    CHECK(res.params(0) == doctest::Approx(3.7).epsilon(1e-7));
    CHECK(res.params(1) == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(res.residual_rms < 1e-8);
}

TEST_CASE("linear model: exact solution and textbook covariance") {
    // y = 2 + 3 t with unit residual weights; J is constant
    const int n = 10;
    Eigen::VectorXd t(n), y(n);
    for (int i = 0; i < n; ++i) {
        t(i) = i;
        y(i) = 2.0 + 3.0 * i + ((i % 2 == 0) ? 0.5 : -0.5); // symmetric perturbation
    }
    auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        for (int i = 0; i < n; ++i) r(i) = x(0) + x(1) * t(i) - y(i);
        return true;
    };
    Eigen::VectorXd x0(2);
    x0 << 0.0, 0.0;
    const auto res = levmar_fit(fn, n, x0);
    REQUIRE(res.converged);

    // compare against the normal-equation solution
    Eigen::MatrixXd J(n, 2);
    for (int i = 0; i < n; ++i) {
        J(i, 0) = 1.0;
        J(i, 1) = t(i);
    }
    const Eigen::VectorXd beta = (J.transpose() * J).ldlt().solve(J.transpose() * y);
    CHECK(res.params(0) == doctest::Approx(beta(0)).epsilon(1e-8));
    CHECK(res.params(1) == doctest::Approx(beta(1)).epsilon(1e-8));

    const double ssr = (J * beta - y).squaredNorm();
    const Eigen::MatrixXd cov = (J.transpose() * J).inverse() * (ssr / (n - 2));
    CHECK(res.sigma(0) == doctest::Approx(std::sqrt(cov(0, 0))).epsilon(1e-6));
    CHECK(res.sigma(1) == doctest::Approx(std::sqrt(cov(1, 1))).epsilon(1e-6));
}

TEST_CASE("duplicated parameter direction is reported unidentifiable") {
    // model y = (a + b) t: J columns are identical, rank 1
    auto fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        for (int i = 0; i < 8; ++i) r(i) = (x(0) + x(1)) * i - 2.0 * i;
        return true;
    };
    Eigen::VectorXd x0(2);
    x0 << 0.4, 0.4;
    const auto res = levmar_fit(fn, 8, x0);
    CHECK(res.status == FitStatus::unidentifiable);
    CHECK_FALSE(res.converged);
}

TEST_CASE("fewer residuals than parameters is rejected upfront") {
    auto fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        r(0) = x(0) + x(1);
        return true;
    };
    Eigen::VectorXd x0(2);
    x0 << 0.0, 0.0;
    const auto res = levmar_fit(fn, 1, x0);
    CHECK(res.status == FitStatus::unidentifiable);
    CHECK(res.iterations == 0);
}

TEST_CASE("infeasible starting point is reported, not iterated") {
    auto fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        if (x(0) <= 0.0) return false;
        r(0) = std::log(x(0));
        r(1) = x(0) - 2.0;
        return true;
    };
    Eigen::VectorXd x0(1);
    x0 << -1.0;
    const auto res = levmar_fit(fn, 2, x0);
    CHECK(res.status == FitStatus::infeasible_start);
    CHECK_FALSE(res.converged);
}

TEST_CASE("domain-guarded residuals keep iterates feasible") {
    // minimum near the feasibility boundary; the guard must reject, not crash
    Eigen::VectorXd target(3);
    target << 0.05, 0.1, 0.3;
    auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        if (x(0) <= 0.0) return false;
        for (int i = 0; i < 3; ++i) r(i) = std::sqrt(x(0)) - std::sqrt(target(i));
        return true;
    };
    Eigen::VectorXd x0(1);
    x0 << 5.0;
    const auto res = levmar_fit(fn, 3, x0);
    CHECK(res.converged);
    CHECK(res.params(0) > 0.0);
    // minimizer of sum (sqrt(x)-sqrt(t_i))^2 has sqrt(x) = mean sqrt(t_i)
    const double root = (std::sqrt(0.05) + std::sqrt(0.1) + std::sqrt(0.3)) / 3.0;
    CHECK(res.params(0) == doctest::Approx(root * root).epsilon(1e-6));
}

TEST_CASE("iteration cap is honored and reported") {
    const DecaySet data(3.7, 0.9);
    auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        for (int i = 0; i < 20; ++i) r(i) = x(0) * std::exp(-x(1) * data.t(i)) - data.y(i);
        return true;
    };
    Eigen::VectorXd x0(2);
    x0 << 100.0, 5.0;
    LevmarOptions opt;
    opt.max_iterations = 1;
    const auto res = levmar_fit(fn, 20, x0, opt);
    CHECK(res.iterations <= 1);
    if (!res.converged) CHECK(res.status == FitStatus::max_iterations);
}

TEST_CASE("typical scales make badly conditioned problems solvable") {
    // parameters nine orders of magnitude apart, as in (f_p, kappa) fits
    const double a_true = 5.041e9, b_true = 2.5;
    auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        for (int i = 0; i < 12; ++i) {
            const double t = 0.1 * (i + 1);
            r(i) = (x(0) * 1e-9) * t + x(1) * t * t - ((a_true * 1e-9) * t + b_true * t * t);
        }
        return true;
    };
    Eigen::VectorXd x0(2);
    x0 << 4.0e9, 1.0;
    LevmarOptions opt;
    opt.typical_scale = Eigen::VectorXd(2);
    opt.typical_scale << 1e9, 1.0;
    const auto res = levmar_fit(fn, 12, x0, opt);
    CHECK(res.converged);
    CHECK(res.params(0) == doctest::Approx(a_true).epsilon(1e-6));
    CHECK(res.params(1) == doctest::Approx(b_true).epsilon(1e-6));
}
