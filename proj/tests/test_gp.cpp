#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "timino/models.hpp"
#include "timino/stats.hpp"

using namespace timino;

namespace {

DesignMatrix design_from(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    DesignMatrix d;
    d.predictors = x;
    d.response = y;
    d.column_tags.assign(static_cast<size_t>(x.cols()), {0, 1});
    return d;
}

}  // namespace

// GP fits are the slow suite; kept out of the two-minute unit budget.
TEST_SUITE_BEGIN("gp");

TEST_CASE("gp: pure noise collapses to the sample mean") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    const int n = 200;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; ++r) {
        x(r, 0) = gauss(rng);
        x(r, 1) = gauss(rng);
        y(r) = 1.0 + gauss(rng);  // independent of the predictors
    }
    const auto fit = fit_gp(design_from(x, y));
    const double total = (y.array() - y.mean()).square().sum();
    CHECK(fit.rss >= 0.9 * total);
    CHECK(fit.rss <= 1.1 * total);
    // posterior mean stays near the sample mean
    const Eigen::VectorXd posterior = y - fit.residuals;
    CHECK(std::sqrt((posterior.array() - y.mean()).square().mean()) < 0.35);
    CHECK(std::abs(fit.residuals.mean()) < 1e-6);
}

TEST_CASE("gp: recovers a non-additive interaction (residuals track the true noise)") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss;
    const int n = 500;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n), noise(n);
    for (int r = 0; r < n; ++r) {
        x(r, 0) = gauss(rng);
        x(r, 1) = gauss(rng);
        noise(r) = gauss(rng);
        const double s = x(r, 0) + x(r, 1);
        y(r) = std::exp(-s * s) + 0.1 * noise(r);
    }
    const auto fit = fit_gp(design_from(x, y));
    std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
        a[static_cast<size_t>(r)] = fit.residuals(r);
        b[static_cast<size_t>(r)] = noise(r);
    }
    CHECK(pearson_correlation(a, b) >= 0.9);
}

TEST_CASE("gp: duplicated rows do not break the fit") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> gauss;
    const int n = 120;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; r += 2) {
        x(r, 0) = gauss(rng);
        x(r + 1, 0) = x(r, 0);  // exact duplicate input
        y(r) = std::sin(2.0 * x(r, 0)) + 0.05 * gauss(rng);
        y(r + 1) = std::sin(2.0 * x(r, 0)) + 0.05 * gauss(rng);
    }
    CHECK_NOTHROW(fit_gp(design_from(x, y)));
}

TEST_CASE("gp: optimized marginal likelihood dominates every start") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss;
    const int n = 150;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; ++r) {
        x(r, 0) = gauss(rng);
        y(r) = std::cos(x(r, 0)) + 0.2 * gauss(rng);
    }
    const auto fit = fit_gp(design_from(x, y));
    const auto& params = std::get<GPParams>(fit.parameters);
    REQUIRE(params.start_lml.size() == 3);
    for (double s : params.start_lml) CHECK(params.log_marginal_likelihood >= s - 1e-9);
    CHECK(params.hyper.signal_variance > 0.0);
    CHECK(params.hyper.length_scale > 0.0);
    CHECK(params.hyper.noise_variance > 0.0);
    CHECK(fit.effective_dof <= n);
    CHECK(fit.effective_dof >= 0.0);
}

TEST_CASE("gp: oversized designs are subsampled but residuals cover every row") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> gauss;
    const int n = 700;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; ++r) {
        x(r, 0) = gauss(rng);
        y(r) = 0.5 * x(r, 0) + 0.1 * gauss(rng);
    }
    FitOptions opts;
    opts.gp_max_n = 300;
    opts.seed = 5;
    const auto fit = fit_gp(design_from(x, y), opts);
    CHECK(fit.residuals.size() == n);
    CHECK(std::get<GPParams>(fit.parameters).train_size == 300);
    // linear signal with small noise: the GP must explain most variance
    const double total = (y.array() - y.mean()).square().sum();
    CHECK(fit.rss < 0.2 * total);
}

TEST_SUITE_END();
