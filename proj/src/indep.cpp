#include "timino/indep.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "timino/stats.hpp"

namespace timino {
namespace {

constexpr std::uint64_t kBandwidthSeed = 0x6d656469616eULL;  // fixed: keeps the op pure

Eigen::MatrixXd gaussian_kernel(std::span<const double> v, double bandwidth) {
    const int n = static_cast<int>(v.size());
    const double inv = -0.5 / (bandwidth * bandwidth);
    Eigen::MatrixXd k(n, n);
    for (int j = 0; j < n; ++j) {
        k(j, j) = 1.0;
        for (int i = j + 1; i < n; ++i) {
            const double d = v[static_cast<size_t>(i)] - v[static_cast<size_t>(j)];
            const double val = std::exp(inv * d * d);
            k(i, j) = val;
            k(j, i) = val;
        }
    }
    return k;
}

Eigen::MatrixXd centered(const Eigen::MatrixXd& k) {
    const double n = static_cast<double>(k.rows());
    const Eigen::VectorXd row_mean = k.rowwise().mean();
    const double total_mean = row_mean.mean();
    Eigen::MatrixXd kc = k;
    kc.colwise() -= row_mean;
    kc.rowwise() -= row_mean.transpose();
    kc.array() += total_mean;
    (void)n;
    return kc;
}

struct HsicParts {
    Eigen::MatrixXd k, l;    // raw kernels
    Eigen::MatrixXd kc, lc;  // doubly centered
    double statistic = 0.0;  // (1/n^2) tr(K H L H)
};

HsicParts hsic_parts(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("hsic: length mismatch");
    if (x.size() < 4) throw std::invalid_argument("hsic: needs at least 4 samples");
    const double n = static_cast<double>(x.size());
    HsicParts parts;
    parts.k = gaussian_kernel(x, median_bandwidth(x));
    parts.l = gaussian_kernel(y, median_bandwidth(y));
    parts.kc = centered(parts.k);
    parts.lc = centered(parts.l);
    parts.statistic = parts.kc.cwiseProduct(parts.lc).sum() / (n * n);
    return parts;
}

double gamma_pvalue(const HsicParts& parts) {
    const int ni = static_cast<int>(parts.k.rows());
    const double n = static_cast<double>(ni);
    if (ni < 20) throw std::invalid_argument("hsic gamma approximation needs n >= 20");

    const double test_stat = n * parts.statistic;  // n * HSIC_b

    // Moment-matched gamma null (Gretton et al.'s approximation).
    const Eigen::MatrixXd prod = (parts.kc.cwiseProduct(parts.lc) / 6.0).array().square();
    const double off_diag_sum = prod.sum() - prod.trace();
    double var_hsic = off_diag_sum / (n * (n - 1.0));
    var_hsic *= 72.0 * (n - 4.0) * (n - 5.0) / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));

    const double mu_x = (parts.k.sum() - n) / (n * (n - 1.0));
    const double mu_y = (parts.l.sum() - n) / (n * (n - 1.0));
    const double mean_hsic = (1.0 + mu_x * mu_y - mu_x - mu_y) / n;
    if (var_hsic <= 0.0 || mean_hsic <= 0.0) return 1.0;

    const double shape = mean_hsic * mean_hsic / var_hsic;
    const double scale = var_hsic * n / mean_hsic;
    return gamma_sf(test_stat, shape, scale);
}

double permutation_pvalue(const HsicParts& parts, int n_permutations, std::uint64_t seed) {
    const int n = static_cast<int>(parts.k.rows());
    auto rng = make_rng(seed, 0x7065726dULL);
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);

    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    int exceed = 0;
    for (int rep = 0; rep < n_permutations; ++rep) {
        std::shuffle(perm.begin(), perm.end(), rng);
        // tr(Kc L_pi) with L_pi(i,j) = L(pi(i), pi(j)); centering commutes
        // with permutation, so Kc can be reused as-is.
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const int pj = perm[static_cast<size_t>(j)];
            for (int i = 0; i < n; ++i) {
                acc += parts.kc(i, j) * parts.l(perm[static_cast<size_t>(i)], pj);
            }
        }
        if (acc / n2 >= parts.statistic) ++exceed;
    }
    return (1.0 + exceed) / (1.0 + n_permutations);
}

double crosscorr_pvalue(std::span<const double> x, std::span<const double> y,
                        bool degenerate_is_error) {
    const size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        if (degenerate_is_error) throw std::invalid_argument("cross-correlation: degenerate input");
        return 1.0;  // a constant residual is independent of everything
    }
    const double rho = sxy / std::sqrt(sxx * syy);
    const double z = std::abs(rho) * std::sqrt(static_cast<double>(n));
    return std::min(1.0, 2.0 * normal_sf(z));
}

}  // namespace

double median_bandwidth(std::span<const double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("median bandwidth needs >= 2 samples");

    std::vector<double> points;
    if (samples.size() > 500) {
        auto rng = make_rng(kBandwidthSeed, samples.size());
        const auto idx = sample_indices(static_cast<int>(samples.size()), 500, rng);
        points.reserve(idx.size());
        for (int i : idx) points.push_back(samples[static_cast<size_t>(i)]);
    } else {
        points.assign(samples.begin(), samples.end());
    }

    std::vector<double> dist;
    dist.reserve(points.size() * (points.size() - 1) / 2);
    for (size_t i = 0; i < points.size(); ++i) {
        for (size_t j = i + 1; j < points.size(); ++j) {
            dist.push_back(std::abs(points[i] - points[j]));
        }
    }
    std::sort(dist.begin(), dist.end());
    const size_t half = dist.size() / 2;
    const double median =
        dist.size() % 2 == 1 ? dist[half] : 0.5 * (dist[half - 1] + dist[half]);
    return median > 0.0 ? median : 1.0;
}

double hsic_statistic(std::span<const double> x, std::span<const double> y) {
    return hsic_parts(x, y).statistic;
}

double hsic_pvalue(std::span<const double> x, std::span<const double> y, PValueMethod method,
                   int n_permutations, std::uint64_t seed) {
    const HsicParts parts = hsic_parts(x, y);
    if (method == PValueMethod::Gamma) return gamma_pvalue(parts);
    return permutation_pvalue(parts, n_permutations, seed);
}

IndependenceVerdict cross_correlation_test(std::span<const double> x, std::span<const double> y,
                                           int max_shift, double alpha) {
    const int n = static_cast<int>(x.size());
    if (x.size() != y.size()) throw std::invalid_argument("cross-correlation: length mismatch");
    if (max_shift < 0) throw std::invalid_argument("cross-correlation: negative max_shift");
    if (n <= 10 * max_shift) {
        throw std::invalid_argument("cross-correlation: series too short for shift range");
    }

    IndependenceVerdict verdict;
    verdict.n_tests = 2 * max_shift + 1;
    double min_adj = 1.0;
    for (int s = -max_shift; s <= max_shift; ++s) {
        const int lo = std::max(0, -s);
        const int hi = n - 1 - std::max(0, s);
        const int len = hi - lo + 1;
        std::vector<double> xa(static_cast<size_t>(len)), ya(static_cast<size_t>(len));
        for (int t = 0; t < len; ++t) {
            xa[static_cast<size_t>(t)] = x[static_cast<size_t>(lo + t)];
            ya[static_cast<size_t>(t)] = y[static_cast<size_t>(lo + t + s)];
        }
        const double p = crosscorr_pvalue(xa, ya, /*degenerate_is_error=*/true);
        verdict.per_shift_pvalues[s] = p;
        min_adj = std::min(min_adj, std::min(1.0, p * verdict.n_tests));
    }
    verdict.min_adjusted_p = min_adj;
    verdict.reject = min_adj < alpha;
    return verdict;
}

IndependenceVerdict shifted_independence_test(std::span<const double> residuals,
                                              std::span<const double> series,
                                              const ShiftTestOptions& opts) {
    if (residuals.size() != series.size()) {
        throw std::invalid_argument("shifted test: length mismatch");
    }
    const int n = static_cast<int>(residuals.size());
    const int m = opts.max_shift;
    if (m < 1) throw std::invalid_argument("shifted test: max_shift must be >= 1");

    std::vector<int> shifts;
    for (int s = -m; s <= (opts.include_nonnegative_shifts ? m : -1); ++s) shifts.push_back(s);

    IndependenceVerdict verdict;
    verdict.n_tests = opts.n_tests_override > 0
                          ? opts.n_tests_override
                          : static_cast<int>(shifts.size()) * std::max(1, opts.series_multiplier);

    double min_adj = 1.0;
    for (int s : shifts) {
        const int lo = std::max(0, -s);
        const int hi = n - 1 - std::max(0, s);
        const int len = hi - lo + 1;
        if (len < 20) throw std::invalid_argument("shifted test: overlap shorter than 20");
        std::vector<double> xa, ya;
        if (opts.max_points > 0 && len > opts.max_points) {
            auto rng = make_rng(opts.seed, 0x73686966ULL + static_cast<std::uint64_t>(s + 64));
            const auto idx = sample_indices(len, opts.max_points, rng);
            xa.reserve(idx.size());
            ya.reserve(idx.size());
            for (int t : idx) {
                xa.push_back(residuals[static_cast<size_t>(lo + t)]);
                ya.push_back(series[static_cast<size_t>(lo + t + s)]);
            }
        } else {
            xa.reserve(static_cast<size_t>(len));
            ya.reserve(static_cast<size_t>(len));
            for (int t = 0; t < len; ++t) {
                xa.push_back(residuals[static_cast<size_t>(lo + t)]);
                ya.push_back(series[static_cast<size_t>(lo + t + s)]);
            }
        }

        double p = 1.0;
        if (opts.test == IndepTest::CrossCorr) {
            p = crosscorr_pvalue(xa, ya, /*degenerate_is_error=*/false);
        } else {
            const HsicParts parts = hsic_parts(xa, ya);
            if (opts.pvalue_method == PValueMethod::Gamma) {
                p = gamma_pvalue(parts);
            } else {
                const auto perm_seed =
                    derive_seed(opts.seed, 0x70736866ULL + static_cast<std::uint64_t>(s + 64));
                p = permutation_pvalue(parts, opts.n_permutations, perm_seed);
            }
        }
        verdict.per_shift_pvalues[s] = p;
        min_adj = std::min(min_adj, std::min(1.0, p * verdict.n_tests));
    }
    verdict.min_adjusted_p = min_adj;
    verdict.reject = min_adj < opts.alpha;
    return verdict;
}

IndependenceVerdict shifted_independence_test(std::span<const double> residuals,
                                              std::span<const double> series, int max_shift,
                                              double alpha, IndepTest method) {
    ShiftTestOptions opts;
    opts.max_shift = max_shift;
    opts.alpha = alpha;
    opts.test = method;
    return shifted_independence_test(residuals, series, opts);
}

}  // namespace timino
