#pragma once

#include <cstdint>
#include <map>
#include <span>

namespace timino {

enum class PValueMethod { Permutation, Gamma };
enum class IndepTest { HSIC, CrossCorr };

/**
 * Outcome of testing one residual series against one candidate-cause
 * series across time shifts. Raw p-values are kept per shift; the decision
 * is Bonferroni-corrected by n_tests (the number of tests the caller runs
 * in the same sweep).
 */
struct IndependenceVerdict {
    std::map<int, double> per_shift_pvalues;
    double min_adjusted_p = 1.0;  // min over shifts of p * n_tests, clamped to 1
    bool reject = false;          // min_adjusted_p < alpha
    int n_tests = 0;
};

/**
 * Median of the pairwise distances over all distinct pairs; the Gaussian
 * kernel bandwidth heuristic. Inputs longer than 500 are reduced to a
 * deterministic 500-point subsample first. A zero median falls back to 1.
 */
double median_bandwidth(std::span<const double> samples);

/**
 * Biased HSIC estimator (1/n^2) tr(K H L H) with Gaussian kernels
 * exp(-(a-b)^2 / (2 s^2)) and per-argument median-heuristic bandwidths.
 */
double hsic_statistic(std::span<const double> x, std::span<const double> y);

/**
 * P-value for the HSIC test of independence. Permutation: seeded
 * permutations of y, p = (1 + #{stat_perm >= stat}) / (1 + #perms).
 * Gamma: moment-matched gamma approximation to the null of n * HSIC
 * (requires n >= 20).
 */
double hsic_pvalue(std::span<const double> x, std::span<const double> y, PValueMethod method,
                   int n_permutations = 500, std::uint64_t seed = 0);

/**
 * Cross-correlation independence test: sample correlation of (x_t, y_{t+s})
 * for every shift s in -max_shift..max_shift, per-shift p-values from the
 * asymptotic N(0, 1/n) null, Bonferroni over the 2*max_shift+1 shifts.
 * Requires n > 10 * max_shift; zero-variance input is an error.
 */
IndependenceVerdict cross_correlation_test(std::span<const double> x, std::span<const double> y,
                                           int max_shift, double alpha);

struct ShiftTestOptions {
    int max_shift = 4;
    double alpha = 0.05;
    IndepTest test = IndepTest::HSIC;
    PValueMethod pvalue_method = PValueMethod::Gamma;
    int n_permutations = 500;
    /// false restricts the sweep to strictly negative shifts (the series'
    /// past) — used when a residual is tested against its own series.
    bool include_nonnegative_shifts = true;
    /// Bonferroni accounting: n_tests = shift count * series_multiplier,
    /// unless n_tests_override is set by a caller that counts a whole sweep.
    int series_multiplier = 1;
    int n_tests_override = 0;
    /// Cap on aligned points per shift (seeded uniform subsample); 0 = all.
    int max_points = 0;
    std::uint64_t seed = 0;
};

/**
 * Runs the chosen pairwise test on the shift-aligned overlap of
 * (residuals_t, series_{t+s}) for each shift s, truncating to the
 * overlapping window (never wrapping), and aggregates with Bonferroni.
 * Every overlap must hold at least 20 samples.
 */
IndependenceVerdict shifted_independence_test(std::span<const double> residuals,
                                              std::span<const double> series,
                                              const ShiftTestOptions& opts);

IndependenceVerdict shifted_independence_test(std::span<const double> residuals,
                                              std::span<const double> series, int max_shift,
                                              double alpha, IndepTest method);

}  // namespace timino
