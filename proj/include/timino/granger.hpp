#pragma once

#include <span>
#include <utility>
#include <vector>

#include "timino/graph.hpp"
#include "timino/models.hpp"
#include "timino/panel.hpp"

namespace timino {

struct GrangerVerdict {
    std::pair<int, int> pair{-1, -1};  // (cause, effect)
    double statistic = 0.0;
    double p_value = 1.0;
    bool causes = false;
    bool degenerate = false;  // fit failed for this pair; reported as no-edge
};

/**
 * F statistic for nested models,
 *   T = ((rss_restr - rss_full) / (p_full - p_restr)) / (rss_full / (N - p_full)),
 * with T ~ F(p_full - p_restr, N - p_full) under the null. Degrees of
 * freedom may be fractional (estimated dofs of additive fits). Tiny
 * negative rss differences are clamped to zero; genuine precondition
 * violations throw.
 */
GrangerVerdict granger_f_test(double rss_restr, double rss_full, double p_restr, double p_full,
                              int N, double alpha);

struct GrangerResult {
    SummaryGraph graph;
    std::vector<GrangerVerdict> verdicts;
};

/**
 * Linear multivariate Granger causality: for every ordered pair (j, i) a
 * full VAR equation for series i on all lags 1..p is compared against the
 * restricted equation that zeroes series j's lags. Intercepts included;
 * no instantaneous terms. Singular designs mark the pair degenerate
 * (scored as no-edge) instead of failing the whole graph.
 */
GrangerResult granger_linear(const TimeSeriesPanel& panel, int max_lag, double alpha);

/**
 * Nonlinear pairwise Granger causality via additive models: the restricted
 * model smooths own lags only, the full model adds smoothers of the other
 * series' lags, and the same F statistic is applied with the estimated
 * degrees of freedom. Returns (x causes y, y causes x).
 */
std::pair<GrangerVerdict, GrangerVerdict> granger_nonlinear_pairwise(
    std::span<const double> x, std::span<const double> y, int p, double alpha,
    const FitOptions& opts = {});

/// Union of the pairwise nonlinear verdicts over every series pair.
GrangerResult granger_nonlinear_graph(const TimeSeriesPanel& panel, int p, double alpha,
                                      const FitOptions& opts = {});

}  // namespace timino
