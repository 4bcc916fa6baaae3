#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "timino/graph.hpp"
#include "timino/indep.hpp"
#include "timino/models.hpp"
#include "timino/panel.hpp"

namespace timino {

struct DiscoveryConfig {
    Backend backend = Backend::Linear;
    int max_lag = 2;
    double alpha = 0.05;
    IndepTest indep_method = IndepTest::HSIC;
    bool instantaneous = true;
    int partial_max_exclude = 0;
    std::uint64_t seed = 0;

    /// Per-shift sample cap for the tests inside the discovery loop; the
    /// sweep runs O(d^2 * shifts) tests, each quadratic in sample size.
    int hsic_max_points = 500;
    /// Re-checks the final accepted model with permutation p-values.
    bool confirm_permutation = false;
    int n_permutations = 500;
    FitOptions fit;
};

enum class DiscoveryVerdict { Decided, Undecided, Partial };

struct CandidateRecord {
    int node = -1;
    bool feasible = false;   // model fit succeeded
    bool accepted = false;   // every independence verdict accepted
    double min_adjusted_p = 0.0;
    int order = 0;
    std::string note;
};

struct RoundRecord {
    std::vector<int> active;  // S at the start of the round
    std::vector<CandidateRecord> candidates;
    int chosen = -1;  // -1 marks the break ("no k with independence")
};

struct DiscoveryResult {
    DiscoveryVerdict verdict = DiscoveryVerdict::Undecided;
    /// Indexed over all panel columns. For Partial results edges never
    /// touch an excluded node; claims cover exactly the non-excluded set.
    SummaryGraph graph;
    std::set<int> excluded;  // Partial only
    std::string reason;      // Undecided only
    std::vector<RoundRecord> rounds;
    /// Partial only: pairs (excluded node, halt-set node) whose relation
    /// stays an open question; reported separately, never as graph edges.
    std::vector<std::pair<int, int>> unresolved;
};

struct NodeEvaluation {
    FittedNodeModel model;
    int order = 0;
    std::map<int, IndependenceVerdict> verdicts;  // one per tested series
    bool all_accept = false;
    /// "Weakest dependence" score: the smallest Bonferroni-scaled raw
    /// p-value across the sweep, kept unclamped so candidates stay ordered.
    double min_adjusted_p = std::numeric_limits<double>::infinity();
};

/**
 * Fits series k on its own lags plus the lags (and instantaneous values,
 * when configured) of every other series in S, then tests the residuals
 * against each series in S — the self test runs on past shifts only, since
 * residuals feed the present and future of their own series by
 * construction. The lag order comes from AIC for the linear and additive
 * backends and from config.max_lag for the GP backend. Fit failures throw;
 * discovery treats them as candidate disqualification.
 */
NodeEvaluation fit_timino_node(const TimeSeriesPanel& panel, int k, const std::set<int>& s_set,
                               const DiscoveryConfig& config);

/**
 * Full causal discovery by sink elimination. Each round evaluates every
 * remaining series, keeps the candidates whose residuals pass every
 * independence verdict, and removes the one with the weakest dependence
 * (largest minimum Bonferroni-adjusted p-value; ties break to the smaller
 * index). No accepted candidate means Undecided ("bad model fit"). The
 * final parent sets are pruned before the graph is emitted.
 */
DiscoveryResult discover_full(const TimeSeriesPanel& panel, const DiscoveryConfig& config);

/**
 * Greedy parent pruning: per node, in ascending parent order, drop a
 * parent, refit, rerun the verdicts against the node's original universe,
 * and keep the drop only when everything still accepts; repeats to a fixed
 * point. Refit failures keep the parent.
 */
std::map<int, std::set<int>> prune_parents(const TimeSeriesPanel& panel,
                                           const std::map<int, std::set<int>>& parents,
                                           const DiscoveryConfig& config);

/**
 * Partial causal discovery: on an Undecided break, exclusion subsets of
 * the halt set are enumerated by increasing size (lexicographic within a
 * size, up to partial_max_exclude) and the whole elimination restarts on
 * the remaining columns; the first success is returned as Partial together
 * with the excluded set and the unresolved pairs.
 */
DiscoveryResult discover_partial(const TimeSeriesPanel& panel, const DiscoveryConfig& config);

}  // namespace timino
