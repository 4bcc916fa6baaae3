#include "timino/discovery.hpp"

#include <algorithm>
#include <stdexcept>

#include "timino/design.hpp"
#include "timino/stats.hpp"

namespace timino {
namespace {

int shift_range(int order) { return std::max(order, 4); }

int sweep_test_count(int universe_size, bool self_included, int m) {
    const int full = 2 * m + 1;
    int count = (universe_size - (self_included ? 1 : 0)) * full;
    if (self_included) count += m;  // self test covers past shifts only
    return count;
}

/// Fits k on `regressors` and tests the residuals against every series in
/// `universe`. The Bonferroni factor counts the whole sweep.
NodeEvaluation evaluate_node(const TimeSeriesPanel& panel, int k,
                             const std::set<int>& regressors, const std::set<int>& universe,
                             const DiscoveryConfig& config) {
    FitOptions fit_opts = config.fit;
    fit_opts.seed = derive_seed(config.seed, 0x666974ULL + static_cast<std::uint64_t>(k));

    NodeEvaluation eval;
    eval.order = config.backend == Backend::GP
                     ? config.max_lag
                     : select_order_aic(panel, k, regressors, config.backend, config.max_lag,
                                        config.instantaneous, fit_opts);
    const LagSpec spec{eval.order, config.instantaneous};
    const DesignMatrix design = build_lag_matrix(panel, k, regressors, spec);
    eval.model = fit_node(config.backend, design, fit_opts);

    const int m = shift_range(eval.order);
    const bool self_included = universe.count(k) > 0;
    const int n_tests = sweep_test_count(static_cast<int>(universe.size()), self_included, m);

    const int first_t = panel.length() - static_cast<int>(eval.model.residuals.size());
    const Eigen::VectorXd& resid = eval.model.residuals;
    const std::span<const double> resid_span(resid.data(), static_cast<size_t>(resid.size()));

    eval.all_accept = true;
    for (int i : universe) {
        ShiftTestOptions opts;
        opts.max_shift = m;
        opts.alpha = config.alpha;
        opts.test = config.indep_method;
        opts.pvalue_method = PValueMethod::Gamma;
        opts.include_nonnegative_shifts = (i != k);
        opts.n_tests_override = n_tests;
        opts.max_points = config.hsic_max_points;
        opts.seed = derive_seed(config.seed,
                                0x74657374ULL + 131ULL * static_cast<std::uint64_t>(k) +
                                    static_cast<std::uint64_t>(i));

        // Align the series window with the residual rows (times first_t..T-1).
        std::vector<double> aligned(static_cast<size_t>(resid.size()));
        for (Eigen::Index r = 0; r < resid.size(); ++r) {
            aligned[static_cast<size_t>(r)] = panel.values(first_t + static_cast<int>(r), i);
        }
        IndependenceVerdict verdict = shifted_independence_test(resid_span, aligned, opts);
        eval.all_accept = eval.all_accept && !verdict.reject;
        // Candidate score: the verdict keeps its adjusted p clamped to 1, but
        // the "weakest dependence" comparison needs the unclamped value —
        // clamping collapses most candidates into ties at 1.
        double min_raw = 1.0;
        for (const auto& [shift, p] : verdict.per_shift_pvalues) {
            min_raw = std::min(min_raw, p);
        }
        eval.min_adjusted_p = std::min(eval.min_adjusted_p, min_raw * verdict.n_tests);
        eval.verdicts.emplace(i, std::move(verdict));
    }
    return eval;
}

struct EliminationOutcome {
    bool completed = false;
    std::map<int, std::set<int>> parents;
    std::vector<RoundRecord> rounds;
    std::set<int> halt_set;  // S at the break, when not completed
};

EliminationOutcome run_elimination(const TimeSeriesPanel& panel, const std::set<int>& start,
                                   const DiscoveryConfig& config) {
    EliminationOutcome out;
    std::set<int> s_set = start;
    while (s_set.size() > 1) {
        RoundRecord round;
        round.active.assign(s_set.begin(), s_set.end());

        int best_k = -1;
        double best_score = -1.0;
        for (int k : s_set) {
            CandidateRecord rec;
            rec.node = k;
            std::set<int> regressors = s_set;
            regressors.erase(k);
            try {
                const NodeEvaluation eval = evaluate_node(panel, k, regressors, s_set, config);
                rec.feasible = true;
                rec.accepted = eval.all_accept;
                rec.min_adjusted_p = eval.min_adjusted_p;
                rec.order = eval.order;
            } catch (const std::exception& e) {
                rec.feasible = false;
                rec.note = e.what();
            }
            if (rec.accepted && rec.min_adjusted_p > best_score) {
                best_score = rec.min_adjusted_p;
                best_k = k;
            }
            round.candidates.push_back(std::move(rec));
        }

        round.chosen = best_k;
        out.rounds.push_back(round);
        if (best_k < 0) {
            out.halt_set = s_set;
            return out;
        }
        std::set<int> parents = s_set;
        parents.erase(best_k);
        out.parents[best_k] = std::move(parents);
        s_set.erase(best_k);
    }
    if (s_set.size() == 1) out.parents[*s_set.begin()] = {};
    out.completed = true;
    return out;
}

SummaryGraph graph_from_parents(int node_count, const std::map<int, std::set<int>>& parents) {
    SummaryGraph g(node_count);
    for (const auto& [k, pa] : parents) {
        for (int i : pa) g.add_edge(i, k);
    }
    return g;
}

std::set<int> descendants_of(const SummaryGraph& graph, int node) {
    std::set<int> out;
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const auto& [a, b] : graph.edges) {
            if (a == u && !out.count(b)) {
                out.insert(b);
                stack.push_back(b);
            }
        }
    }
    return out;
}

/**
 * Whole-model check of the pruned graph: every node is refitted on its
 * final parents and its residuals are tested against every series — at all
 * shifts for non-descendants, past shifts only for the node itself and its
 * descendants (whose present and future carry the node's noise by
 * construction). One familywise Bonferroni count covers the whole sweep.
 * The elimination alone never re-tests a node against series that left S
 * before its removal, so a wrong graph can otherwise slip through with
 * locally clean residuals.
 */
bool validate_final_model(const TimeSeriesPanel& panel,
                          const std::map<int, std::set<int>>& parents,
                          const SummaryGraph& graph, const DiscoveryConfig& config,
                          PValueMethod pvalue_method, int n_permutations) {
    const int d = panel.series_count();
    struct NodePlan {
        int node = 0;
        int order = 1;
        Eigen::VectorXd residuals;
        std::set<int> past_only;  // self + descendants
    };
    std::vector<NodePlan> plans;
    int total_tests = 0;
    for (const auto& [k, pa] : parents) {
        NodePlan plan;
        plan.node = k;
        try {
            FitOptions fit_opts = config.fit;
            fit_opts.seed = derive_seed(config.seed, 0x76616cULL + static_cast<std::uint64_t>(k));
            plan.order = config.backend == Backend::GP
                             ? config.max_lag
                             : select_order_aic(panel, k, pa, config.backend, config.max_lag,
                                                config.instantaneous, fit_opts);
            const DesignMatrix design =
                build_lag_matrix(panel, k, pa, LagSpec{plan.order, config.instantaneous});
            plan.residuals = fit_node(config.backend, design, fit_opts).residuals;
        } catch (const std::exception&) {
            return false;  // the final model must at least fit
        }
        plan.past_only = descendants_of(graph, k);
        plan.past_only.insert(k);
        const int m = shift_range(plan.order);
        total_tests += static_cast<int>(plan.past_only.size()) * m +
                       (d - static_cast<int>(plan.past_only.size())) * (2 * m + 1);
        plans.push_back(std::move(plan));
    }

    for (const NodePlan& plan : plans) {
        const int m = shift_range(plan.order);
        const int first_t = panel.length() - static_cast<int>(plan.residuals.size());
        const std::span<const double> resid(plan.residuals.data(),
                                            static_cast<size_t>(plan.residuals.size()));
        for (int i = 0; i < d; ++i) {
            ShiftTestOptions opts;
            opts.max_shift = m;
            opts.alpha = config.alpha;
            opts.test = config.indep_method;
            opts.pvalue_method = pvalue_method;
            opts.n_permutations = n_permutations;
            opts.include_nonnegative_shifts = plan.past_only.count(i) == 0;
            opts.n_tests_override = total_tests;
            opts.max_points = config.hsic_max_points;
            opts.seed = derive_seed(config.seed,
                                    0x76616c32ULL + 131ULL * static_cast<std::uint64_t>(plan.node) +
                                        static_cast<std::uint64_t>(i));
            std::vector<double> aligned(resid.size());
            for (size_t r = 0; r < resid.size(); ++r) {
                aligned[r] = panel.values(first_t + static_cast<int>(r), i);
            }
            if (shifted_independence_test(resid, aligned, opts).reject) return false;
        }
    }
    return true;
}

}  // namespace

NodeEvaluation fit_timino_node(const TimeSeriesPanel& panel, int k, const std::set<int>& s_set,
                               const DiscoveryConfig& config) {
    if (s_set.count(k) == 0) throw std::invalid_argument("fit_timino_node: k must be in S");
    std::set<int> regressors = s_set;
    regressors.erase(k);
    return evaluate_node(panel, k, regressors, s_set, config);
}

std::map<int, std::set<int>> prune_parents(const TimeSeriesPanel& panel,
                                           const std::map<int, std::set<int>>& parents,
                                           const DiscoveryConfig& config) {
    std::map<int, std::set<int>> pruned;
    for (const auto& [k, original] : parents) {
        std::set<int> universe = original;
        universe.insert(k);
        std::set<int> current = original;
        bool dropped = true;
        while (dropped) {
            dropped = false;
            for (int j : std::vector<int>(current.begin(), current.end())) {
                std::set<int> trial = current;
                trial.erase(j);
                try {
                    const NodeEvaluation eval =
                        evaluate_node(panel, k, trial, universe, config);
                    if (eval.all_accept) {
                        current = std::move(trial);
                        dropped = true;
                    }
                } catch (const std::exception&) {
                    // refit failure: the parent stays
                }
            }
        }
        pruned[k] = std::move(current);
    }
    return pruned;
}

DiscoveryResult discover_full(const TimeSeriesPanel& panel, const DiscoveryConfig& config) {
    const int d = panel.series_count();
    if (config.max_lag < 1) throw std::invalid_argument("max_lag must be >= 1");
    if (config.alpha <= 0.0 || config.alpha >= 1.0) {
        throw std::invalid_argument("alpha must lie in (0,1)");
    }
    if (panel.length() <= 10 * config.max_lag) {
        throw std::invalid_argument("series too short for discovery (need T > 10 * max_lag)");
    }

    std::set<int> all;
    for (int i = 0; i < d; ++i) all.insert(i);

    DiscoveryResult result;
    EliminationOutcome elim = run_elimination(panel, all, config);
    result.rounds = elim.rounds;
    if (!elim.completed) {
        result.verdict = DiscoveryVerdict::Undecided;
        result.reason = "bad model fit";
        return result;
    }

    const std::map<int, std::set<int>> pruned = prune_parents(panel, elim.parents, config);
    const SummaryGraph graph = graph_from_parents(d, pruned);
    if (!validate_final_model(panel, pruned, graph, config, PValueMethod::Gamma,
                              config.n_permutations)) {
        result.verdict = DiscoveryVerdict::Undecided;
        result.reason = "final model rejected: residuals stay dependent";
        return result;
    }
    if (config.confirm_permutation && config.indep_method == IndepTest::HSIC &&
        !validate_final_model(panel, pruned, graph, config, PValueMethod::Permutation,
                              config.n_permutations)) {
        result.verdict = DiscoveryVerdict::Undecided;
        result.reason = "independence rejected by permutation confirmation";
        return result;
    }

    result.verdict = DiscoveryVerdict::Decided;
    result.graph = graph;
    return result;
}

DiscoveryResult discover_partial(const TimeSeriesPanel& panel, const DiscoveryConfig& config) {
    DiscoveryResult base = discover_full(panel, config);
    if (base.verdict != DiscoveryVerdict::Undecided || config.partial_max_exclude <= 0) {
        return base;
    }

    // Exclusion candidates come from the halt set: the S at the break.
    std::vector<int> halt;
    if (!base.rounds.empty()) halt = base.rounds.back().active;
    const int d = panel.series_count();
    const int max_size =
        std::min(config.partial_max_exclude, std::max(0, static_cast<int>(halt.size()) - 1));

    for (int size = 1; size <= max_size; ++size) {
        // Lexicographic subsets of `halt` (which is sorted ascending).
        std::vector<int> idx(static_cast<size_t>(size));
        for (int i = 0; i < size; ++i) idx[static_cast<size_t>(i)] = i;
        const int h = static_cast<int>(halt.size());
        while (true) {
            std::set<int> excluded;
            for (int i : idx) excluded.insert(halt[static_cast<size_t>(i)]);
            if (d - static_cast<int>(excluded.size()) >= 1) {
                // Restart the whole elimination on the remaining columns.
                std::vector<int> kept;
                for (int c = 0; c < d; ++c) {
                    if (!excluded.count(c)) kept.push_back(c);
                }
                Eigen::MatrixXd sub(panel.length(), static_cast<Eigen::Index>(kept.size()));
                std::vector<std::string> sub_names;
                for (size_t c = 0; c < kept.size(); ++c) {
                    sub.col(static_cast<Eigen::Index>(c)) = panel.values.col(kept[c]);
                    sub_names.push_back(panel.names[static_cast<size_t>(kept[c])]);
                }
                DiscoveryConfig sub_config = config;
                sub_config.partial_max_exclude = 0;
                const DiscoveryResult sub_result =
                    discover_full(make_panel(std::move(sub), std::move(sub_names)), sub_config);
                if (sub_result.verdict == DiscoveryVerdict::Decided) {
                    DiscoveryResult out;
                    out.verdict = DiscoveryVerdict::Partial;
                    out.excluded = excluded;
                    out.graph = SummaryGraph(d);
                    for (const auto& [u, v] : sub_result.graph.edges) {
                        out.graph.add_edge(kept[static_cast<size_t>(u)],
                                           kept[static_cast<size_t>(v)]);
                    }
                    // Map the sub-run diagnostics back to panel indices.
                    out.rounds = base.rounds;
                    for (RoundRecord round : sub_result.rounds) {
                        for (int& a : round.active) a = kept[static_cast<size_t>(a)];
                        for (CandidateRecord& c : round.candidates) {
                            c.node = kept[static_cast<size_t>(c.node)];
                        }
                        if (round.chosen >= 0) round.chosen = kept[static_cast<size_t>(round.chosen)];
                        out.rounds.push_back(std::move(round));
                    }
                    for (int w : excluded) {
                        for (int s : halt) {
                            if (!excluded.count(s)) out.unresolved.emplace_back(w, s);
                        }
                    }
                    return out;
                }
            }
            // next combination
            int i = size - 1;
            while (i >= 0 && idx[static_cast<size_t>(i)] == h - size + i) --i;
            if (i < 0) break;
            ++idx[static_cast<size_t>(i)];
            for (int j = i + 1; j < size; ++j) {
                idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
            }
        }
    }
    return base;
}

}  // namespace timino
