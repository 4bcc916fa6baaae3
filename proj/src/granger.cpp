#include "timino/granger.hpp"

#include <cmath>
#include <stdexcept>

#include "timino/design.hpp"
#include "timino/stats.hpp"

namespace timino {

GrangerVerdict granger_f_test(double rss_restr, double rss_full, double p_restr, double p_full,
                              int N, double alpha) {
    const double tiny = 1e-9 * std::max({rss_restr, rss_full, 1.0});
    if (rss_full < 0.0) {
        if (rss_full < -tiny) throw std::invalid_argument("granger f-test: negative rss");
        rss_full = 0.0;
    }
    if (rss_restr < rss_full) {
        if (rss_full - rss_restr > tiny) {
            throw std::invalid_argument("granger f-test: restricted rss below full rss");
        }
        rss_restr = rss_full;
    }
    if (p_full <= p_restr) throw std::invalid_argument("granger f-test: p_full must exceed p_restr");
    if (static_cast<double>(N) <= p_full) {
        throw std::invalid_argument("granger f-test: N must exceed p_full");
    }

    const double df1 = p_full - p_restr;
    const double df2 = static_cast<double>(N) - p_full;
    GrangerVerdict v;
    if (rss_full <= 0.0) {
        v.statistic = rss_restr > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        v.p_value = rss_restr > 0.0 ? 0.0 : 1.0;
    } else {
        v.statistic = ((rss_restr - rss_full) / df1) / (rss_full / df2);
        v.p_value = fisher_f_sf(v.statistic, df1, df2);
    }
    v.causes = v.p_value < alpha;
    return v;
}

GrangerResult granger_linear(const TimeSeriesPanel& panel, int max_lag, double alpha) {
    const int d = panel.series_count();
    const LagSpec spec{max_lag, /*include_instantaneous=*/false};

    GrangerResult out;
    out.graph = SummaryGraph(d);
    for (int i = 0; i < d; ++i) {
        std::set<int> all_others;
        for (int s = 0; s < d; ++s) {
            if (s != i) all_others.insert(s);
        }
        FittedNodeModel full;
        bool full_ok = true;
        try {
            full = fit_linear(build_lag_matrix(panel, i, all_others, spec));
        } catch (const std::exception&) {
            full_ok = false;
        }
        const double p_full = static_cast<double>(d * max_lag + 1);
        const double p_restr = static_cast<double>((d - 1) * max_lag + 1);
        for (int j = 0; j < d; ++j) {
            if (j == i) continue;
            GrangerVerdict v;
            v.pair = {j, i};
            if (!full_ok) {
                v.degenerate = true;
            } else {
                try {
                    std::set<int> restricted = all_others;
                    restricted.erase(j);
                    const FittedNodeModel restr =
                        fit_linear(build_lag_matrix(panel, i, restricted, spec));
                    v = granger_f_test(restr.rss, full.rss, p_restr, p_full,
                                       static_cast<int>(full.residuals.size()), alpha);
                    v.pair = {j, i};
                } catch (const std::exception&) {
                    v = GrangerVerdict{};
                    v.pair = {j, i};
                    v.degenerate = true;
                }
            }
            if (v.causes) out.graph.add_edge(j, i);
            out.verdicts.push_back(v);
        }
    }
    return out;
}

namespace {

GrangerVerdict nonlinear_direction(const TimeSeriesPanel& pair_panel, int cause, int effect,
                                   int p, double alpha, const FitOptions& opts) {
    const LagSpec spec{p, /*include_instantaneous=*/false};
    const DesignMatrix restr_design = build_lag_matrix(pair_panel, effect, {}, spec);
    const DesignMatrix full_design = build_lag_matrix(pair_panel, effect, {cause}, spec);
    const FittedNodeModel restr = fit_additive(restr_design, opts);
    // Nested comparison: the shared own-lag smoothers keep the restricted
    // fit's penalties, so the dof difference is the added smoothers' traces.
    const auto& restr_params = std::get<AdditiveParams>(restr.parameters);
    std::vector<double> pinned(static_cast<size_t>(full_design.cols()), -1.0);
    for (size_t j = 0; j < restr_params.columns.size(); ++j) {
        pinned[j] = restr_params.columns[j].lambda;
    }
    const FittedNodeModel full = fit_additive_pinned(full_design, pinned, opts);
    GrangerVerdict v = granger_f_test(restr.rss, full.rss, restr.effective_dof,
                                      full.effective_dof,
                                      static_cast<int>(full.residuals.size()), alpha);
    v.pair = {cause, effect};
    return v;
}

}  // namespace

std::pair<GrangerVerdict, GrangerVerdict> granger_nonlinear_pairwise(
    std::span<const double> x, std::span<const double> y, int p, double alpha,
    const FitOptions& opts) {
    if (x.size() != y.size()) throw std::invalid_argument("granger pairwise: length mismatch");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(x.size()), 2);
    for (size_t t = 0; t < x.size(); ++t) {
        values(static_cast<Eigen::Index>(t), 0) = x[t];
        values(static_cast<Eigen::Index>(t), 1) = y[t];
    }
    const TimeSeriesPanel pair_panel = make_panel(std::move(values), {"x", "y"});
    return {nonlinear_direction(pair_panel, 0, 1, p, alpha, opts),
            nonlinear_direction(pair_panel, 1, 0, p, alpha, opts)};
}

GrangerResult granger_nonlinear_graph(const TimeSeriesPanel& panel, int p, double alpha,
                                      const FitOptions& opts) {
    const int d = panel.series_count();
    GrangerResult out;
    out.graph = SummaryGraph(d);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const Eigen::VectorXd xi = panel.column(i);
            const Eigen::VectorXd xj = panel.column(j);
            GrangerVerdict forward, backward;
            try {
                auto [fwd, bwd] = granger_nonlinear_pairwise(
                    std::span<const double>(xi.data(), static_cast<size_t>(xi.size())),
                    std::span<const double>(xj.data(), static_cast<size_t>(xj.size())), p, alpha,
                    opts);
                forward = fwd;
                backward = bwd;
            } catch (const std::exception&) {
                forward.degenerate = backward.degenerate = true;
            }
            forward.pair = {i, j};
            backward.pair = {j, i};
            if (forward.causes) out.graph.add_edge(i, j);
            if (backward.causes) out.graph.add_edge(j, i);
            out.verdicts.push_back(forward);
            out.verdicts.push_back(backward);
        }
    }
    return out;
}

}  // namespace timino
