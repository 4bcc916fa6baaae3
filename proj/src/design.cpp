#include "timino/design.hpp"

#include <stdexcept>

namespace timino {

DesignMatrix build_lag_matrix(const TimeSeriesPanel& panel, int target,
                              const std::set<int>& regressors, const LagSpec& spec,
                              int first_response) {
    const int T = panel.length();
    const int d = panel.series_count();
    const int p = spec.max_lag;
    if (p < 1) throw std::invalid_argument("lag order must be >= 1");
    if (target < 0 || target >= d) throw std::invalid_argument("target series out of range");
    for (int r : regressors) {
        if (r < 0 || r >= d) throw std::invalid_argument("regressor series out of range");
    }
    const int start = first_response < 0 ? p : first_response;
    if (start < p) throw std::invalid_argument("first response row precedes available lags");
    if (T <= start) throw std::invalid_argument("series too short for lag order");

    std::vector<DesignMatrix::ColumnTag> tags;
    for (int lag = 1; lag <= p; ++lag) tags.push_back({target, lag});
    for (int r : regressors) {
        if (r == target) continue;  // own lags already present, never a lag-0 column
        for (int lag = 1; lag <= p; ++lag) tags.push_back({r, lag});
        if (spec.include_instantaneous) tags.push_back({r, 0});
    }

    const int N = T - start;
    const int m = static_cast<int>(tags.size());
    DesignMatrix out;
    out.predictors.resize(N, m);
    out.response.resize(N);
    out.column_tags = tags;
    for (int row = 0; row < N; ++row) {
        const int t = start + row;
        out.response(row) = panel.values(t, target);
        for (int c = 0; c < m; ++c) {
            out.predictors(row, c) = panel.values(t - tags[static_cast<size_t>(c)].lag,
                                                  tags[static_cast<size_t>(c)].series);
        }
    }
    return out;
}

}  // namespace timino
