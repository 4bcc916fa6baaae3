#pragma once

#include <Eigen/Dense>
#include <set>
#include <vector>

#include "timino/panel.hpp"

namespace timino {

/**
 * Lagged regression problem for one target series. Column c of
 * `predictors` holds the series/lag combination described by
 * column_tags[c]; lag 0 marks an instantaneous (same time step) regressor.
 */
struct DesignMatrix {
    struct ColumnTag {
        int series = 0;
        int lag = 0;

        bool operator==(const ColumnTag&) const = default;
    };

    Eigen::MatrixXd predictors;      // N x m, no intercept column
    Eigen::VectorXd response;        // length N
    std::vector<ColumnTag> column_tags;

    int rows() const { return static_cast<int>(predictors.rows()); }
    int cols() const { return static_cast<int>(predictors.cols()); }
};

/**
 * Builds the design for regressing `target` at time t on its own lags
 * 1..p, the lags 1..p of every series in `regressors`, and (when
 * spec.include_instantaneous) the time-t value of each regressor other
 * than the target. Column order: target lags ascending, then per regressor
 * (ascending index) its lags ascending followed by its lag-0 column.
 *
 * Response rows start at t = first_response (default spec.max_lag), so
 * response[r] = panel[first_response + r, target].
 *
 * Throws std::invalid_argument when the series is too short for the lag
 * order or indices are out of range.
 */
DesignMatrix build_lag_matrix(const TimeSeriesPanel& panel, int target,
                              const std::set<int>& regressors, const LagSpec& spec,
                              int first_response = -1);

}  // namespace timino
