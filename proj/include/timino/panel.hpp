#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace timino {

/**
 * A fully observed multivariate time series: T rows (consecutive time
 * steps) by d columns (component series). Entries must be finite; missing
 * values are rejected at construction, not imputed.
 */
struct TimeSeriesPanel {
    Eigen::MatrixXd values;           // T x d
    std::vector<std::string> names;   // one unique name per column

    int length() const { return static_cast<int>(values.rows()); }
    int series_count() const { return static_cast<int>(values.cols()); }

    Eigen::VectorXd column(int i) const { return values.col(i); }
    int index_of(const std::string& name) const;
};

/// Validates invariants (finite entries, T>=1, d>=1, unique names matching
/// column count) and returns the panel. Throws std::invalid_argument.
TimeSeriesPanel make_panel(Eigen::MatrixXd values, std::vector<std::string> names);

/// Lag structure of a node model: own/parent lags 1..max_lag, plus
/// same-time regressors for other series when include_instantaneous is set.
struct LagSpec {
    int max_lag = 1;
    bool include_instantaneous = false;
};

/**
 * CSV format: first row is the header with series names, each further row
 * holds the observations of one time step. Comma separator, '.' decimal
 * point, no missing cells. Parse errors name the offending row (1-based,
 * header = row 1).
 */
TimeSeriesPanel read_csv(std::istream& in);
TimeSeriesPanel read_csv_file(const std::string& path);
void write_csv(const TimeSeriesPanel& panel, std::ostream& out);
void write_csv_file(const TimeSeriesPanel& panel, const std::string& path);

}  // namespace timino
