#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "timino/models.hpp"

namespace timino {

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Linear: return "linear";
        case Backend::Additive: return "gam";
        case Backend::GP: return "gp";
    }
    return "?";
}

FittedNodeModel fit_linear(const DesignMatrix& design, const FitOptions& opts) {
    const int n = design.rows();
    const int m = design.cols();
    if (n <= m) throw std::invalid_argument("linear fit needs more rows than columns");

    Eigen::MatrixXd X(n, m + 1);
    X.col(0).setOnes();
    if (m > 0) X.rightCols(m) = design.predictors;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(sv.size() - 1) < opts.rank_tolerance * sv(0)) {
        throw std::runtime_error("degenerate design");
    }
    Eigen::VectorXd beta = svd.solve(design.response);

    FittedNodeModel out;
    out.backend = Backend::Linear;
    out.residuals = design.response - X * beta;
    out.rss = out.residuals.squaredNorm();
    out.effective_dof = static_cast<double>(m + 1);
    LinearParams params;
    params.intercept = beta(0);
    params.coefficients = beta.tail(m);
    out.parameters = std::move(params);
    return out;
}

FittedNodeModel fit_node(Backend backend, const DesignMatrix& design, const FitOptions& opts) {
    switch (backend) {
        case Backend::Linear: return fit_linear(design, opts);
        case Backend::Additive: return fit_additive(design, opts);
        case Backend::GP: return fit_gp(design, opts);
    }
    throw std::invalid_argument("unknown backend");
}

int select_order_aic(const TimeSeriesPanel& panel, int target, const std::set<int>& regressors,
                     Backend backend, int p_max, bool include_instantaneous,
                     const FitOptions& opts) {
    if (p_max < 1) throw std::invalid_argument("p_max must be >= 1");
    int best_p = 1;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= p_max; ++p) {
        const LagSpec spec{p, include_instantaneous};
        // Shared response rows: first usable index comes from p_max for
        // every candidate, so the per-order AICs are comparable.
        const DesignMatrix design = build_lag_matrix(panel, target, regressors, spec, p_max);
        const FittedNodeModel fit = fit_node(backend, design, opts);
        const double N = static_cast<double>(design.rows());
        const double mean_sq = std::max(fit.rss / N, 1e-300);
        const double aic = N * std::log(mean_sq) + 2.0 * fit.effective_dof;
        if (aic < best_aic) {
            best_aic = aic;
            best_p = p;
        }
    }
    return best_p;
}

}  // namespace timino
