#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <variant>
#include <vector>

#include "timino/design.hpp"
#include "timino/panel.hpp"

namespace timino {

enum class Backend { Linear, Additive, GP };

const char* backend_name(Backend b);

/// Numerical knobs shared by the fitting backends. Defaults are the
/// documented constants; override per call when needed.
struct FitOptions {
    double rank_tolerance = 1e-10;     // smallest/largest singular value cutoff
    double backfit_tolerance = 1e-6;   // max fitted-value change, relative to response scale
    int backfit_max_iterations = 50;
    double max_jitter = 1e-4;          // relative to mean kernel diagonal
    int gp_max_n = 500;                // larger designs are subsampled (seeded)
    int gp_starts = 3;
    int gp_max_iterations = 100;
    std::uint64_t seed = 0;
};

struct LinearParams {
    Eigen::VectorXd coefficients;  // per design column
    double intercept = 0.0;
};

struct AdditiveColumn {
    bool linear_fallback = false;  // column had < 4 distinct values
    double lambda = 0.0;           // smoothing penalty chosen by GCV
    double dof = 0.0;              // trace of this column's smoother matrix
};

struct AdditiveParams {
    double intercept = 0.0;
    std::vector<AdditiveColumn> columns;
    int iterations = 0;
};

struct GPHyperparams {
    double signal_variance = 1.0;
    double length_scale = 1.0;
    double noise_variance = 1.0;
};

struct GPParams {
    GPHyperparams hyper;
    double log_marginal_likelihood = 0.0;
    std::vector<double> start_lml;   // objective value at each optimizer start
    int train_size = 0;              // rows actually used (after subsampling)
};

/**
 * Result of fitting one node's structural equation. Residuals always align
 * with the design's response rows; rss is their squared norm.
 */
struct FittedNodeModel {
    Backend backend = Backend::Linear;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    double effective_dof = 0.0;
    std::variant<LinearParams, AdditiveParams, GPParams> parameters;
};

/**
 * Ordinary least squares with an intercept. effective_dof = m + 1.
 * Throws std::invalid_argument when N <= m and std::runtime_error
 * ("degenerate design") when the design is rank-deficient below
 * rank_tolerance.
 */
FittedNodeModel fit_linear(const DesignMatrix& design, const FitOptions& opts = {});

/**
 * Additive model: one univariate cubic smoothing spline per predictor
 * column (penalized B-spline basis, penalty chosen by generalized
 * cross-validation), fitted by backfitting. Columns with fewer than 4
 * distinct values degrade to linear terms. effective_dof is the sum of the
 * per-column smoother traces plus one for the intercept.
 */
FittedNodeModel fit_additive(const DesignMatrix& design, const FitOptions& opts = {});

/**
 * fit_additive with per-column smoothing penalties pinned in advance
 * (entry < 0 keeps GCV selection for that column). Nested model
 * comparisons pin the shared columns to the smaller model's penalties so
 * the effective-dof difference is exactly the added columns' smoother
 * traces.
 */
FittedNodeModel fit_additive_pinned(const DesignMatrix& design,
                                    const std::vector<double>& pinned_lambda,
                                    const FitOptions& opts = {});

/**
 * Gaussian-process regression: squared-exponential kernel with a single
 * isotropic length scale on standardized inputs, Gaussian likelihood,
 * hyperparameters chosen by marginal-likelihood ascent from 3 starts.
 * Designs larger than opts.gp_max_n are fitted on a seeded uniform
 * subsample; residuals still cover every design row. effective_dof is the
 * trace of the smoother matrix K (K + sigma_n^2 I)^{-1}.
 */
FittedNodeModel fit_gp(const DesignMatrix& design, const FitOptions& opts = {});

FittedNodeModel fit_node(Backend backend, const DesignMatrix& design,
                         const FitOptions& opts = {});

/**
 * Smallest-AIC lag order in 1..p_max, with every candidate evaluated on
 * the response rows implied by p_max so the criteria are comparable.
 * AIC = N log(rss / N) + 2 effective_dof; ties break to the smaller order.
 */
int select_order_aic(const TimeSeriesPanel& panel, int target, const std::set<int>& regressors,
                     Backend backend, int p_max, bool include_instantaneous = false,
                     const FitOptions& opts = {});

}  // namespace timino
