#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "timino/models.hpp"

namespace timino {
namespace {

int count_distinct(const Eigen::VectorXd& x) {
    std::unordered_set<double> seen;
    for (Eigen::Index i = 0; i < x.size(); ++i) seen.insert(x(i));
    return static_cast<int>(seen.size());
}

// Uniform cubic B-spline basis: nseg equal segments over [lo, hi],
// nseg + 3 basis functions, evaluated through the segment-local matrix form.
Eigen::MatrixXd cubic_bspline_basis(const Eigen::VectorXd& x, double lo, double hi, int nseg) {
    const int k = nseg + 3;
    const double h = (hi - lo) / nseg;
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(x.size(), k);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        int seg = static_cast<int>(std::floor((x(i) - lo) / h));
        seg = std::clamp(seg, 0, nseg - 1);
        const double t = (x(i) - (lo + seg * h)) / h;
        const double t2 = t * t, t3 = t2 * t;
        basis(i, seg) += (1.0 - 3.0 * t + 3.0 * t2 - t3) / 6.0;
        basis(i, seg + 1) += (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0;
        basis(i, seg + 2) += (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0;
        basis(i, seg + 3) += t3 / 6.0;
    }
    return basis;
}

/// One univariate penalized smoother (second-difference penalty on the
/// B-spline coefficients). Columns with < 4 distinct values fall back to a
/// plain linear term.
class PSplineSmoother {
public:
    PSplineSmoother(const Eigen::VectorXd& x, int max_basis) {
        const int n = static_cast<int>(x.size());
        const int distinct = count_distinct(x);
        const double lo = x.minCoeff();
        const double hi = x.maxCoeff();
        if (distinct < 4 || hi <= lo) {
            linear_only_ = true;
            xc_ = x.array() - x.mean();
            sxx_ = xc_.squaredNorm();
            return;
        }
        const int k = std::clamp(max_basis, 4, 13);
        const int nseg = k - 3;
        basis_ = cubic_bspline_basis(x, lo, hi, nseg);
        btb_ = basis_.transpose() * basis_;
        Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(k - 2, k);
        for (int r = 0; r < k - 2; ++r) {
            d2(r, r) = 1.0;
            d2(r, r + 1) = -2.0;
            d2(r, r + 2) = 1.0;
        }
        penalty_ = d2.transpose() * d2;
        ridge_ = 1e-10 * btb_.trace() / k;
        const double scale = btb_.trace() / std::max(penalty_.trace(), 1e-12);
        for (int g = -6; g <= 8; ++g) lambda_grid_.push_back(scale * std::pow(10.0, g));

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(penalty_);
        curvature_basis_ = basis_ * eig.eigenvectors().rightCols(k - 2);
        curvature_penalty_ = eig.eigenvalues().tail(k - 2);
        (void)n;
    }

    struct Result {
        Eigen::VectorXd fitted;
        double dof = 0.0;
        double lambda = 0.0;
    };

    bool linear_only() const { return linear_only_; }

    /// Basis directions carrying curvature (the complement of the
    /// penalty's {constant, linear} null space) and their penalty weights.
    const Eigen::MatrixXd& curvature_basis() const { return curvature_basis_; }
    const Eigen::VectorXd& curvature_penalty() const { return curvature_penalty_; }

    Result fit_at(const Eigen::VectorXd& target, double lambda) const {
        Result r;
        r.lambda = lambda;
        if (linear_only_) {
            if (sxx_ <= 0.0) {
                r.fitted = Eigen::VectorXd::Zero(target.size());
                return r;
            }
            const double beta = xc_.dot(target) / sxx_;
            r.fitted = beta * xc_;
            r.dof = 1.0;
            return r;
        }
        const int k = static_cast<int>(btb_.rows());
        Eigen::MatrixXd lhs = btb_ + lambda * penalty_;
        lhs.diagonal().array() += ridge_;
        Eigen::LDLT<Eigen::MatrixXd> solver(lhs);
        const Eigen::VectorXd theta = solver.solve(basis_.transpose() * target);
        r.fitted = basis_ * theta;
        r.dof = solver.solve(btb_).trace();
        r.dof = std::clamp(r.dof, 0.0, static_cast<double>(k));
        return r;
    }

    Result fit_gcv(const Eigen::VectorXd& target) const {
        if (linear_only_) return fit_at(target, 0.0);
        const double n = static_cast<double>(target.size());
        Result best;
        double best_score = std::numeric_limits<double>::infinity();
        for (double lambda : lambda_grid_) {
            Result r = fit_at(target, lambda);
            // Flexibility cap per smoother: undersmoothed components soak up
            // other columns' signal through the backfit, which corrupts the
            // residual independence structure downstream.
            if (r.dof > kMaxSmootherDof) continue;
            const double denom = n - r.dof;
            if (denom < 1.0) continue;
            const double rss = (target - r.fitted).squaredNorm();
            const double score = n * rss / (denom * denom);
            if (score < best_score) {
                best_score = score;
                best = std::move(r);
            }
        }
        if (!std::isfinite(best_score)) return fit_at(target, lambda_grid_.back());
        return best;
    }

    static constexpr double kMaxSmootherDof = 6.0;

private:
    bool linear_only_ = false;
    Eigen::VectorXd xc_;
    double sxx_ = 0.0;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd btb_;
    Eigen::MatrixXd penalty_;
    Eigen::MatrixXd curvature_basis_;
    Eigen::VectorXd curvature_penalty_;
    double ridge_ = 0.0;
    std::vector<double> lambda_grid_;
};

}  // namespace

FittedNodeModel fit_additive(const DesignMatrix& design, const FitOptions& opts) {
    return fit_additive_pinned(design, {}, opts);
}

FittedNodeModel fit_additive_pinned(const DesignMatrix& design,
                                    const std::vector<double>& pinned_lambda,
                                    const FitOptions& opts) {
    const int n = design.rows();
    const int m = design.cols();
    const Eigen::VectorXd& y = design.response;

    FittedNodeModel out;
    out.backend = Backend::Additive;
    AdditiveParams params;

    if (m == 0) {
        params.intercept = y.mean();
        out.residuals = (y.array() - params.intercept).matrix();
        out.rss = out.residuals.squaredNorm();
        out.effective_dof = 1.0;
        out.parameters = std::move(params);
        return out;
    }
    if (n < 10 * m) {
        throw std::invalid_argument("additive fit needs at least 10 rows per predictor");
    }

    const int max_basis = std::clamp(n / (m + 1), 4, 13);
    std::vector<PSplineSmoother> smoothers;
    smoothers.reserve(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) smoothers.emplace_back(design.predictors.col(j), max_basis);

    // The fitted surface is split as
    //   intercept + X~ beta  +  sum_j g_j(x_j),    g_j _|_ {1, x_j},
    // with X~ the centered design. Lag columns are often strongly
    // correlated; plain Gauss-Seidel crawls through their shared linear
    // span, so the joint linear block is re-solved exactly every sweep and
    // only the nonlinear remainders g_j are backfitted.
    Eigen::MatrixXd centered_x(n, m);
    for (int j = 0; j < m; ++j) {
        centered_x.col(j) = design.predictors.col(j).array() - design.predictors.col(j).mean();
    }
    Eigen::MatrixXd lin_design(n, m + 1);
    lin_design.col(0).setOnes();
    lin_design.rightCols(m) = centered_x;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> lin_solver(lin_design);
    const bool linear_block_ok = lin_solver.rank() == m + 1;

    double intercept = y.mean();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::VectorXd> nonlin(static_cast<size_t>(m), Eigen::VectorXd::Zero(n));
    std::vector<double> lambda(static_cast<size_t>(m), 0.0);
    std::vector<double> dof(static_cast<size_t>(m), 0.0);

    // Once every penalty is frozen the smoothers are fixed linear operators
    // and the backfitting fixpoint solves one joint penalized least-squares
    // problem; solving it directly skips the slow crawl through correlated
    // columns. The sweeps after it verify the fixpoint under the stated
    // tolerance.
    auto joint_solve = [&]() -> bool {
        if (!linear_block_ok) return false;
        int extra = 0;
        for (int j = 0; j < m; ++j) {
            if (!smoothers[static_cast<size_t>(j)].linear_only()) {
                extra += static_cast<int>(smoothers[static_cast<size_t>(j)].curvature_basis().cols());
            }
        }
        Eigen::MatrixXd z(n, 1 + m + extra);
        Eigen::VectorXd penalty_diag = Eigen::VectorXd::Zero(1 + m + extra);
        z.col(0).setOnes();
        z.middleCols(1, m) = centered_x;
        int at = 1 + m;
        for (int j = 0; j < m; ++j) {
            const auto& sm = smoothers[static_cast<size_t>(j)];
            if (sm.linear_only()) continue;
            const int kj = static_cast<int>(sm.curvature_basis().cols());
            z.middleCols(at, kj) = sm.curvature_basis();
            penalty_diag.segment(at, kj) =
                lambda[static_cast<size_t>(j)] * sm.curvature_penalty();
            at += kj;
        }
        Eigen::MatrixXd gram = z.transpose() * z;
        gram.diagonal() += penalty_diag;
        gram.diagonal().array() += 1e-10 * gram.trace() / gram.rows();
        Eigen::LDLT<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) return false;
        const Eigen::VectorXd coef = solver.solve(z.transpose() * y);
        intercept = coef(0);
        beta = coef.segment(1, m);
        at = 1 + m;
        for (int j = 0; j < m; ++j) {
            const auto& sm = smoothers[static_cast<size_t>(j)];
            if (sm.linear_only()) {
                nonlin[static_cast<size_t>(j)].setZero();
                continue;
            }
            const int kj = static_cast<int>(sm.curvature_basis().cols());
            nonlin[static_cast<size_t>(j)] = sm.curvature_basis() * coef.segment(at, kj);
            at += kj;
        }
        return true;
    };

    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    Eigen::VectorXd total = Eigen::VectorXd::Constant(n, intercept);
    bool converged = false;
    constexpr int kFreezeIter = 3;  // GCV re-selects penalties before this
    int iter = 0;
    for (; iter < opts.backfit_max_iterations; ++iter) {
        Eigen::VectorXd previous_total = total;
        if (iter == kFreezeIter) joint_solve();

        if (linear_block_ok) {
            Eigen::VectorXd target = y;
            for (int j = 0; j < m; ++j) target -= nonlin[static_cast<size_t>(j)];
            const Eigen::VectorXd coef = lin_solver.solve(target);
            intercept = coef(0);
            beta = coef.tail(m);
        }
        Eigen::VectorXd linear_part = Eigen::VectorXd::Constant(n, intercept);
        linear_part += centered_x * beta;

        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd partial = y - linear_part;
            for (int l = 0; l < m; ++l) {
                if (l != j) partial -= nonlin[static_cast<size_t>(l)];
            }
            const bool pinned = static_cast<size_t>(j) < pinned_lambda.size() &&
                                pinned_lambda[static_cast<size_t>(j)] >= 0.0;
            // GCV re-selects the penalty only in the first sweeps; freezing it
            // afterwards keeps the fixed-point iteration from oscillating.
            PSplineSmoother::Result r =
                pinned ? smoothers[static_cast<size_t>(j)].fit_at(
                             partial, pinned_lambda[static_cast<size_t>(j)])
                : iter < kFreezeIter
                    ? smoothers[static_cast<size_t>(j)].fit_gcv(partial)
                    : smoothers[static_cast<size_t>(j)].fit_at(
                          partial, lambda[static_cast<size_t>(j)]);
            lambda[static_cast<size_t>(j)] = r.lambda;
            dof[static_cast<size_t>(j)] = r.dof;
            // strip the component's own {1, x_j} span into the linear block
            const double shift = r.fitted.mean();
            double slope = 0.0;
            const double sxx = centered_x.col(j).squaredNorm();
            if (sxx > 1e-24) {
                slope = centered_x.col(j).dot(r.fitted) / sxx;
            }
            intercept += shift;
            beta(j) += slope;
            linear_part.array() += shift;
            linear_part += slope * centered_x.col(j);
            nonlin[static_cast<size_t>(j)] =
                r.fitted - Eigen::VectorXd::Constant(n, shift) - slope * centered_x.col(j);
        }
        total = linear_part;
        for (int j = 0; j < m; ++j) total += nonlin[static_cast<size_t>(j)];
        if (std::getenv("TIMINO_BF_TRACE")) {
            std::fprintf(stderr, "bf iter %d: change %.3e lambdas", iter,
                         (total - previous_total).cwiseAbs().maxCoeff());
            for (int j = 0; j < m; ++j) std::fprintf(stderr, " %.3g", lambda[static_cast<size_t>(j)]);
            std::fprintf(stderr, "\n");
        }
        const double change = (total - previous_total).cwiseAbs().maxCoeff();
        if (change < opts.backfit_tolerance * scale) {
            converged = true;
            ++iter;
            break;
        }
    }
    if (!converged) throw std::runtime_error("backfitting diverged");

    out.residuals = y - total;
    out.rss = out.residuals.squaredNorm();
    out.effective_dof = 1.0;
    params.intercept = intercept;
    params.iterations = iter;
    for (int j = 0; j < m; ++j) {
        out.effective_dof += dof[static_cast<size_t>(j)];
        AdditiveColumn col;
        col.linear_fallback = smoothers[static_cast<size_t>(j)].linear_only();
        col.lambda = lambda[static_cast<size_t>(j)];
        col.dof = dof[static_cast<size_t>(j)];
        params.columns.push_back(col);
    }
    out.parameters = std::move(params);
    return out;
}

}  // namespace timino
