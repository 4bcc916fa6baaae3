#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "timino/models.hpp"
#include "timino/stats.hpp"

namespace timino {
namespace {

struct LogTheta {
    double sf2 = 0.0;  // log signal variance
    double ls = 0.0;   // log length scale
    double sn2 = 0.0;  // log noise variance
};

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::VectorXd an = a.rowwise().squaredNorm();
    Eigen::VectorXd bn = b.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
    d2.colwise() += an;
    d2.rowwise() += bn.transpose();
    return d2.cwiseMax(0.0);
}

// Cholesky of K + jitter*I with escalation; throws when the matrix stays
// indefinite at the maximum allowed jitter.
Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& k, double max_rel_jitter) {
    const double diag_scale = k.diagonal().mean();
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    double jitter = 1e-10 * diag_scale;
    while (llt.info() != Eigen::Success) {
        if (jitter > max_rel_jitter * diag_scale) {
            throw std::runtime_error("kernel matrix not PD");
        }
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        llt.compute(kj);
        jitter *= 10.0;
    }
    return llt;
}

struct Objective {
    const Eigen::MatrixXd& d2;   // pairwise squared distances, train x train
    const Eigen::VectorXd& yc;   // centered response at train rows
    double max_rel_jitter;

    Eigen::MatrixXd se_kernel(const LogTheta& t) const {
        const double sf2 = std::exp(t.sf2);
        const double ls2 = std::exp(2.0 * t.ls);
        return ((-0.5 / ls2) * d2.array()).exp().matrix() * sf2;
    }

    double value(const LogTheta& t) const {
        const int n = static_cast<int>(yc.size());
        Eigen::MatrixXd ky = se_kernel(t);
        ky.diagonal().array() += std::exp(t.sn2);
        const auto llt = robust_cholesky(ky, max_rel_jitter);
        const Eigen::VectorXd alpha = llt.solve(yc);
        double logdet = 0.0;
        for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixLLT()(i, i));
        return -0.5 * yc.dot(alpha) - logdet - 0.5 * n * std::log(2.0 * M_PI);
    }

    double value_and_gradient(const LogTheta& t, LogTheta& grad) const {
        const int n = static_cast<int>(yc.size());
        const Eigen::MatrixXd kse = se_kernel(t);
        Eigen::MatrixXd ky = kse;
        const double sn2 = std::exp(t.sn2);
        ky.diagonal().array() += sn2;
        const auto llt = robust_cholesky(ky, max_rel_jitter);
        const Eigen::VectorXd alpha = llt.solve(yc);
        double logdet = 0.0;
        for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixLLT()(i, i));
        const double lml = -0.5 * yc.dot(alpha) - logdet - 0.5 * n * std::log(2.0 * M_PI);

        const Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        const Eigen::MatrixXd a = alpha * alpha.transpose() - kinv;
        const double ls2 = std::exp(2.0 * t.ls);
        grad.sf2 = 0.5 * a.cwiseProduct(kse).sum();
        grad.ls = 0.5 * a.cwiseProduct(kse.cwiseProduct(d2 / ls2)).sum();
        grad.sn2 = 0.5 * sn2 * a.trace();
        return lml;
    }
};

LogTheta clamp_theta(LogTheta t, const LogTheta& lo, const LogTheta& hi) {
    t.sf2 = std::clamp(t.sf2, lo.sf2, hi.sf2);
    t.ls = std::clamp(t.ls, lo.ls, hi.ls);
    t.sn2 = std::clamp(t.sn2, lo.sn2, hi.sn2);
    return t;
}

}  // namespace

FittedNodeModel fit_gp(const DesignMatrix& design, const FitOptions& opts) {
    const int n_all = design.rows();
    const int m = design.cols();
    if (n_all < 8) throw std::invalid_argument("gp fit needs at least 8 rows");

    auto rng = make_rng(opts.seed, 0x67707375u /* gp subsample stream */);
    const std::vector<int> train = sample_indices(n_all, std::min(n_all, opts.gp_max_n), rng);
    const int n = static_cast<int>(train.size());

    Eigen::MatrixXd xt(n, m);
    Eigen::VectorXd yt(n);
    for (int i = 0; i < n; ++i) {
        xt.row(i) = design.predictors.row(train[static_cast<size_t>(i)]);
        yt(i) = design.response(train[static_cast<size_t>(i)]);
    }

    // Standardize inputs by the training statistics.
    Eigen::RowVectorXd mu = xt.colwise().mean();
    Eigen::RowVectorXd sd(m);
    for (int j = 0; j < m; ++j) {
        const double v = (xt.col(j).array() - mu(j)).square().sum() / std::max(n - 1, 1);
        sd(j) = v > 1e-24 ? std::sqrt(v) : 1.0;
    }
    Eigen::MatrixXd xs = (xt.rowwise() - mu).array().rowwise() / sd.array();
    const double y_mean = yt.mean();
    Eigen::VectorXd yc = yt.array() - y_mean;

    const Eigen::MatrixXd d2 = squared_distances(xs, xs);

    // Median distance over a strided probe set; initial length scale.
    std::vector<double> probe;
    const int stride = std::max(1, n / 200);
    for (int i = 0; i < n; i += stride) {
        for (int j = i + stride; j < n; j += stride) probe.push_back(std::sqrt(d2(i, j)));
    }
    std::sort(probe.begin(), probe.end());
    double ls0 = probe.empty() ? 1.0 : probe[probe.size() / 2];
    if (ls0 <= 0.0) ls0 = 1.0;
    double var_y = yc.squaredNorm() / std::max(n - 1, 1);
    if (var_y <= 0.0) var_y = 1e-8;

    const Objective objective{d2, yc, opts.max_jitter};
    const LogTheta lo{std::log(var_y) - 18.0, std::log(ls0) - 7.0, std::log(var_y) - 18.0};
    const LogTheta hi{std::log(var_y) + 9.0, std::log(ls0) + 7.0, std::log(var_y) + 5.0};

    std::vector<LogTheta> starts = {
        {std::log(var_y), std::log(ls0), std::log(0.1 * var_y)},
        {std::log(var_y), std::log(ls0 / 4.0), std::log(0.5 * var_y)},
        {std::log(var_y), std::log(4.0 * ls0), std::log(0.01 * var_y)},
    };
    starts.resize(static_cast<size_t>(std::max(1, std::min(opts.gp_starts, 3))));

    LogTheta best{};
    double best_lml = -std::numeric_limits<double>::infinity();
    std::vector<double> start_lml;
    for (const LogTheta& s0 : starts) {
        LogTheta t = clamp_theta(s0, lo, hi);
        LogTheta grad{};
        double lml = objective.value_and_gradient(t, grad);
        start_lml.push_back(lml);
        double step = 0.1;
        for (int iter = 0; iter < opts.gp_max_iterations; ++iter) {
            const double gnorm = std::max({std::abs(grad.sf2), std::abs(grad.ls),
                                           std::abs(grad.sn2)});
            if (gnorm < 1e-5) break;
            bool accepted = false;
            for (int bt = 0; bt < 24; ++bt) {
                LogTheta cand = clamp_theta({t.sf2 + step * grad.sf2 / gnorm,
                                             t.ls + step * grad.ls / gnorm,
                                             t.sn2 + step * grad.sn2 / gnorm},
                                            lo, hi);
                double cand_lml;
                try {
                    cand_lml = objective.value(cand);
                } catch (const std::runtime_error&) {
                    step *= 0.5;
                    continue;
                }
                if (cand_lml > lml) {
                    const double improvement = cand_lml - lml;
                    t = cand;
                    lml = objective.value_and_gradient(t, grad);
                    step = std::min(step * 1.5, 2.0);
                    accepted = true;
                    if (improvement < 1e-9 * (1.0 + std::abs(lml))) iter = opts.gp_max_iterations;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
        }
        if (lml > best_lml) {
            best_lml = lml;
            best = t;
        }
    }

    // Final model at the best hyperparameters, with a GLS constant mean so
    // the training residuals average to zero.
    const double sf2 = std::exp(best.sf2);
    const double ls = std::exp(best.ls);
    const double sn2 = std::exp(best.sn2);
    Eigen::MatrixXd ky = objective.se_kernel(best);
    ky.diagonal().array() += sn2;
    const auto llt = robust_cholesky(ky, opts.max_jitter);
    const Eigen::VectorXd kinv_y = llt.solve(yc);
    const Eigen::VectorXd kinv_1 = llt.solve(Eigen::VectorXd::Ones(n));
    const double denom = kinv_1.sum();
    const double mean_shift = denom > 0.0 ? kinv_y.sum() / denom : 0.0;
    const Eigen::VectorXd alpha = kinv_y - mean_shift * kinv_1;

    // Posterior mean at every design row (training rows included).
    Eigen::MatrixXd xall = (design.predictors.rowwise() - mu).array().rowwise() / sd.array();
    const Eigen::MatrixXd d2_cross = squared_distances(xall, xs);
    const Eigen::MatrixXd k_cross =
        ((-0.5 / (ls * ls)) * d2_cross.array()).exp().matrix() * sf2;
    const Eigen::VectorXd prediction =
        (k_cross * alpha).array() + y_mean + mean_shift;

    FittedNodeModel out;
    out.backend = Backend::GP;
    out.residuals = design.response - prediction;
    out.rss = out.residuals.squaredNorm();
    const Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    out.effective_dof = static_cast<double>(n) - sn2 * kinv.trace();

    GPParams params;
    params.hyper = GPHyperparams{sf2, ls, sn2};
    params.log_marginal_likelihood = best_lml;
    params.start_lml = std::move(start_lml);
    params.train_size = n;
    out.parameters = std::move(params);
    return out;
}

}  // namespace timino
