#include "medfx/arima.hpp"

#include "medfx/distributions.hpp"
#include "medfx/error.hpp"
#include "medfx/optim.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace medfx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Largest modulus among the reciprocal roots of 1 - c_1 z - ... - c_p z^p.
double max_reciprocal_root(const Eigen::VectorXd &coef) {
    const Eigen::Index p = coef.size();
    if (p == 0)
        return 0.0;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    companion.row(0) = coef.transpose();
    for (Eigen::Index i = 1; i < p; ++i)
        companion(i, i - 1) = 1.0;
    return companion.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd difference_rows(const Eigen::MatrixXd &m) {
    return m.bottomRows(m.rows() - 1) - m.topRows(m.rows() - 1);
}

} // namespace

Eigen::VectorXd pacf_to_ar(std::span<const double> raw) {
    const auto p = static_cast<Eigen::Index>(raw.size());
    Eigen::VectorXd coef(p);
    for (Eigen::Index j = 0; j < p; ++j)
        coef[j] = std::tanh(raw[static_cast<std::size_t>(j)]);
    Eigen::VectorXd work = coef;
    // Durbin-Levinson recursion from partial autocorrelations.
    for (Eigen::Index j = 1; j < p; ++j) {
        const double a = coef[j];
        for (Eigen::Index k = 0; k < j; ++k)
            work[k] -= a * coef[j - k - 1];
        coef.head(j) = work.head(j);
    }
    return coef;
}

Eigen::MatrixXd arma_stationary_covariance(const Eigen::VectorXd &ar, const Eigen::VectorXd &ma) {
    const Eigen::Index r = std::max(ar.size(), ma.size() + 1);
    Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(r, r);
    transition.col(0).head(ar.size()) = ar;
    for (Eigen::Index i = 0; i + 1 < r; ++i)
        transition(i, i + 1) = 1.0;
    Eigen::VectorXd loading = Eigen::VectorXd::Zero(r);
    loading[0] = 1.0;
    loading.segment(1, ma.size()) = ma;

    // vec(P) = (I - T (x) T)^-1 vec(R R')
    const Eigen::Index rr = r * r;
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(rr, rr);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < r; ++j)
            system.block(i * r, j * r, r, r) -= transition(i, j) * transition;
    const Eigen::MatrixXd rrt = loading * loading.transpose();
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(rrt.data(), rr);
    const Eigen::VectorXd vec = system.partialPivLu().solve(rhs);
    Eigen::MatrixXd cov = Eigen::Map<const Eigen::MatrixXd>(vec.data(), r, r);
    return 0.5 * (cov + cov.transpose());
}

ArmaFilter arma_filter(const Eigen::VectorXd &ar, const Eigen::VectorXd &ma, const Eigen::MatrixXd &data) {
    const Eigen::Index n = data.rows();
    const Eigen::Index cols = data.cols();
    const Eigen::Index r = std::max(ar.size(), ma.size() + 1);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(r);
    phi.head(ar.size()) = ar;
    Eigen::VectorXd loading = Eigen::VectorXd::Zero(r);
    loading[0] = 1.0;
    loading.segment(1, ma.size()) = ma;
    const Eigen::MatrixXd rrt = loading * loading.transpose();

    ArmaFilter out;
    out.innovations.resize(n, cols);
    out.gain_scale.resize(n);

    Eigen::MatrixXd state = Eigen::MatrixXd::Zero(r, cols);
    Eigen::MatrixXd cov = arma_stationary_covariance(ar, ma);
    if (!cov.allFinite()) {
        out.valid = false;
        return out;
    }
    bool steady = false;
    double f = 0.0;
    Eigen::VectorXd gain(r);
    Eigen::MatrixXd updated(r, r);
    Eigen::MatrixXd next(r, r);
    for (Eigen::Index t = 0; t < n; ++t) {
        if (!steady) {
            f = cov(0, 0);
            if (!(f > 0.0) || !std::isfinite(f)) {
                out.valid = false;
                return out;
            }
            gain = cov.col(0) / f;
        }
        const double root_f = std::sqrt(f);
        out.sum_log_f += std::log(f);
        out.gain_scale[t] = root_f;
        const Eigen::RowVectorXd innovation = data.row(t) - state.row(0);
        out.innovations.row(t) = innovation / root_f;

        // Measurement update, then the companion-form time update.
        state.noalias() += gain * innovation;
        const Eigen::RowVectorXd head = state.row(0);
        for (Eigen::Index i = 0; i + 1 < r; ++i)
            state.row(i) = phi[i] * head + state.row(i + 1);
        state.row(r - 1) = phi[r - 1] * head;

        if (!steady) {
            updated = cov - f * gain * gain.transpose();
            // next = T * updated * T'
            Eigen::MatrixXd left(r, r);
            for (Eigen::Index i = 0; i < r; ++i) {
                left.row(i) = phi[i] * updated.row(0);
                if (i + 1 < r)
                    left.row(i) += updated.row(i + 1);
            }
            for (Eigen::Index j = 0; j < r; ++j) {
                next.col(j) = phi[j] * left.col(0);
                if (j + 1 < r)
                    next.col(j) += left.col(j + 1);
            }
            next += rrt;
            steady = (next - cov).cwiseAbs().maxCoeff() < 1e-11;
            cov = next;
        }
    }
    return out;
}

std::optional<ArmaRegression> fit_arma_regression(const Eigen::MatrixXd &design, const Eigen::VectorXd &y, int p,
                                                  int q) {
    const Eigen::Index n = y.size();
    const Eigen::Index m = design.cols();
    Eigen::MatrixXd data(n, m + 1);
    data.col(0) = y;
    data.rightCols(m) = design;

    auto unpack = [p, q](const Eigen::VectorXd &u, Eigen::VectorXd &ar, Eigen::VectorXd &ma) {
        ar = pacf_to_ar(std::span<const double>(u.data(), static_cast<std::size_t>(p)));
        ma = -pacf_to_ar(std::span<const double>(u.data() + p, static_cast<std::size_t>(q)));
    };
    struct Profile {
        ArmaFilter filter;
        Eigen::VectorXd beta;
        double rss = 0.0;
    };
    auto profile = [&](const Eigen::VectorXd &ar, const Eigen::VectorXd &ma) {
        Profile pr{arma_filter(ar, ma, data), Eigen::VectorXd::Zero(m), 0.0};
        if (!pr.filter.valid)
            return pr;
        const Eigen::VectorXd ey = pr.filter.innovations.col(0);
        if (m > 0) {
            const Eigen::MatrixXd ex = pr.filter.innovations.rightCols(m);
            pr.beta = ex.colPivHouseholderQr().solve(ey);
            pr.rss = (ey - ex * pr.beta).squaredNorm();
        } else {
            pr.rss = ey.squaredNorm();
        }
        return pr;
    };
    auto objective = [&](const Eigen::VectorXd &u) {
        Eigen::VectorXd ar, ma;
        unpack(u, ar, ma);
        const Profile pr = profile(ar, ma);
        if (!pr.filter.valid || !(pr.rss > 0.0))
            return kInf;
        return 0.5 * (std::log(pr.rss / static_cast<double>(n)) + pr.filter.sum_log_f / static_cast<double>(n));
    };

    OptimResult opt;
    if (p + q == 0) {
        opt.x = Eigen::VectorXd();
        opt.converged = true;
    } else {
        opt = bfgs_minimize(objective, Eigen::VectorXd::Zero(p + q));
        if (!std::isfinite(opt.value))
            return std::nullopt;
    }

    ArmaRegression fit;
    fit.order = ArimaOrder{p, 0, q};
    fit.converged = opt.converged;
    unpack(opt.x, fit.ar, fit.ma);
    const Profile pr = profile(fit.ar, fit.ma);
    if (!pr.filter.valid)
        return std::nullopt;
    const double nd = static_cast<double>(n);
    fit.beta = pr.beta;
    fit.sigma2 = pr.rss / nd;
    if (m > 0) {
        const Eigen::MatrixXd ex = pr.filter.innovations.rightCols(m);
        const Eigen::MatrixXd gram = ex.transpose() * ex;
        fit.beta_covariance = fit.sigma2 * gram.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
        fit.innovations = (pr.filter.innovations.col(0) - ex * fit.beta).cwiseProduct(pr.filter.gain_scale);
    } else {
        fit.beta_covariance.resize(0, 0);
        fit.innovations = pr.filter.innovations.col(0).cwiseProduct(pr.filter.gain_scale);
    }
    fit.loglik = fit.sigma2 > 0.0
                     ? -0.5 * nd * (std::log(2.0 * std::numbers::pi * fit.sigma2) + 1.0) - 0.5 * pr.filter.sum_log_f
                     : kInf;
    const double npar = static_cast<double>(p + q + m + 1);
    fit.aicc = nd - npar - 1.0 > 0.0 ? -2.0 * fit.loglik + 2.0 * npar + 2.0 * npar * (npar + 1.0) / (nd - npar - 1.0) : kInf;
    return fit;
}

RegressionFit arima_errors_fit(const Eigen::MatrixXd &design, const Eigen::VectorXd &y,
                               const OrderSearchConfig &search) {
    if (y.size() < 30)
        throw Error(ErrorCode::InsufficientData, "regression with ARIMA errors needs at least 30 observations");
    const RegressionFit ols = ols_fit(design, y);

    int d = 0;
    if (search.fixed_order) {
        d = search.fixed_order->d;
        if (d < 0 || d > 1)
            throw Error(ErrorCode::InvalidArgument, "differencing order must be 0 or 1");
    } else if (search.allow_differencing) {
        const std::span<const double> resid(ols.residuals.data(), static_cast<std::size_t>(ols.residuals.size()));
        d = kpss_level_statistic(resid) > kKpssLevelCritical5 ? 1 : 0;
    }

    const Eigen::Index k = design.cols();
    Eigen::MatrixXd work_design = design;
    Eigen::VectorXd work_y = y;
    std::vector<Eigen::Index> kept;
    if (d == 1) {
        work_design = difference_rows(design);
        work_y = difference_rows(y);
        for (Eigen::Index j = 0; j < k; ++j)
            if (work_design.col(j).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, design.col(j).cwiseAbs().maxCoeff()))
                kept.push_back(j);
    } else {
        for (Eigen::Index j = 0; j < k; ++j)
            kept.push_back(j);
    }
    Eigen::MatrixXd reduced(work_design.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c)
        reduced.col(static_cast<Eigen::Index>(c)) = work_design.col(kept[c]);

    std::map<std::pair<int, int>, std::optional<ArmaRegression>> tried;
    const double max_reciprocal = 1.0 / search.min_root_modulus;
    auto evaluate = [&](int p, int q) -> double {
        const auto key = std::make_pair(p, q);
        auto it = tried.find(key);
        if (it == tried.end()) {
            auto fit = fit_arma_regression(reduced, work_y, p, q);
            if (fit && (max_reciprocal_root(fit->ar) >= max_reciprocal || max_reciprocal_root(-fit->ma) >= max_reciprocal))
                fit->aicc = kInf;
            it = tried.emplace(key, std::move(fit)).first;
        }
        return it->second ? it->second->aicc : kInf;
    };

    std::pair<int, int> best{0, 0};
    if (search.fixed_order) {
        best = {search.fixed_order->p, search.fixed_order->q};
        auto fit = fit_arma_regression(reduced, work_y, best.first, best.second);
        if (!fit)
            throw Error(ErrorCode::NonConvergence, "likelihood optimization failed for the requested order");
        tried[best] = std::move(fit);
    } else {
        double best_aicc = kInf;
        for (const auto &[p, q] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
            if (p > search.max_p || q > search.max_q)
                continue;
            const double value = evaluate(p, q);
            if (value < best_aicc) {
                best_aicc = value;
                best = {p, q};
            }
        }
        for (bool improved = std::isfinite(best_aicc); improved;) {
            improved = false;
            std::pair<int, int> step_best = best;
            for (int dp = -1; dp <= 1; ++dp) {
                for (int dq = -1; dq <= 1; ++dq) {
                    const int p = best.first + dp;
                    const int q = best.second + dq;
                    if ((dp == 0 && dq == 0) || p < 0 || q < 0 || p > search.max_p || q > search.max_q)
                        continue;
                    const double value = evaluate(p, q);
                    if (value < best_aicc) {
                        best_aicc = value;
                        step_best = {p, q};
                        improved = true;
                    }
                }
            }
            best = step_best;
        }
        if (!std::isfinite(best_aicc))
            throw Error(ErrorCode::NonConvergence, "likelihood optimization failed for every candidate order");
    }

    const ArmaRegression &chosen = *tried.at(best);
    RegressionFit fit;
    fit.backend = Backend::arima_errors;
    fit.arima_order = ArimaOrder{best.first, d, best.second};
    fit.sigma2 = chosen.sigma2;
    fit.aicc = chosen.aicc;
    fit.residuals = chosen.innovations;
    fit.df_resid = static_cast<std::size_t>(work_y.size()) - kept.size();
    fit.degenerate = chosen.sigma2 <= 1e-24 * std::max(1.0, work_y.squaredNorm() / static_cast<double>(work_y.size()));
    fit.coef = Eigen::VectorXd::Zero(k);
    fit.covariance = Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t a = 0; a < kept.size(); ++a) {
        fit.coef[kept[a]] = chosen.beta[static_cast<Eigen::Index>(a)];
        for (std::size_t b = 0; b < kept.size(); ++b)
            fit.covariance(kept[a], kept[b]) = chosen.beta_covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    // Columns differenced away (constants) are recovered as level offsets; they carry no test.
    std::vector<bool> is_kept(static_cast<std::size_t>(k), false);
    for (auto j : kept)
        is_kept[static_cast<std::size_t>(j)] = true;
    Eigen::VectorXd level = y;
    for (auto j : kept)
        level -= fit.coef[j] * design.col(j);

    fit.se.resize(k);
    fit.tstat.resize(k);
    fit.pvalue.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!is_kept[static_cast<std::size_t>(j)]) {
            fit.coef[j] = level.mean() / design(0, j);
            fit.se[j] = std::numeric_limits<double>::quiet_NaN();
            fit.tstat[j] = 0.0;
            fit.pvalue[j] = 1.0;
            continue;
        }
        fit.se[j] = std::sqrt(std::max(0.0, fit.covariance(j, j)));
        if (fit.degenerate) {
            fit.tstat[j] = fit.coef[j] == 0.0 ? 0.0 : std::copysign(kInf, fit.coef[j]);
            fit.pvalue[j] = fit.coef[j] == 0.0 ? 1.0 : 0.0;
        } else {
            fit.tstat[j] = fit.se[j] > 0.0 ? fit.coef[j] / fit.se[j] : 0.0;
            fit.pvalue[j] = fit.se[j] > 0.0 ? dist::normal_two_sided_p(fit.tstat[j]) : 1.0;
        }
    }
    return fit;
}

} // namespace medfx
