#include "medfx/regress.hpp"

#include "medfx/distributions.hpp"
#include "medfx/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace medfx {

namespace {

void require_shape(const Eigen::MatrixXd &design, const Eigen::VectorXd &y) {
    if (design.rows() != y.size())
        throw Error(ErrorCode::ShapeMismatch, "design and response lengths differ");
    if (design.rows() <= design.cols())
        throw Error(ErrorCode::InsufficientData, "regression needs more observations than coefficients");
}

Eigen::MatrixXd gram_inverse(const Eigen::MatrixXd &design) {
    const Eigen::MatrixXd gram = design.transpose() * design;
    return gram.ldlt().solve(Eigen::MatrixXd::Identity(design.cols(), design.cols()));
}

/// se, t and Student-t p-values from a covariance matrix.
void fill_tests(RegressionFit &fit) {
    const auto k = fit.coef.size();
    fit.se.resize(k);
    fit.tstat.resize(k);
    fit.pvalue.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double var = std::max(0.0, fit.covariance(j, j));
        fit.se[j] = std::sqrt(var);
        if (fit.degenerate) {
            fit.tstat[j] = fit.coef[j] == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.coef[j]);
            fit.pvalue[j] = fit.coef[j] == 0.0 ? 1.0 : 0.0;
            continue;
        }
        fit.tstat[j] = fit.se[j] > 0.0 ? fit.coef[j] / fit.se[j] : 0.0;
        fit.pvalue[j] = fit.se[j] > 0.0 ? dist::student_t_two_sided_p(fit.tstat[j], static_cast<double>(fit.df_resid)) : 1.0;
    }
}

} // namespace

std::string_view to_string(Backend backend) noexcept {
    switch (backend) {
    case Backend::ols: return "ols";
    case Backend::newey_west: return "newey-west";
    case Backend::arima_errors: return "arima";
    }
    return "ols";
}

std::optional<Backend> parse_backend(std::string_view text) {
    if (text == "ols")
        return Backend::ols;
    if (text == "newey-west")
        return Backend::newey_west;
    if (text == "arima")
        return Backend::arima_errors;
    return std::nullopt;
}

Eigen::MatrixXd design_with_intercept(std::initializer_list<std::span<const double>> columns) {
    const std::size_t n = columns.size() == 0 ? 0 : columns.begin()->size();
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size() + 1));
    design.col(0).setOnes();
    Eigen::Index c = 1;
    for (const auto &column : columns) {
        if (column.size() != n)
            throw Error(ErrorCode::ShapeMismatch, "design columns have different lengths");
        design.col(c++) = Eigen::Map<const Eigen::VectorXd>(column.data(), static_cast<Eigen::Index>(n));
    }
    return design;
}

RegressionFit ols_fit(const Eigen::MatrixXd &design, const Eigen::VectorXd &y) {
    require_shape(design, y);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols())
        throw Error(ErrorCode::RankDeficient, "design matrix is rank deficient");

    RegressionFit fit;
    fit.backend = Backend::ols;
    fit.coef = qr.solve(y);
    fit.residuals = y - design * fit.coef;
    const auto n = static_cast<std::size_t>(design.rows());
    const auto k = static_cast<std::size_t>(design.cols());
    fit.df_resid = n - k;
    const double rss = fit.residuals.squaredNorm();
    fit.degenerate = rss <= 1e-24 * std::max(1.0, y.squaredNorm());
    fit.sigma2 = rss / static_cast<double>(fit.df_resid);
    fit.covariance = fit.sigma2 * gram_inverse(design);
    fill_tests(fit);
    return fit;
}

Eigen::MatrixXd white_covariance(const Eigen::MatrixXd &design, const Eigen::VectorXd &residuals) {
    const Eigen::MatrixXd bread = gram_inverse(design);
    const Eigen::MatrixXd scores = design.array().colwise() * residuals.array();
    return bread * (scores.transpose() * scores) * bread;
}

BandwidthResult nw_bandwidth(const Eigen::MatrixXd &scores) {
    const auto n = static_cast<std::size_t>(scores.rows());
    if (n < 10)
        throw Error(ErrorCode::InsufficientData, "bandwidth selection needs at least 10 observations");
    const Eigen::VectorXd f = scores.rowwise().sum();
    const double nd = static_cast<double>(n);
    const auto window = static_cast<std::size_t>(std::floor(4.0 * std::pow(nd / 100.0, 2.0 / 9.0)));

    auto autocov = [&](std::size_t j) {
        return f.tail(static_cast<Eigen::Index>(n - j)).dot(f.head(static_cast<Eigen::Index>(n - j))) / nd;
    };
    double s0 = autocov(0);
    double s1 = 0.0;
    for (std::size_t j = 1; j <= std::min(window, n - 1); ++j) {
        const double sigma_j = autocov(j);
        s0 += 2.0 * sigma_j;
        s1 += 2.0 * static_cast<double>(j) * sigma_j;
    }
    if (!(s0 > 0.0))
        return {0, true};
    const double gamma = 1.1447 * std::cbrt((s1 / s0) * (s1 / s0));
    const double lag = std::floor(gamma * std::cbrt(nd));
    return {static_cast<std::size_t>(std::clamp(lag, 0.0, nd - 1.0)), false};
}

Eigen::MatrixXd newey_west_covariance(const Eigen::MatrixXd &design, const Eigen::VectorXd &residuals,
                                      std::size_t lag) {
    const Eigen::Index n = design.rows();
    const Eigen::MatrixXd scores = design.array().colwise() * residuals.array();
    Eigen::MatrixXd meat = scores.transpose() * scores / static_cast<double>(n);
    for (std::size_t l = 1; l <= lag && static_cast<Eigen::Index>(l) < n; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        const double weight = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
        const Eigen::MatrixXd omega =
            scores.bottomRows(n - li).transpose() * scores.topRows(n - li) / static_cast<double>(n);
        meat += weight * (omega + omega.transpose());
    }
    const Eigen::MatrixXd bread = gram_inverse(design);
    return static_cast<double>(n) * bread * meat * bread;
}

RegressionFit newey_west_fit(const Eigen::MatrixXd &design, const Eigen::VectorXd &y,
                             std::optional<std::size_t> bandwidth) {
    RegressionFit fit = ols_fit(design, y);
    fit.backend = Backend::newey_west;
    std::size_t lag = 0;
    if (bandwidth) {
        lag = *bandwidth;
    } else if (!fit.degenerate) {
        const Eigen::MatrixXd scores = design.array().colwise() * fit.residuals.array();
        lag = nw_bandwidth(scores).lag;
    }
    fit.bandwidth = lag;
    fit.covariance = newey_west_covariance(design, fit.residuals, lag);
    // Symmetrize away rounding so downstream checks see an exact symmetric matrix.
    fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
    fill_tests(fit);
    return fit;
}

double acf(std::span<const double> series, std::size_t lag) {
    const std::size_t n = series.size();
    if (lag < 1 || n <= lag)
        throw Error(ErrorCode::InvalidArgument, "acf needs n > lag >= 1");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    double denom = 0.0;
    for (double v : series)
        denom += (v - mean) * (v - mean);
    if (denom <= 0.0)
        throw Error(ErrorCode::ZeroVariance, "autocorrelation of a constant series");
    double num = 0.0;
    for (std::size_t t = lag; t < n; ++t)
        num += (series[t] - mean) * (series[t - lag] - mean);
    return num / denom;
}

LjungBox ljung_box(std::span<const double> residuals, std::size_t lag) {
    const std::size_t n = residuals.size();
    if (lag < 1 || n <= lag + 1)
        throw Error(ErrorCode::InvalidArgument, "Ljung-Box needs n > lag + 1");
    const double nd = static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t j = 1; j <= lag; ++j) {
        const double rho = acf(residuals, j);
        sum += rho * rho / (nd - static_cast<double>(j));
    }
    LjungBox out;
    out.q = nd * (nd + 2.0) * sum;
    out.pvalue = dist::chi_square_upper(out.q, static_cast<double>(lag));
    return out;
}

double kpss_level_statistic(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 3)
        throw Error(ErrorCode::InsufficientData, "KPSS needs at least 3 observations");
    const double nd = static_cast<double>(n);
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / nd;
    std::vector<double> e(n);
    for (std::size_t t = 0; t < n; ++t)
        e[t] = series[t] - mean;

    double partial = 0.0;
    double eta = 0.0;
    for (double v : e) {
        partial += v;
        eta += partial * partial;
    }
    const auto lag = static_cast<std::size_t>(std::trunc(4.0 * std::pow(nd / 100.0, 0.25)));
    double lrv = 0.0;
    for (double v : e)
        lrv += v * v;
    for (std::size_t l = 1; l <= lag && l < n; ++l) {
        double cov = 0.0;
        for (std::size_t t = l; t < n; ++t)
            cov += e[t] * e[t - l];
        lrv += 2.0 * (1.0 - static_cast<double>(l) / static_cast<double>(lag + 1)) * cov;
    }
    lrv /= nd;
    if (lrv <= 0.0)
        return 0.0;
    return eta / (nd * nd * lrv);
}

} // namespace medfx
