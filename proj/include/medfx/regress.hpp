#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace medfx {

enum class Backend { ols, newey_west, arima_errors };

std::string_view to_string(Backend backend) noexcept;
std::optional<Backend> parse_backend(std::string_view text);

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;

    auto operator<=>(const ArimaOrder &) const = default;
};

/// Coefficient table of a linear model fit; index 0 is the intercept when the
/// design carries one.
struct RegressionFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd se;
    Eigen::VectorXd tstat;
    Eigen::VectorXd pvalue;
    Eigen::MatrixXd covariance;
    Eigen::VectorXd residuals;
    std::size_t df_resid = 0;
    Backend backend = Backend::ols;
    std::optional<ArimaOrder> arima_order;
    std::optional<std::size_t> bandwidth; // Newey-West lag truncation
    double sigma2 = 0.0;
    double aicc = 0.0; // ARIMA backend only
    bool degenerate = false; // zero residual sum of squares; p-values forced to 0
};

/// [1, columns...] design matrix.
Eigen::MatrixXd design_with_intercept(std::initializer_list<std::span<const double>> columns);

/// Ordinary least squares with Student-t tests on n - k degrees of freedom.
RegressionFit ols_fit(const Eigen::MatrixXd &design, const Eigen::VectorXd &y);

/// White heteroscedasticity-only sandwich n (X'X)^-1 Omega_0 (X'X)^-1.
Eigen::MatrixXd white_covariance(const Eigen::MatrixXd &design, const Eigen::VectorXd &residuals);

struct BandwidthResult {
    std::size_t lag = 0;
    bool degenerate = false; // s0 <= 0, lag forced to 0
};

/// Newey-West (1994) plug-in lag for the Bartlett kernel computed from the
/// per-observation score rows v_t = x_t u_t.
BandwidthResult nw_bandwidth(const Eigen::MatrixXd &scores);

/// Bartlett-kernel HAC covariance n (X'X)^-1 S (X'X)^-1 at lag truncation L.
Eigen::MatrixXd newey_west_covariance(const Eigen::MatrixXd &design, const Eigen::VectorXd &residuals,
                                      std::size_t lag);

/// OLS coefficients with HAC standard errors. The lag is chosen by
/// nw_bandwidth unless given.
RegressionFit newey_west_fit(const Eigen::MatrixXd &design, const Eigen::VectorXd &y,
                             std::optional<std::size_t> bandwidth = std::nullopt);

/// Sample autocorrelation at `lag`. Throws ZeroVariance on constant input.
double acf(std::span<const double> series, std::size_t lag);

struct LjungBox {
    double q = 0.0;
    double pvalue = 1.0;
};

LjungBox ljung_box(std::span<const double> residuals, std::size_t lag = 1);

/// KPSS level-stationarity statistic with Bartlett long-run variance and the
/// short lag trunc(4 (n/100)^(1/4)).
double kpss_level_statistic(std::span<const double> series);
/// 5% critical value of the level-stationarity KPSS test.
inline constexpr double kKpssLevelCritical5 = 0.463;

} // namespace medfx
