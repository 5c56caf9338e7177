#pragma once

#include "medfx/regress.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace medfx {

struct OrderSearchConfig {
    int max_p = 5;
    int max_q = 5;
    bool allow_differencing = true;
    /// Skips KPSS and the stepwise search when set.
    std::optional<ArimaOrder> fixed_order;
    /// Candidates whose AR or MA roots fall inside this radius are discarded.
    double min_root_modulus = 1.01;
};

/// Maps unconstrained reals to the coefficients of a stationary AR polynomial
/// 1 - c_1 z - ... - c_p z^p via partial autocorrelations tanh(raw).
Eigen::VectorXd pacf_to_ar(std::span<const double> raw);

/// Stationary state covariance of the ARMA state-space form (unit innovation
/// variance).
Eigen::MatrixXd arma_stationary_covariance(const Eigen::VectorXd &ar, const Eigen::VectorXd &ma);

/// Exact Gaussian ARMA filtering of several columns sharing one set of gains.
struct ArmaFilter {
    Eigen::MatrixXd innovations; // standardized, n x columns
    Eigen::VectorXd gain_scale;  // sqrt(F_t)
    double sum_log_f = 0.0;
    bool valid = true;
};

ArmaFilter arma_filter(const Eigen::VectorXd &ar, const Eigen::VectorXd &ma, const Eigen::MatrixXd &data);

/// Regression with ARMA errors at a fixed order on already-differenced data:
/// beta by GLS on the filtered columns, sigma^2 and the ARMA coefficients by
/// exact maximum likelihood.
struct ArmaRegression {
    ArimaOrder order;
    Eigen::VectorXd ar;
    Eigen::VectorXd ma;
    Eigen::VectorXd beta;
    Eigen::MatrixXd beta_covariance;
    Eigen::VectorXd innovations; // unstandardized one-step prediction errors
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aicc = 0.0;
    bool converged = true;
};

std::optional<ArmaRegression> fit_arma_regression(const Eigen::MatrixXd &design, const Eigen::VectorXd &y, int p,
                                                  int q);

/// Regression with ARIMA(p, d, q) errors. d in {0, 1} from a 5% KPSS test on
/// the OLS residuals, (p, q) by stepwise AICc search, z-tests for beta.
RegressionFit arima_errors_fit(const Eigen::MatrixXd &design, const Eigen::VectorXd &y,
                               const OrderSearchConfig &search = {});

} // namespace medfx
