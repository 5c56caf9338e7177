#pragma once

// Independent reference computations used as test oracles. They trade speed
// for directness and share no code with the library.

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

// Lowess against x = 0..n-1: neighbourhood radius is the ns-th smallest
// distance over all points; local line by weighted normal equations.
inline std::vector<double> lowess(const std::vector<double> &y, double span, int iterations) {
    const int n = static_cast<int>(y.size());
    const int ns = std::max(2, std::min(n, static_cast<int>(std::floor(span * n + 1e-7))));
    std::vector<double> robust(n, 1.0), fit(n, 0.0);
    for (int it = 0; it <= iterations; ++it) {
        for (int i = 0; i < n; ++i) {
            std::vector<double> dist;
            for (int j = 0; j < n; ++j)
                dist.push_back(std::abs(j - i));
            std::sort(dist.begin(), dist.end());
            const double h = dist[ns - 1];
            Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
            Eigen::Vector2d b = Eigen::Vector2d::Zero();
            double wsum = 0.0;
            for (int j = 0; j < n; ++j) {
                const double d = std::abs(j - i);
                if (d > 0.999 * h)
                    continue;
                const double u = d / h;
                double w = d <= 0.001 * h ? 1.0 : std::pow(1.0 - u * u * u, 3);
                if (it > 0)
                    w *= robust[j];
                const Eigen::Vector2d xv(1.0, j);
                a += w * xv * xv.transpose();
                b += w * xv * y[j];
                wsum += w;
            }
            if (wsum <= 0.0)
                fit[i] = y[i];
            else
                fit[i] = Eigen::Vector2d(1.0, i).dot(a.ldlt().solve(b));
        }
        if (it == iterations)
            break;
        std::vector<double> ares(n);
        double mean_abs = 0.0;
        for (int i = 0; i < n; ++i) {
            ares[i] = std::abs(y[i] - fit[i]);
            mean_abs += ares[i] / n;
        }
        std::vector<double> sorted = ares;
        std::sort(sorted.begin(), sorted.end());
        const double med = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
        const double cmad = 6.0 * med;
        if (cmad < 1e-7 * mean_abs)
            break;
        for (int i = 0; i < n; ++i) {
            const double r = ares[i] / cmad;
            robust[i] = r <= 0.001 ? 1.0 : r <= 0.999 ? std::pow(1.0 - r * r, 2) : 0.0;
        }
    }
    return fit;
}

// OLS via explicit normal equations.
inline Eigen::VectorXd ols_coef(const Eigen::MatrixXd &x, const Eigen::VectorXd &y) {
    return (x.transpose() * x).inverse() * (x.transpose() * y);
}

// Newey-West plug-in lag, written out step by step from the formulas.
inline int nw_lag(const Eigen::MatrixXd &v) {
    const int n = static_cast<int>(v.rows());
    std::vector<double> f(n);
    for (int t = 0; t < n; ++t)
        f[t] = v.row(t).sum();
    const int m = static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 2.0 / 9.0)));
    std::vector<double> sigma(m + 1, 0.0);
    for (int j = 0; j <= m; ++j) {
        for (int t = j; t < n; ++t)
            sigma[j] += f[t] * f[t - j];
        sigma[j] /= n;
    }
    double s0 = sigma[0], s1 = 0.0;
    for (int j = 1; j <= m; ++j) {
        s0 += 2.0 * sigma[j];
        s1 += 2.0 * j * sigma[j];
    }
    if (s0 <= 0.0)
        return 0;
    const double gamma = 1.1447 * std::pow(std::pow(s1 / s0, 2), 1.0 / 3.0);
    const int lag = static_cast<int>(std::floor(gamma * std::pow(n, 1.0 / 3.0)));
    return std::clamp(lag, 0, n - 1);
}

// Exact Gaussian log-likelihood of a zero-mean series with covariance
// Sigma_ij = sigma2 * acov[|i-j|] / acov[0] scaled by acov directly.
inline double gaussian_loglik(const Eigen::VectorXd &e, const std::vector<double> &acov) {
    const int n = static_cast<int>(e.size());
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s(i, j) = acov[std::abs(i - j)];
    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    const Eigen::VectorXd z = llt.matrixL().solve(e);
    double logdet = 0.0;
    for (int i = 0; i < n; ++i)
        logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * (n * std::log(2.0 * M_PI) + logdet + z.squaredNorm());
}

// Autocovariances of ARMA(1,1) with unit innovation variance:
// y_t = phi y_{t-1} + e_t + theta e_{t-1}.
inline std::vector<double> arma11_acov(double phi, double theta, int n) {
    std::vector<double> g(n);
    g[0] = (1.0 + 2.0 * phi * theta + theta * theta) / (1.0 - phi * phi);
    if (n > 1)
        g[1] = (1.0 + phi * theta) * (phi + theta) / (1.0 - phi * phi);
    for (int k = 2; k < n; ++k)
        g[k] = phi * g[k - 1];
    return g;
}

// Mann-Whitney AUC by enumerating every positive/negative pair.
inline double pairwise_auc(const std::vector<double> &s, const std::vector<int> &lab) {
    double wins = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (lab[i] == 1 && lab[j] == 0) {
                ++pairs;
                wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return wins / pairs;
}

// BH adjusted values from the definition min_{j >= rank} p_(j) m / j.
inline std::vector<double> bh(const std::vector<double> &p) {
    const int m = static_cast<int>(p.size());
    std::vector<double> out(m);
    for (int i = 0; i < m; ++i) {
        double best = 1.0;
        for (int k = 0; k < m; ++k) {
            if (p[k] < p[i])
                continue;
            // rank of p[k] counting ties upward
            int rank = 0;
            for (int l = 0; l < m; ++l)
                rank += p[l] <= p[k] ? 1 : 0;
            best = std::min(best, p[k] * m / rank);
        }
        out[i] = best;
    }
    return out;
}

inline double chi2_upper(double q, double df) {
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), q));
}

} // namespace oracle
