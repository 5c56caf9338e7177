#include "medfx/preprocess.hpp"

#include "medfx/distributions.hpp"
#include "medfx/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace medfx {

namespace {

double cube(double v) { return v * v * v; }

/// Weighted local-linear estimate at index i from the window [left, right].
/// Returns false when every weight vanishes.
bool local_fit(std::span<const double> y, std::span<const double> robustness, bool use_robustness,
               std::size_t i, std::size_t left, std::size_t right, double &fitted) {
    const auto n = y.size();
    const double xs = static_cast<double>(i);
    const double range = static_cast<double>(n - 1);
    const double h = std::max(xs - static_cast<double>(left), static_cast<double>(right) - xs);
    const double h9 = 0.999 * h;
    const double h1 = 0.001 * h;

    std::vector<double> w(right - left + 1, 0.0);
    double total = 0.0;
    for (std::size_t j = left; j <= right; ++j) {
        const double r = std::abs(static_cast<double>(j) - xs);
        if (r > h9)
            continue;
        double wj = r <= h1 ? 1.0 : cube(1.0 - cube(r / h));
        if (use_robustness)
            wj *= robustness[j];
        w[j - left] = wj;
        total += wj;
    }
    if (total <= 0.0)
        return false;
    for (auto &wj : w)
        wj /= total;

    if (h > 0.0) {
        double center = 0.0;
        for (std::size_t j = left; j <= right; ++j)
            center += w[j - left] * static_cast<double>(j);
        double spread = 0.0;
        for (std::size_t j = left; j <= right; ++j)
            spread += w[j - left] * (static_cast<double>(j) - center) * (static_cast<double>(j) - center);
        // Slope only when the weighted abscissae are spread out.
        if (std::sqrt(spread) > 0.001 * range) {
            const double b = (xs - center) / spread;
            for (std::size_t j = left; j <= right; ++j)
                w[j - left] *= b * (static_cast<double>(j) - center) + 1.0;
        }
    }
    fitted = 0.0;
    for (std::size_t j = left; j <= right; ++j)
        fitted += w[j - left] * y[j];
    return true;
}

double median_abs(std::span<const double> values) {
    std::vector<double> a(values.size());
    std::transform(values.begin(), values.end(), a.begin(), [](double v) { return std::abs(v); });
    const std::size_t m1 = a.size() / 2;
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(m1), a.end());
    const double upper = a[m1];
    if (a.size() % 2 == 1)
        return upper;
    const double lower = *std::max_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(m1));
    return 0.5 * (lower + upper);
}

} // namespace

std::vector<double> lowess_smooth(std::span<const double> y, const LowessConfig &config) {
    const std::size_t n = y.size();
    if (!(config.span > 0.0 && config.span <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "lowess span must lie in (0, 1]");
    if (n < 2)
        return {y.begin(), y.end()};

    const auto ns = std::max<std::size_t>(
        2, std::min(n, static_cast<std::size_t>(config.span * static_cast<double>(n) + 1e-7)));
    std::vector<double> fitted(n, 0.0);
    std::vector<double> residuals(n, 0.0);
    std::vector<double> robustness(n, 1.0);

    for (std::size_t iter = 0; iter <= config.robust_iters; ++iter) {
        std::size_t left = 0;
        std::size_t right = ns - 1;
        for (std::size_t i = 0; i < n; ++i) {
            // Slide the window right while that shrinks the neighbourhood radius.
            while (right + 1 < n && (i - left) > (right + 1 - i)) {
                ++left;
                ++right;
            }
            if (!local_fit(y, robustness, iter > 0, i, left, right, fitted[i]))
                fitted[i] = y[i];
        }
        for (std::size_t i = 0; i < n; ++i)
            residuals[i] = y[i] - fitted[i];
        if (iter == config.robust_iters)
            break;

        const double scale = std::accumulate(residuals.begin(), residuals.end(), 0.0,
                                             [](double acc, double r) { return acc + std::abs(r); }) /
                             static_cast<double>(n);
        const double cmad = 6.0 * median_abs(residuals);
        if (cmad < 1e-7 * scale)
            break;
        const double c9 = 0.999 * cmad;
        const double c1 = 0.001 * cmad;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = std::abs(residuals[i]);
            if (r <= c1)
                robustness[i] = 1.0;
            else if (r <= c9)
                robustness[i] = std::pow(1.0 - (r / cmad) * (r / cmad), 2);
            else
                robustness[i] = 0.0;
        }
    }
    return fitted;
}

std::vector<double> lowess_detrend(std::span<const double> y, const LowessConfig &config) {
    if (y.size() < 10)
        throw Error(ErrorCode::TooFewPoints, "lowess detrending needs at least 10 points");
    const auto fitted = lowess_smooth(y, config);
    std::vector<double> residuals(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        residuals[i] = y[i] - fitted[i];
    return residuals;
}

std::vector<double> midranks(std::span<const double> y) {
    const std::size_t n = y.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    std::vector<double> ranks(n);
    for (std::size_t start = 0; start < n;) {
        std::size_t stop = start + 1;
        while (stop < n && y[order[stop]] == y[order[start]])
            ++stop;
        const double rank = 0.5 * static_cast<double>(start + 1 + stop);
        for (std::size_t k = start; k < stop; ++k)
            ranks[order[k]] = rank;
        start = stop;
    }
    return ranks;
}

std::vector<double> rank_quantile_transform(std::span<const double> y) {
    const auto ranks = midranks(y);
    const double n = static_cast<double>(y.size());
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = dist::normal_quantile((ranks[i] - 0.5) / n);
    return out;
}

std::vector<double> preprocess_outcome(std::span<const double> y, const LowessConfig &config) {
    const auto residuals = lowess_detrend(y, config);
    return rank_quantile_transform(residuals);
}

} // namespace medfx
