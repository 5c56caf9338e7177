#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace medfx {

struct LowessConfig {
    double span = 2.0 / 3.0;
    std::size_t robust_iters = 3;
};

/// Locally weighted linear smoother of y against the collection index 1..n
/// (tricube neighbourhood weights, bisquare robustness iterations).
std::vector<double> lowess_smooth(std::span<const double> y, const LowessConfig &config = {});

/// y minus its lowess fit. Throws TooFewPoints when n < 10.
std::vector<double> lowess_detrend(std::span<const double> y, const LowessConfig &config = {});

/// Midranks (1-based), ties share the average rank.
std::vector<double> midranks(std::span<const double> y);

/// Normal scores Phi^-1((r_i - 0.5) / n) of the midranks r_i.
std::vector<double> rank_quantile_transform(std::span<const double> y);

/// Outcome preprocessing: detrend, then normal-score transform.
std::vector<double> preprocess_outcome(std::span<const double> y, const LowessConfig &config = {});

} // namespace medfx
