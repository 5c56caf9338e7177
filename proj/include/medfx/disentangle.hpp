#pragma once

#include "medfx/arima.hpp"
#include "medfx/data.hpp"
#include "medfx/regress.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace medfx {

/// Markov equivalence classes distinguishable from the five CI tests.
enum class ModelClass {
    treatment_assoc, // M1 or M4
    tod_assoc,       // M2 or M5
    both_assoc,      // M3 or M6
    treatment_indep, // M7
    tod_indep,       // M8
    both_indep,      // M9
    unclassified,
};

enum class EffectLabel { treatment, time_of_day, both, none };

std::string_view to_string(ModelClass cls) noexcept;
std::string_view model_names(ModelClass cls) noexcept;
std::string_view to_string(EffectLabel label) noexcept;

/// dependence[i] is true when test H^{i+1} detected dependence:
/// T~X, Y~X, Y~T, Y~X|T, Y~T|X.
using DependencePattern = std::array<bool, 5>;

ModelClass classify_pattern(const DependencePattern &dependence) noexcept;
EffectLabel effect_label(ModelClass cls) noexcept;

/// True when the class has a T -> Y edge (models M2, M3, M5, M6, M8, M9).
bool has_tod_edge(ModelClass cls) noexcept;
/// True when the class has an X -> Y edge (models M1, M3, M4, M6, M7, M9).
bool has_treatment_edge(ModelClass cls) noexcept;

struct BatteryOptions {
    Backend backend = Backend::ols;
    /// Fit T ~ X with the selected backend instead of OLS.
    bool backend_for_h1 = false;
    OrderSearchConfig arima;
};

/// The four regressions T~X, Y~X, Y~T, Y~X+T and their five coefficient tests.
struct CIBattery {
    std::array<double, 5> p{};
    std::array<double, 5> coef{};
    Backend backend = Backend::ols;
    RegressionFit fit_t_x;
    RegressionFit fit_y_x;
    RegressionFit fit_y_t;
    RegressionFit fit_y_xt;
};

/// Fits the H^1 regression T ~ X.
RegressionFit fit_treatment_time(std::span<const int> x, std::span<const double> t, const BatteryOptions &options);

/// Runs the battery on one series. `shared_h1`, when given, supplies the
/// participant-level T ~ X fit shared by all features.
CIBattery ci_battery(const TripletSeries &series, const BatteryOptions &options,
                     const RegressionFit *shared_h1 = nullptr);

struct Disentangled {
    ModelClass cls = ModelClass::unclassified;
    EffectLabel label = EffectLabel::none;
};

/// Dependence is declared for adjusted p-values below alpha.
Disentangled disentangle_feature(const CIBattery &battery, const std::array<double, 5> &adjusted_p,
                                 double alpha = 0.05);

} // namespace medfx
