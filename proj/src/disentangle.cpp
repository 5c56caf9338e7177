#include "medfx/disentangle.hpp"

#include "medfx/error.hpp"

namespace medfx {

std::string_view to_string(ModelClass cls) noexcept {
    switch (cls) {
    case ModelClass::treatment_assoc: return "TREATMENT_ASSOC";
    case ModelClass::tod_assoc: return "TOD_ASSOC";
    case ModelClass::both_assoc: return "BOTH_ASSOC";
    case ModelClass::treatment_indep: return "TREATMENT_INDEP";
    case ModelClass::tod_indep: return "TOD_INDEP";
    case ModelClass::both_indep: return "BOTH_INDEP";
    case ModelClass::unclassified: return "UNCLASSIFIED";
    }
    return "UNCLASSIFIED";
}

std::string_view model_names(ModelClass cls) noexcept {
    switch (cls) {
    case ModelClass::treatment_assoc: return "M1|M4";
    case ModelClass::tod_assoc: return "M2|M5";
    case ModelClass::both_assoc: return "M3|M6";
    case ModelClass::treatment_indep: return "M7";
    case ModelClass::tod_indep: return "M8";
    case ModelClass::both_indep: return "M9";
    case ModelClass::unclassified: return "none";
    }
    return "none";
}

std::string_view to_string(EffectLabel label) noexcept {
    switch (label) {
    case EffectLabel::treatment: return "treatment";
    case EffectLabel::time_of_day: return "time_of_day";
    case EffectLabel::both: return "both";
    case EffectLabel::none: return "none";
    }
    return "none";
}

ModelClass classify_pattern(const DependencePattern &dep) noexcept {
    struct Row {
        DependencePattern pattern;
        ModelClass cls;
    };
    // Conditional-independence table; every other pattern is unclassified.
    static constexpr Row table[] = {
        {{true, true, true, true, false}, ModelClass::treatment_assoc},
        {{true, true, true, false, true}, ModelClass::tod_assoc},
        {{true, true, true, true, true}, ModelClass::both_assoc},
        {{false, true, false, true, false}, ModelClass::treatment_indep},
        {{false, false, true, false, true}, ModelClass::tod_indep},
        {{false, true, true, true, true}, ModelClass::both_indep},
    };
    for (const auto &row : table)
        if (row.pattern == dep)
            return row.cls;
    return ModelClass::unclassified;
}

EffectLabel effect_label(ModelClass cls) noexcept {
    switch (cls) {
    case ModelClass::treatment_assoc:
    case ModelClass::treatment_indep: return EffectLabel::treatment;
    case ModelClass::tod_assoc:
    case ModelClass::tod_indep: return EffectLabel::time_of_day;
    case ModelClass::both_assoc:
    case ModelClass::both_indep: return EffectLabel::both;
    case ModelClass::unclassified: return EffectLabel::none;
    }
    return EffectLabel::none;
}

bool has_tod_edge(ModelClass cls) noexcept {
    const auto label = effect_label(cls);
    return label == EffectLabel::time_of_day || label == EffectLabel::both;
}

bool has_treatment_edge(ModelClass cls) noexcept {
    const auto label = effect_label(cls);
    return label == EffectLabel::treatment || label == EffectLabel::both;
}

namespace {

RegressionFit fit_with(Backend backend, const Eigen::MatrixXd &design, const Eigen::VectorXd &y,
                       const OrderSearchConfig &arima) {
    switch (backend) {
    case Backend::ols: return ols_fit(design, y);
    case Backend::newey_west: return newey_west_fit(design, y);
    case Backend::arima_errors: return arima_errors_fit(design, y, arima);
    }
    return ols_fit(design, y);
}

void check_size(std::size_t n, std::size_t width, Backend backend) {
    if (backend == Backend::arima_errors && n < 30)
        throw Error(ErrorCode::InsufficientData, "the ARIMA backend needs at least 30 observations");
    if (n < 2 * width)
        throw Error(ErrorCode::InsufficientData, "too few observations for the regression battery");
}

} // namespace

RegressionFit fit_treatment_time(std::span<const int> x, std::span<const double> t, const BatteryOptions &options) {
    const Backend backend = options.backend_for_h1 ? options.backend : Backend::ols;
    check_size(x.size(), 2, backend);
    const std::vector<double> xd(x.begin(), x.end());
    const Eigen::MatrixXd design = design_with_intercept({xd});
    const Eigen::VectorXd response = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
    return fit_with(backend, design, response, options.arima);
}

CIBattery ci_battery(const TripletSeries &series, const BatteryOptions &options, const RegressionFit *shared_h1) {
    const std::size_t n = series.size();
    if (series.x.size() != n || series.t.size() != n)
        throw Error(ErrorCode::ShapeMismatch, "triplet vectors differ in length");
    check_size(n, 3, options.backend);

    CIBattery battery;
    battery.backend = options.backend;
    battery.fit_t_x = shared_h1 ? *shared_h1 : fit_treatment_time(series.x, series.t, options);

    const std::vector<double> x = series.x_as_double();
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(series.y.data(), static_cast<Eigen::Index>(n));
    battery.fit_y_x = fit_with(options.backend, design_with_intercept({x}), y, options.arima);
    battery.fit_y_t = fit_with(options.backend, design_with_intercept({series.t}), y, options.arima);
    battery.fit_y_xt = fit_with(options.backend, design_with_intercept({x, series.t}), y, options.arima);

    battery.p = {battery.fit_t_x.pvalue[1], battery.fit_y_x.pvalue[1], battery.fit_y_t.pvalue[1],
                 battery.fit_y_xt.pvalue[1], battery.fit_y_xt.pvalue[2]};
    battery.coef = {battery.fit_t_x.coef[1], battery.fit_y_x.coef[1], battery.fit_y_t.coef[1],
                    battery.fit_y_xt.coef[1], battery.fit_y_xt.coef[2]};
    return battery;
}

Disentangled disentangle_feature(const CIBattery &, const std::array<double, 5> &adjusted_p, double alpha) {
    DependencePattern dep{};
    for (std::size_t i = 0; i < 5; ++i)
        dep[i] = adjusted_p[i] < alpha;
    Disentangled out;
    out.cls = classify_pattern(dep);
    out.label = effect_label(out.cls);
    return out;
}

} // namespace medfx
