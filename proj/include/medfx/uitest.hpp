#pragma once

#include "medfx/disentangle.hpp"

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medfx {

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> bh_adjust(std::span<const double> p);

enum class UiTarget { treatment, time_of_day };
enum class ChosenTest { adjusted, unadjusted };

std::string_view to_string(UiTarget target) noexcept;
std::string_view to_string(ChosenTest test) noexcept;

struct FeatureBattery {
    std::string feature;
    CIBattery battery;
};

struct UiOptions {
    double alpha = 0.05;
    /// Classify features on raw instead of multiplicity-adjusted p-values.
    bool raw_pattern = false;
};

/// The 4p + 1 correction pool of one participant x activity: the shared T~X
/// test once plus tests 2-5 of every feature.
struct PoolAdjustment {
    std::vector<std::array<double, 5>> adjusted; // per feature, slot 0 is the shared test
    std::vector<Disentangled> decisions;
};

/// Throws InvalidArgument when the batteries disagree on the shared test.
PoolAdjustment adjust_pool(std::span<const FeatureBattery> batteries, const UiOptions &options = {});

struct UiFeatureTest {
    std::string feature;
    ChosenTest chosen_test = ChosenTest::unadjusted;
    double adjusted_p = 1.0;
};

struct UIResult {
    UiTarget target = UiTarget::treatment;
    std::vector<UiFeatureTest> per_feature;
    double ui_p = 1.0;
    bool reject = false;
};

/// Union-intersection test: the covariate-adjusted feature test is used when
/// the inferred class has the competing edge into Y, the unadjusted one
/// otherwise; the UI p-value is the smallest adjusted p-value.
UIResult ui_test(std::span<const FeatureBattery> batteries, UiTarget target, const UiOptions &options = {});
UIResult ui_test(std::span<const FeatureBattery> batteries, const PoolAdjustment &pool, UiTarget target,
                 const UiOptions &options = {});

} // namespace medfx
