#include "medfx/uitest.hpp"

#include "medfx/error.hpp"

#include <algorithm>
#include <numeric>

namespace medfx {

std::vector<double> bh_adjust(std::span<const double> p) {
    const std::size_t m = p.size();
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0))
            throw Error(ErrorCode::InvalidArgument, "p-values must lie in [0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t rank = m; rank >= 1; --rank) {
        const std::size_t i = order[rank - 1];
        running = std::min(running, p[i] * static_cast<double>(m) / static_cast<double>(rank));
        adjusted[i] = std::min(1.0, running);
    }
    return adjusted;
}

std::string_view to_string(UiTarget target) noexcept {
    return target == UiTarget::treatment ? "treatment" : "time_of_day";
}

std::string_view to_string(ChosenTest test) noexcept {
    return test == ChosenTest::adjusted ? "adjusted" : "unadjusted";
}

PoolAdjustment adjust_pool(std::span<const FeatureBattery> batteries, const UiOptions &options) {
    if (batteries.empty())
        throw Error(ErrorCode::InvalidArgument, "union-intersection test needs at least one feature");
    const double shared = batteries.front().battery.p[0];
    std::vector<double> pool{shared};
    for (const auto &fb : batteries) {
        if (fb.battery.p[0] != shared)
            throw Error(ErrorCode::InvalidArgument, "feature batteries do not share the T ~ X test");
        pool.insert(pool.end(), fb.battery.p.begin() + 1, fb.battery.p.end());
    }
    const auto adjusted = bh_adjust(pool);

    PoolAdjustment out;
    for (std::size_t k = 0; k < batteries.size(); ++k) {
        std::array<double, 5> adj{};
        adj[0] = adjusted[0];
        for (std::size_t i = 1; i < 5; ++i)
            adj[i] = adjusted[1 + 4 * k + (i - 1)];
        out.adjusted.push_back(adj);
        const auto &decision_p = options.raw_pattern ? batteries[k].battery.p : adj;
        out.decisions.push_back(disentangle_feature(batteries[k].battery, decision_p, options.alpha));
    }
    return out;
}

UIResult ui_test(std::span<const FeatureBattery> batteries, UiTarget target, const UiOptions &options) {
    return ui_test(batteries, adjust_pool(batteries, options), target, options);
}

UIResult ui_test(std::span<const FeatureBattery> batteries, const PoolAdjustment &pool, UiTarget target,
                 const UiOptions &options) {
    UIResult result;
    result.target = target;
    result.ui_p = 1.0;
    for (std::size_t k = 0; k < batteries.size(); ++k) {
        const ModelClass cls = pool.decisions[k].cls;
        UiFeatureTest test;
        test.feature = batteries[k].feature;
        if (target == UiTarget::treatment) {
            test.chosen_test = has_tod_edge(cls) ? ChosenTest::adjusted : ChosenTest::unadjusted;
            test.adjusted_p = pool.adjusted[k][test.chosen_test == ChosenTest::adjusted ? 3 : 1];
        } else {
            test.chosen_test = has_treatment_edge(cls) ? ChosenTest::adjusted : ChosenTest::unadjusted;
            test.adjusted_p = pool.adjusted[k][test.chosen_test == ChosenTest::adjusted ? 4 : 2];
        }
        result.ui_p = std::min(result.ui_p, test.adjusted_p);
        result.per_feature.push_back(std::move(test));
    }
    result.reject = result.ui_p < options.alpha;
    return result;
}

} // namespace medfx
