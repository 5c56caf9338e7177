#include "medfx/disentangle.hpp"
#include "medfx/error.hpp"
#include "medfx/preprocess.hpp"
#include "medfx/simgen.hpp"
#include "medfx/uitest.hpp"

#include <doctest.h>

#include <map>

using namespace medfx;

namespace {

// The six identifiable rows, keyed by (H1..H5) dependence bits.
const std::map<std::array<int, 5>, std::pair<ModelClass, EffectLabel>> kTable{
    {{1, 1, 1, 1, 0}, {ModelClass::treatment_assoc, EffectLabel::treatment}},
    {{1, 1, 1, 0, 1}, {ModelClass::tod_assoc, EffectLabel::time_of_day}},
    {{1, 1, 1, 1, 1}, {ModelClass::both_assoc, EffectLabel::both}},
    {{0, 1, 0, 1, 0}, {ModelClass::treatment_indep, EffectLabel::treatment}},
    {{0, 0, 1, 0, 1}, {ModelClass::tod_indep, EffectLabel::time_of_day}},
    {{0, 1, 1, 1, 1}, {ModelClass::both_indep, EffectLabel::both}},
};

CIBattery battery_of(const TripletSeries &s, Backend backend = Backend::ols) {
    BatteryOptions options;
    options.backend = backend;
    return ci_battery(s, options);
}

} // namespace

TEST_CASE("classify_pattern over all 32 patterns") {
    int unclassified = 0;
    for (int bits = 0; bits < 32; ++bits) {
        DependencePattern dep{};
        std::array<int, 5> key{};
        for (int i = 0; i < 5; ++i) {
            key[static_cast<std::size_t>(i)] = (bits >> (4 - i)) & 1;
            dep[static_cast<std::size_t>(i)] = key[static_cast<std::size_t>(i)] == 1;
        }
        const ModelClass cls = classify_pattern(dep);
        const auto it = kTable.find(key);
        if (it == kTable.end()) {
            CHECK(cls == ModelClass::unclassified);
            CHECK(effect_label(cls) == EffectLabel::none);
            ++unclassified;
        } else {
            CHECK(cls == it->second.first);
            CHECK(effect_label(cls) == it->second.second);
        }
    }
    CHECK(unclassified == 26);
}

TEST_CASE("class names and edges") {
    CHECK(to_string(ModelClass::treatment_assoc) == "TREATMENT_ASSOC");
    CHECK(to_string(ModelClass::tod_indep) == "TOD_INDEP");
    CHECK(model_names(ModelClass::both_assoc) == "M3|M6");
    CHECK(has_tod_edge(ModelClass::tod_assoc));
    CHECK_FALSE(has_tod_edge(ModelClass::treatment_indep));
    CHECK(has_treatment_edge(ModelClass::both_indep));
    CHECK_FALSE(has_treatment_edge(ModelClass::tod_indep));
    CHECK_FALSE(has_treatment_edge(ModelClass::unclassified));
    CHECK_FALSE(has_tod_edge(ModelClass::unclassified));
}

TEST_CASE("disentangle_feature examples") {
    const CIBattery unused;
    const auto m7 = disentangle_feature(unused, {0.9, 0.01, 0.33, 0.01, 0.75}, 0.05);
    CHECK(m7.cls == ModelClass::treatment_indep);
    CHECK(m7.label == EffectLabel::treatment);
    const auto none = disentangle_feature(unused, {1, 1, 1, 1, 1}, 0.05);
    CHECK(none.cls == ModelClass::unclassified);
    CHECK(none.label == EffectLabel::none);
    const auto both = disentangle_feature(unused, {0.001, 0.001, 0.001, 0.001, 0.001}, 0.05);
    CHECK(both.cls == ModelClass::both_assoc);
    CHECK(both.label == EffectLabel::both);
}

TEST_CASE("ci_battery structure and shared T ~ X fit") {
    auto cfg = default_triplet_config(CausalModel::M3);
    cfg.seed = 4;
    const auto s = simulate_triplet(cfg);
    BatteryOptions options;
    options.backend = Backend::newey_west;
    const auto b = ci_battery(s, options);
    for (double p : b.p)
        CHECK((p >= 0.0 && p <= 1.0));
    CHECK(b.fit_t_x.backend == Backend::ols);
    CHECK(b.fit_y_x.backend == Backend::newey_west);
    CHECK(b.coef[0] == doctest::Approx(b.fit_t_x.coef[1]));
    CHECK(b.coef[4] == doctest::Approx(b.fit_y_xt.coef[2]));

    const auto shared = fit_treatment_time(s.x, s.t, options);
    const auto again = ci_battery(s, options, &shared);
    CHECK(again.p[0] == b.p[0]);

    options.backend_for_h1 = true;
    CHECK(ci_battery(s, options).fit_t_x.backend == Backend::newey_west);
}

TEST_CASE("ci_battery with a single arm is rank deficient") {
    auto cfg = default_triplet_config(CausalModel::M9);
    cfg.n = 40;
    auto s = simulate_triplet(cfg);
    std::fill(s.x.begin(), s.x.end(), 1);
    try {
        battery_of(s);
        FAIL("expected RankDeficient");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
    }
}

TEST_CASE("ci_battery size requirements") {
    auto cfg = default_triplet_config(CausalModel::M9);
    cfg.n = 20;
    const auto s = simulate_triplet(cfg);
    try {
        battery_of(s, Backend::arima_errors);
        FAIL("expected InsufficientData");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::InsufficientData);
    }
    CHECK_NOTHROW(battery_of(s, Backend::ols));
}

TEST_CASE("M7 data shows the M7 dependence pattern") {
    int raw_hits = 0, adjusted_hits = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        auto cfg = default_triplet_config(CausalModel::M7);
        cfg.n = 300;
        cfg.ar_phi = 0.0;
        cfg.seed = 1000 + static_cast<std::uint64_t>(r);
        const auto s = simulate_triplet(cfg);
        const auto b = battery_of(s);
        const auto &p = b.p;
        raw_hits += (p[0] > 0.05 && p[2] > 0.05 && p[4] > 0.05 && p[1] < 0.05 && p[3] < 0.05) ? 1 : 0;
        const std::vector<FeatureBattery> pool{{"y", b}};
        const auto adj = adjust_pool(pool).adjusted[0];
        adjusted_hits += (adj[0] > 0.05 && adj[2] > 0.05 && adj[4] > 0.05 && adj[1] < 0.05 && adj[3] < 0.05) ? 1 : 0;
    }
    MESSAGE("M7 pattern: raw " << raw_hits << "/" << reps << ", BH-adjusted " << adjusted_hits << "/" << reps);
    // Three independent null tests at 5% pass jointly with probability 0.95^3.
    CHECK(raw_hits >= 0.80 * reps);
    CHECK(adjusted_hits >= 0.90 * reps);
}

TEST_CASE("pure-noise outcome: any of tests 2-5 significant at about the nominal rate") {
    int any = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        TripletSimConfig cfg = default_triplet_config(CausalModel::M7);
        cfg.beta_treatment = 0.0;
        cfg.ar_phi = 0.0;
        cfg.seed = 5000 + static_cast<std::uint64_t>(r);
        const auto b = battery_of(simulate_triplet(cfg));
        any += (b.p[1] < 0.05 || b.p[2] < 0.05 || b.p[3] < 0.05 || b.p[4] < 0.05) ? 1 : 0;
    }
    const double rate = static_cast<double>(any) / reps;
    MESSAGE("P(any of H2..H5 rejected | noise) = " << rate << " (independent-tests bound " << 1 - std::pow(0.95, 4) << ")");
    // Tests 2/4 and 3/5 are nearly duplicates when X and T are independent,
    // so the rate sits between 1 - 0.95^2 and 1 - 0.95^4.
    CHECK(rate > 0.05);
    CHECK(rate < 1 - std::pow(0.95, 4) + 0.04);
}

TEST_CASE("decisions are invariant to positive affine rescaling of y") {
    for (auto model : {CausalModel::M1, CausalModel::M5, CausalModel::M9}) {
        auto cfg = default_triplet_config(model);
        cfg.seed = 77;
        auto s = simulate_triplet(cfg);
        auto scaled = s;
        for (auto &v : scaled.y)
            v = 250.0 * v + 17.0;
        s.y = preprocess_outcome(s.y);
        scaled.y = preprocess_outcome(scaled.y);
        CHECK(s.y == scaled.y);
        const auto a = battery_of(s, Backend::newey_west);
        const auto b = battery_of(scaled, Backend::newey_west);
        CHECK(disentangle_feature(a, a.p).cls == disentangle_feature(b, b.p).cls);
    }
}
