#include "medfx/error.hpp"
#include "medfx/random.hpp"
#include "medfx/uitest.hpp"
#include "oracles/oracles.hpp"

#include <doctest.h>

using namespace medfx;

namespace {

FeatureBattery battery(const std::string &name, std::array<double, 5> p) {
    FeatureBattery fb;
    fb.feature = name;
    fb.battery.p = p;
    return fb;
}

} // namespace

TEST_CASE("bh_adjust examples") {
    CHECK(bh_adjust(std::vector<double>{0.3}) == std::vector<double>{0.3});
    const auto adj = bh_adjust(std::vector<double>{0.9, 0.004, 0.2, 0.003, 0.6});
    const std::vector<double> expected{0.9, 0.01, 1.0 / 3.0, 0.01, 0.75};
    for (std::size_t i = 0; i < adj.size(); ++i)
        CHECK(adj[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    for (double v : bh_adjust(std::vector<double>(7, 0.2)))
        CHECK(v == doctest::Approx(0.2));
    CHECK_THROWS_AS(bh_adjust(std::vector<double>{0.5, 1.5}), Error);
}

TEST_CASE("bh_adjust matches the definition, is monotone and dominates raw") {
    Rng rng = make_rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> p(1 + uniform_index(rng, 12));
        for (auto &v : p)
            v = bernoulli(rng, 0.2) ? 0.25 : uniform01(rng) * (bernoulli(rng, 0.5) ? 0.05 : 1.0);
        const auto adj = bh_adjust(p);
        const auto ref = oracle::bh(p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(adj[i] == doctest::Approx(ref[i]).epsilon(1e-12));
            CHECK(adj[i] >= p[i] * (1.0 - 1e-14));
        }
        auto raised = p;
        const std::size_t k = uniform_index(rng, p.size());
        raised[k] = std::min(1.0, raised[k] + uniform01(rng) * 0.3);
        const auto adj_raised = bh_adjust(raised);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(adj_raised[i] >= adj[i] - 1e-15);
    }
}

TEST_CASE("worked 4p+1 example with one feature") {
    const std::vector<FeatureBattery> b{battery("f", {0.9, 0.004, 0.2, 0.003, 0.6})};
    const auto pool = adjust_pool(b);
    const std::array<double, 5> expected{0.9, 0.01, 1.0 / 3.0, 0.01, 0.75};
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(pool.adjusted[0][i] == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(pool.decisions[0].cls == ModelClass::treatment_indep);

    const auto treatment = ui_test(b, UiTarget::treatment);
    CHECK(treatment.per_feature[0].chosen_test == ChosenTest::unadjusted);
    CHECK(treatment.ui_p == doctest::Approx(0.01));
    CHECK(treatment.reject);

    const auto tod = ui_test(b, UiTarget::time_of_day);
    CHECK(tod.per_feature[0].chosen_test == ChosenTest::adjusted);
    CHECK(tod.ui_p == doctest::Approx(0.75));
    CHECK_FALSE(tod.reject);
}

TEST_CASE("all p = 1 accepts both targets") {
    const std::vector<FeatureBattery> b{battery("a", {1, 1, 1, 1, 1}), battery("b", {1, 1, 1, 1, 1})};
    for (auto target : {UiTarget::treatment, UiTarget::time_of_day}) {
        const auto r = ui_test(b, target);
        CHECK(r.ui_p == 1.0);
        CHECK_FALSE(r.reject);
    }
}

TEST_CASE("TOD_ASSOC feature uses the time-adjusted treatment test") {
    // Raw (0.01, 0.0002, 0.01, 0.2, 0.01) adjusts to (0.0125, 0.001, 0.0125, 0.2, 0.0125).
    const std::vector<FeatureBattery> b{battery("f", {0.01, 0.0002, 0.01, 0.2, 0.01})};
    const auto pool = adjust_pool(b);
    CHECK(pool.adjusted[0][1] == doctest::Approx(0.001));
    CHECK(pool.adjusted[0][3] == doctest::Approx(0.2));
    CHECK(pool.decisions[0].cls == ModelClass::tod_assoc);
    const auto r = ui_test(b, UiTarget::treatment);
    CHECK(r.per_feature[0].chosen_test == ChosenTest::adjusted);
    CHECK(r.ui_p == doctest::Approx(0.2));
    CHECK_FALSE(r.reject);
}

TEST_CASE("pool size is 4p+1 and the shared test must agree") {
    const std::vector<FeatureBattery> b{battery("a", {0.02, 0.5, 0.5, 0.5, 0.5}), battery("b", {0.02, 0.5, 0.5, 0.5, 0.5}),
                                        battery("c", {0.02, 0.5, 0.5, 0.5, 0.5})};
    // With 13 tests, 0.02 is the smallest: adjusted = 0.02 * 13.
    CHECK(adjust_pool(b).adjusted[1][0] == doctest::Approx(0.26));
    auto bad = b;
    bad[2].battery.p[0] = 0.03;
    CHECK_THROWS_AS(adjust_pool(bad), Error);
    CHECK_THROWS_AS(adjust_pool(std::vector<FeatureBattery>{}), Error);
}

TEST_CASE("ui_p is invariant to feature order and equals the minimum") {
    Rng rng = make_rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const double shared = uniform01(rng);
        std::vector<FeatureBattery> b;
        for (int k = 0; k < 6; ++k) {
            std::array<double, 5> p{shared};
            for (std::size_t i = 1; i < 5; ++i)
                p[i] = uniform01(rng) * (bernoulli(rng, 0.3) ? 0.01 : 1.0);
            b.push_back(battery("f" + std::to_string(k), p));
        }
        for (auto target : {UiTarget::treatment, UiTarget::time_of_day}) {
            const auto r = ui_test(b, target);
            double lowest = 1.0;
            for (const auto &f : r.per_feature)
                lowest = std::min(lowest, f.adjusted_p);
            CHECK(r.ui_p == lowest);
            CHECK(r.reject == (r.ui_p < 0.05));
            auto shuffled = b;
            shuffle_in_place(shuffled, rng);
            CHECK(ui_test(shuffled, target).ui_p == r.ui_p);
        }
    }
}

TEST_CASE("BH controls the FDR on synthetic pools") {
    Rng rng = make_rng(2718);
    double fdp_sum = 0.0;
    const int reps = 500;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> p(100);
        for (std::size_t i = 0; i < 100; ++i) {
            if (i < 90) {
                p[i] = uniform01(rng);
            } else {
                const double z = 3.0 + standard_normal(rng);
                p[i] = std::erfc(z / std::sqrt(2.0)) / 2.0;
            }
        }
        const auto adj = bh_adjust(p);
        int rejected = 0, false_rejections = 0;
        for (std::size_t i = 0; i < 100; ++i)
            if (adj[i] < 0.05) {
                ++rejected;
                false_rejections += i < 90 ? 1 : 0;
            }
        fdp_sum += rejected ? static_cast<double>(false_rejections) / rejected : 0.0;
    }
    const double fdr = fdp_sum / reps;
    MESSAGE("empirical FDR " << fdr);
    CHECK(fdr <= 0.06);
}
