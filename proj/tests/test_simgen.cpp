#include "medfx/audit.hpp"
#include "medfx/disentangle.hpp"
#include "medfx/error.hpp"
#include "medfx/random.hpp"
#include "medfx/regress.hpp"
#include "medfx/simgen.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace medfx;

namespace {

double mean_of(const std::vector<double> &v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double correlation(const std::vector<double> &a, const std::vector<double> &b) {
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

ErrorCode code_of(auto &&fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected medfx::Error");
    return ErrorCode::Io;
}

} // namespace

TEST_CASE("model helpers and parsing") {
    CHECK(parse_causal_model("M5") == CausalModel::M5);
    CHECK_FALSE(parse_causal_model("M0").has_value());
    CHECK(parse_scheduling("paired") == Scheduling::paired);
    CHECK(has_treatment_effect(CausalModel::M7));
    CHECK_FALSE(has_treatment_effect(CausalModel::M8));
    CHECK_FALSE(has_tod_effect(CausalModel::M4));
    CHECK_FALSE(has_cross_dependence(CausalModel::M9));
    const auto c = default_triplet_config(CausalModel::M8);
    CHECK(c.beta_treatment == 0.0);
    CHECK(c.beta_xt == 0.0);
    CHECK(c.beta_tod == 1.0);
}

TEST_CASE("structural zeros are enforced") {
    auto c = default_triplet_config(CausalModel::M8);
    c.beta_treatment = 0.5;
    CHECK(code_of([&] { validate(c); }) == ErrorCode::ConfigViolation);
    c = default_triplet_config(CausalModel::M7);
    c.beta_xt = 1.0;
    CHECK(code_of([&] { simulate_triplet(c); }) == ErrorCode::ConfigViolation);
    c = default_triplet_config(CausalModel::M1);
    c.beta_tod = 0.2;
    CHECK(code_of([&] { validate(c); }) == ErrorCode::ConfigViolation);
    c = default_triplet_config(CausalModel::M3);
    c.ar_phi = 1.0;
    CHECK(code_of([&] { validate(c); }) == ErrorCode::ConfigViolation);
    CohortSimConfig cohort;
    cohort.n_cases = 0;
    CHECK(code_of([&] { validate(cohort); }) == ErrorCode::ConfigViolation);
    cohort = {};
    cohort.noise_sd = -1;
    CHECK(code_of([&] { simulate_cohort(cohort); }) == ErrorCode::ConfigViolation);
}

TEST_CASE("M8 has no treatment association") {
    auto c = default_triplet_config(CausalModel::M8);
    c.n = 10000;
    c.seed = 4;
    const auto s = simulate_triplet(c);
    const double r = correlation(s.x_as_double(), s.y);
    MESSAGE("corr(x, y) under M8 " << r);
    CHECK(std::abs(r) < 0.05);
}

TEST_CASE("M1 time shift follows beta_xt") {
    auto c = default_triplet_config(CausalModel::M1);
    c.beta_xt = 2.0;
    c.n = 10000;
    c.seed = 8;
    const auto s = simulate_triplet(c);
    double sum[2] = {0, 0};
    double cnt[2] = {0, 0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        sum[s.x[i]] += s.t[i];
        cnt[s.x[i]] += 1;
    }
    const double diff = sum[1] / cnt[1] - sum[0] / cnt[0];
    MESSAGE("mean t difference " << diff);
    CHECK(diff == doctest::Approx(4.0).epsilon(0.025));
    for (double t : s.t) {
        CHECK(t >= 0.0);
        CHECK(t < 24.0);
    }
}

TEST_CASE("reruns are bit-identical and streams differ") {
    auto c = default_triplet_config(CausalModel::M3);
    c.seed = 17;
    const auto a = simulate_triplet(c);
    const auto b = simulate_triplet(c);
    CHECK(a.x == b.x);
    CHECK(a.t == b.t);
    CHECK(a.y == b.y);
    CHECK(a.timestamps == b.timestamps);
    const auto design = simulate_design(c);
    CHECK(simulate_outcome(c, design, 0) == a.y);
    CHECK(simulate_outcome(c, design, 1) != a.y);
    c.seed = 18;
    CHECK(simulate_triplet(c).y != a.y);
}

TEST_CASE("AR(1) noise has the requested lag-1 autocorrelation") {
    for (double phi : {-0.5, 0.3, 0.8}) {
        auto c = default_triplet_config(CausalModel::M9);
        c.beta_treatment = 0.0;
        c.beta_tod = 0.0;
        c.ar_phi = phi;
        c.n = 10000;
        c.seed = 23;
        const auto s = simulate_triplet(c);
        const double r1 = acf(s.y, 1);
        MESSAGE("phi " << phi << " -> acf1 " << r1);
        CHECK(std::abs(r1 - phi) < 0.05);
    }
}

TEST_CASE("scheduling parity") {
    auto c = default_triplet_config(CausalModel::M3);
    c.seed = 2;
    c.scheduling = Scheduling::paired;
    const auto paired = simulate_participant_records(c, "S01", 1);
    CHECK(parity_score(paired) == 1.0);
    c.scheduling = Scheduling::unpaired_random;
    const auto unpaired = simulate_participant_records(c, "S01", 1);
    CHECK(parity_score(unpaired) == 0.0);
}

TEST_CASE("simulated records round-trip through CSV ingestion") {
    auto c = default_triplet_config(CausalModel::M6);
    c.seed = 31;
    c.n = 60;
    const auto records = simulate_participant_records(c, "S07", 3, Activity::walk);
    const auto names = simulated_feature_names(3);
    CHECK(names == std::vector<std::string>{"f01", "f02", "f03"});
    std::stringstream csv;
    write_activity_csv(csv, records, names);
    const auto back = ingest_csv(csv);
    REQUIRE(back.records.size() == records.size());
    CHECK(back.rejected == 0);
    CHECK(back.feature_names == names);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back.records[i].participant_id == "S07");
        CHECK(back.records[i].activity == Activity::walk);
        CHECK(back.records[i].timestamp == records[i].timestamp);
        CHECK(back.records[i].med_status == records[i].med_status);
        for (const auto &n : names)
            CHECK(*back.records[i].feature(n) == doctest::Approx(*records[i].feature(n)).epsilon(1e-11));
    }
    const auto triplet = build_triplet(back.records, "f01", 0.0);
    const auto direct = simulate_triplet(c);
    CHECK(triplet.x == direct.x);
    for (std::size_t i = 0; i < triplet.size(); ++i)
        CHECK(triplet.t[i] == doctest::Approx(direct.t[i]).epsilon(1e-9));
}

TEST_CASE("M1-family data satisfy Y independent of T given X") {
    int rejected = 0;
    const int reps = 500;
    BatteryOptions options;
    options.backend = Backend::newey_west;
    for (int r = 0; r < reps; ++r) {
        auto c = default_triplet_config(CausalModel::M1);
        c.n = 500;
        c.seed = derive_seed(2024, static_cast<std::uint64_t>(r));
        const auto b = ci_battery(simulate_triplet(c), options);
        rejected += b.p[4] < 0.05;
    }
    const double rate = static_cast<double>(rejected) / reps;
    MESSAGE("H5 rejection rate under M1 " << rate);
    CHECK(rate >= 0.02);
    CHECK(rate <= 0.08);
}

TEST_CASE("cohort simulation") {
    CohortSimConfig c;
    c.n_cases = 3;
    c.n_controls = 2;
    c.samples_per_participant = 4;
    c.p_features = 3;
    c.seed = 5;
    const auto d = simulate_cohort(c);
    CHECK(d.rows() == 20);
    CHECK(d.width() == 3);
    CHECK(d.participants() == std::vector<std::string>{"P001", "P002", "P003", "P004", "P005"});
    CHECK(d.participant_labels().at("P003") == CohortLabel::case_);
    CHECK(d.participant_labels().at("P004") == CohortLabel::control);
    CHECK(simulate_cohort(c).features == d.features);
    std::stringstream csv;
    write_cohort_csv(csv, d);
    const auto back = ingest_cohort_csv(csv);
    CHECK(back.participant_ids == d.participant_ids);
    CHECK(back.labels == d.labels);
    CHECK(back.features.isApprox(d.features, 1e-11));
}

TEST_CASE("exchangeable cohort gives chance-level AUC") {
    CohortSimConfig c;
    c.n_cases = 5;
    c.n_controls = 5;
    c.samples_per_participant = 20;
    c.p_features = 4;
    c.fingerprint_sd = 0.0;
    c.class_effect = 0.0;
    c.seed = 6;
    ExperimentConfig e;
    e.repeats = 100;
    e.forest.n_trees = 25;
    e.seed = 7;
    const auto aucs = run_split_experiment(simulate_cohort(c), e);
    const double m = mean_of(aucs);
    MESSAGE("mean AUC without any signal " << m);
    CHECK(std::abs(m - 0.5) < 0.05);
}

TEST_CASE("participant identity is recoverable from fingerprints") {
    CohortSimConfig c;
    c.class_effect = 0.0;
    c.seed = 10;
    ExperimentConfig e;
    e.multiclass = true;
    e.repeats = 2;
    e.forest.n_trees = 100;
    e.seed = 3;
    const auto aucs = run_split_experiment(simulate_cohort(c), e);
    MESSAGE("identity AUC " << aucs[0] << ", " << aucs[1]);
    for (double a : aucs)
        CHECK(a >= 0.95);
}
