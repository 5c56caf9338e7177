#include "medfx/audit.hpp"
#include "medfx/error.hpp"
#include "medfx/simgen.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace medfx;

namespace {

// Participant i gets counts[i] rows; the first n_cases participants are cases.
CohortDataset make_cohort(const std::vector<std::size_t> &counts, std::size_t n_cases) {
    CohortDataset d;
    d.feature_names = {"a", "b"};
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    d.features.resize(static_cast<Eigen::Index>(total), 2);
    std::size_t row = 0;
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t k = 0; k < counts[i]; ++k, ++row) {
            d.participant_ids.push_back("p" + std::to_string(i));
            d.labels.push_back(i < n_cases ? CohortLabel::case_ : CohortLabel::control);
            d.features(static_cast<Eigen::Index>(row), 0) = static_cast<double>(i);
            d.features(static_cast<Eigen::Index>(row), 1) = static_cast<double>(k);
        }
    return d;
}

std::size_t count_in(const std::vector<std::size_t> &rows, const CohortDataset &d, const std::string &pid) {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](std::size_t r) { return d.participant_ids[r] == pid; }));
}

CohortSimConfig fingerprint_cohort(std::uint64_t seed) {
    CohortSimConfig c;
    c.n_cases = 6;
    c.n_controls = 6;
    c.samples_per_participant = 30;
    c.p_features = 6;
    c.class_effect = 0.0;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("record-wise split halves each participant") {
    const auto d = make_cohort({4, 3, 6, 5}, 2);
    const auto plan = split_record_wise(d, 9);
    check_plan(d, plan);
    CHECK(count_in(plan.train_rows, d, "p0") == 2);
    CHECK(count_in(plan.test_rows, d, "p0") == 2);
    for (const char *pid : {"p1", "p3"}) {
        const auto tr = count_in(plan.train_rows, d, pid);
        const auto te = count_in(plan.test_rows, d, pid);
        CHECK(std::max(tr, te) - std::min(tr, te) == 1);
    }
    const auto again = split_record_wise(d, 9);
    CHECK(again.train_rows == plan.train_rows);
    // The odd row goes to either side across seeds.
    std::set<std::size_t> p1_train_sizes;
    for (std::uint64_t s = 0; s < 40; ++s)
        p1_train_sizes.insert(count_in(split_record_wise(d, s).train_rows, d, "p1"));
    CHECK(p1_train_sizes == std::set<std::size_t>{1, 2});

    const auto tiny = make_cohort({4, 1}, 1);
    CHECK_THROWS_WITH_AS(split_record_wise(tiny, 1), doctest::Contains("p1"), Error);
}

TEST_CASE("subject-wise split keeps participants whole and stratifies") {
    const auto d = make_cohort({5, 5, 5, 5, 5, 5, 5, 5}, 4);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto plan = split_subject_wise(d, 0.5, seed);
        check_plan(d, plan);
        std::set<std::string> train_pids, test_pids;
        for (auto r : plan.train_rows)
            train_pids.insert(d.participant_ids[r]);
        for (auto r : plan.test_rows)
            test_pids.insert(d.participant_ids[r]);
        CHECK(train_pids.size() == 4);
        CHECK(test_pids.size() == 4);
        int train_cases = 0;
        for (const auto &pid : train_pids) {
            CHECK(test_pids.count(pid) == 0);
            train_cases += pid < "p4";
        }
        CHECK(train_cases == 2);
    }
    const auto one_case = make_cohort({5, 5, 5}, 1);
    try {
        split_subject_wise(one_case, 0.5, 1);
        FAIL("expected TooFewParticipants");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::TooFewParticipants);
    }
}

TEST_CASE("check_plan rejects broken plans") {
    const auto d = make_cohort({4, 4, 4, 4}, 2);
    auto plan = split_subject_wise(d, 0.5, 3);
    auto overlap = plan;
    overlap.test_rows.push_back(overlap.train_rows.front());
    std::sort(overlap.test_rows.begin(), overlap.test_rows.end());
    CHECK_THROWS_AS(check_plan(d, overlap), Error);
    auto missing = plan;
    missing.test_rows.pop_back();
    CHECK_THROWS_AS(check_plan(d, missing), Error);
    auto mixed = split_record_wise(d, 3);
    mixed.strategy = SplitStrategy::subject_wise;
    CHECK_THROWS_AS(check_plan(d, mixed), Error);
}

TEST_CASE("collapse_median") {
    CohortDataset d;
    d.feature_names = {"x", "y", "z"};
    d.participant_ids = {"a", "a", "a", "b", "b", "b", "b"};
    d.labels = {CohortLabel::case_, CohortLabel::case_, CohortLabel::case_, CohortLabel::control, CohortLabel::control,
                CohortLabel::control, CohortLabel::control};
    const double na = std::nan("");
    d.features.resize(7, 3);
    d.features << 1, 5, na, //
        2, na, na,          //
        9, 7, na,           //
        1, 1, 0,            //
        2, 1, 1,            //
        3, 1, na,           //
        4, 1, 2;
    const auto c = collapse_median(d);
    REQUIRE(c.rows() == 2);
    CHECK(c.participant_ids == std::vector<std::string>{"a", "b"});
    CHECK(c.labels == std::vector<CohortLabel>{CohortLabel::case_, CohortLabel::control});
    CHECK(c.features(0, 0) == 2.0);
    CHECK(c.features(0, 1) == 6.0);
    CHECK(std::isnan(c.features(0, 2)));
    CHECK(c.features(1, 0) == 2.5);
    CHECK(c.features(1, 2) == 1.0);
}

TEST_CASE("label shuffles preserve their counts") {
    const auto d = make_cohort({3, 4, 5, 6, 3, 4, 5, 6}, 4);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto block = shuffle_labels(d, {LabelKind::block_shuffle, seed});
        const auto labels = block.participant_labels(); // throws unless each block shares one label
        CHECK(std::count_if(labels.begin(), labels.end(), [](auto &kv) { return kv.second == CohortLabel::case_; }) == 4);

        const auto full = shuffle_labels(d, {LabelKind::full_shuffle, seed});
        CHECK(std::count(full.labels.begin(), full.labels.end(), CohortLabel::case_) ==
              std::count(d.labels.begin(), d.labels.end(), CohortLabel::case_));
        CHECK(full.features == d.features);
    }
    CHECK(shuffle_labels(d, {LabelKind::original, 5}).labels == d.labels);
}

TEST_CASE("balanced subsampling and imputation") {
    const auto d = make_cohort({2, 2, 2, 2, 2, 2, 2}, 2);
    const auto b = balance_participants(d, 4);
    const auto labels = b.participant_labels();
    CHECK(labels.size() == 4);
    CHECK(std::count_if(labels.begin(), labels.end(), [](auto &kv) { return kv.second == CohortLabel::case_; }) == 2);

    Eigen::MatrixXd m(4, 2);
    m << 1, std::nan(""), 3, 2, std::nan(""), 4, 5, 6;
    const auto med = column_medians(m);
    CHECK(med(0) == 3.0);
    CHECK(med(1) == 4.0);
    impute_in_place(m, med);
    CHECK(m(2, 0) == 3.0);
    CHECK(m(0, 1) == 4.0);
    Eigen::MatrixXd empty_col = Eigen::MatrixXd::Constant(3, 1, std::nan(""));
    CHECK_THROWS_AS(column_medians(empty_col), Error);
}

TEST_CASE("experiment configuration validation") {
    ExperimentConfig c;
    c.multiclass = true;
    c.strategy = SplitStrategy::subject_wise;
    CHECK_THROWS_AS(validate(c), Error);
    c.strategy = SplitStrategy::record_wise;
    CHECK_NOTHROW(validate(c));
    c.labels = LabelKind::block_shuffle;
    CHECK_THROWS_AS(validate(c), Error);
    ExperimentConfig zero;
    zero.repeats = 0;
    CHECK_THROWS_AS(validate(zero), Error);
}

TEST_CASE("split experiments are reproducible and behave under shuffling") {
    const auto data = simulate_cohort(fingerprint_cohort(12));
    ExperimentConfig c;
    c.repeats = 12;
    c.forest.n_trees = 50;
    c.seed = 99;
    const auto a = run_split_experiment(data, c);
    CHECK(a.size() == 12);
    CHECK(a == run_split_experiment(data, c));

    c.labels = LabelKind::full_shuffle;
    c.repeats = 40;
    const auto full = run_split_experiment(data, c);
    const double full_mean = std::accumulate(full.begin(), full.end(), 0.0) / static_cast<double>(full.size());
    MESSAGE("full-shuffle mean AUC " << full_mean);
    CHECK(std::abs(full_mean - 0.5) < 0.05);

    c.labels = LabelKind::block_shuffle;
    c.repeats = 12;
    const auto block = run_split_experiment(data, c);
    const double block_mean = std::accumulate(block.begin(), block.end(), 0.0) / 12.0;
    c.strategy = SplitStrategy::subject_wise;
    const auto subject = run_split_experiment(data, c);
    const double subject_mean = std::accumulate(subject.begin(), subject.end(), 0.0) / 12.0;
    MESSAGE("record/block " << block_mean << ", subject/block " << subject_mean);
    CHECK(block_mean >= 0.9);
    CHECK(std::abs(subject_mean - 0.5) < 0.15);
}

TEST_CASE("summary statistics") {
    const std::vector<double> v{0.5, 0.9, 0.7, 0.6, 0.8};
    const auto s = summarize(v);
    CHECK(s.n == 5);
    CHECK(s.mean == doctest::Approx(0.7));
    CHECK(s.sd == doctest::Approx(std::sqrt(0.025)));
    CHECK(s.min == 0.5);
    CHECK(s.q1 == doctest::Approx(0.6));
    CHECK(s.median == doctest::Approx(0.7));
    CHECK(s.q3 == doctest::Approx(0.8));
    CHECK(s.max == 0.9);
    const std::vector<double> four{1, 2, 3, 4};
    CHECK(summarize(four).q1 == doctest::Approx(1.75));
}
