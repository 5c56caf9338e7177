#include "medfx/audit.hpp"

#include "medfx/error.hpp"
#include "medfx/metrics.hpp"
#include "medfx/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace medfx {

namespace {

constexpr std::uint64_t kSaltLabels = 1;
constexpr std::uint64_t kSaltSplit = 2;
constexpr std::uint64_t kSaltForest = 3;
constexpr std::uint64_t kSaltBalance = 4;

double median_of(std::vector<double> &values) {
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

CohortDataset select_rows(const CohortDataset &data, std::span<const std::size_t> rows) {
    CohortDataset out;
    out.feature_names = data.feature_names;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.participant_ids.push_back(data.participant_ids[rows[i]]);
        out.labels.push_back(data.labels[rows[i]]);
        out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

} // namespace

std::string_view to_string(SplitStrategy strategy) noexcept {
    switch (strategy) {
    case SplitStrategy::record_wise:
        return "record";
    case SplitStrategy::subject_wise:
        return "subject";
    case SplitStrategy::collapsed:
        return "collapsed";
    }
    return "record";
}

std::string_view to_string(LabelKind kind) noexcept {
    switch (kind) {
    case LabelKind::original:
        return "original";
    case LabelKind::block_shuffle:
        return "block-shuffle";
    case LabelKind::full_shuffle:
        return "full-shuffle";
    }
    return "original";
}

std::optional<SplitStrategy> parse_split_strategy(std::string_view text) {
    for (auto s : {SplitStrategy::record_wise, SplitStrategy::subject_wise, SplitStrategy::collapsed})
        if (text == to_string(s))
            return s;
    return std::nullopt;
}

std::optional<LabelKind> parse_label_kind(std::string_view text) {
    for (auto k : {LabelKind::original, LabelKind::block_shuffle, LabelKind::full_shuffle})
        if (text == to_string(k))
            return k;
    return std::nullopt;
}

SplitPlan split_record_wise(const CohortDataset &data, std::uint64_t seed) {
    SplitPlan plan;
    plan.strategy = SplitStrategy::record_wise;
    plan.seed = seed;
    Rng rng = make_rng(seed);
    const auto by_participant = data.rows_by_participant();
    for (const auto &pid : data.participants()) {
        std::vector<std::size_t> rows = by_participant.at(pid);
        if (rows.size() < 2)
            throw Error(ErrorCode::TooFewRows, "participant " + pid + " has fewer than two rows");
        shuffle_in_place(rows, rng);
        std::size_t n_train = rows.size() / 2;
        if (rows.size() % 2 == 1 && bernoulli(rng, 0.5))
            ++n_train;
        plan.train_rows.insert(plan.train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        plan.test_rows.insert(plan.test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    }
    std::sort(plan.train_rows.begin(), plan.train_rows.end());
    std::sort(plan.test_rows.begin(), plan.test_rows.end());
    return plan;
}

SplitPlan split_subject_wise(const CohortDataset &data, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
    SplitPlan plan;
    plan.strategy = SplitStrategy::subject_wise;
    plan.seed = seed;
    Rng rng = make_rng(seed);

    const auto labels = data.participant_labels();
    std::vector<std::string> train_participants;
    for (auto cls : {CohortLabel::control, CohortLabel::case_}) {
        std::vector<std::string> members;
        for (const auto &pid : data.participants())
            if (labels.at(pid) == cls)
                members.push_back(pid);
        if (members.size() < 2)
            throw Error(ErrorCode::TooFewParticipants,
                        "class " + std::string(to_string(cls)) + " has fewer than two participants");
        shuffle_in_place(members, rng);
        const auto n = static_cast<double>(members.size());
        const auto n_train = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(train_fraction * n)), 1,
                                                     members.size() - 1);
        train_participants.insert(train_participants.end(), members.begin(),
                                  members.begin() + static_cast<std::ptrdiff_t>(n_train));
    }
    const std::set<std::string> train_set(train_participants.begin(), train_participants.end());
    for (std::size_t r = 0; r < data.rows(); ++r)
        (train_set.contains(data.participant_ids[r]) ? plan.train_rows : plan.test_rows).push_back(r);
    return plan;
}

void check_plan(const CohortDataset &data, const SplitPlan &plan) {
    std::vector<int> side(data.rows(), 0);
    for (auto r : plan.train_rows)
        if (r >= side.size() || side[r]++ != 0)
            throw Error(ErrorCode::InvalidArgument, "split plan repeats or overruns a training row");
    for (auto r : plan.test_rows)
        if (r >= side.size() || side[r]++ != 0)
            throw Error(ErrorCode::InvalidArgument, "split plan puts a row on both sides");
    if (std::find(side.begin(), side.end(), 0) != side.end())
        throw Error(ErrorCode::InvalidArgument, "split plan leaves rows unassigned");
    if (plan.strategy == SplitStrategy::record_wise)
        return;
    std::set<std::string> train_ids;
    for (auto r : plan.train_rows)
        train_ids.insert(data.participant_ids[r]);
    for (auto r : plan.test_rows)
        if (train_ids.contains(data.participant_ids[r]))
            throw Error(ErrorCode::InvalidArgument, "participant " + data.participant_ids[r] + " on both sides");
}

CohortDataset collapse_median(const CohortDataset &data) {
    CohortDataset out;
    out.feature_names = data.feature_names;
    const auto by_participant = data.rows_by_participant();
    const auto labels = data.participant_labels();
    const auto participants = data.participants();
    out.features.resize(static_cast<Eigen::Index>(participants.size()), data.features.cols());
    std::vector<double> values;
    for (std::size_t i = 0; i < participants.size(); ++i) {
        const auto &rows = by_participant.at(participants[i]);
        out.participant_ids.push_back(participants[i]);
        out.labels.push_back(labels.at(participants[i]));
        for (Eigen::Index f = 0; f < data.features.cols(); ++f) {
            values.clear();
            for (auto r : rows) {
                const double v = data.features(static_cast<Eigen::Index>(r), f);
                if (!std::isnan(v))
                    values.push_back(v);
            }
            out.features(static_cast<Eigen::Index>(i), f) =
                values.empty() ? std::numeric_limits<double>::quiet_NaN() : median_of(values);
        }
    }
    return out;
}

CohortDataset shuffle_labels(const CohortDataset &data, const LabelScheme &scheme) {
    CohortDataset out = data;
    Rng rng = make_rng(scheme.seed);
    switch (scheme.kind) {
    case LabelKind::original:
        break;
    case LabelKind::block_shuffle: {
        const auto participants = data.participants();
        const auto labels = data.participant_labels();
        std::vector<CohortLabel> pool;
        for (const auto &pid : participants)
            pool.push_back(labels.at(pid));
        shuffle_in_place(pool, rng);
        std::map<std::string, CohortLabel> assigned;
        for (std::size_t i = 0; i < participants.size(); ++i)
            assigned[participants[i]] = pool[i];
        for (std::size_t r = 0; r < out.rows(); ++r)
            out.labels[r] = assigned.at(out.participant_ids[r]);
        break;
    }
    case LabelKind::full_shuffle:
        shuffle_in_place(out.labels, rng);
        break;
    }
    return out;
}

CohortDataset balance_participants(const CohortDataset &data, std::uint64_t seed) {
    const auto labels = data.participant_labels();
    std::vector<std::string> cases, controls;
    for (const auto &pid : data.participants())
        (labels.at(pid) == CohortLabel::case_ ? cases : controls).push_back(pid);
    auto &larger = cases.size() > controls.size() ? cases : controls;
    const std::size_t keep = std::min(cases.size(), controls.size());
    Rng rng = make_rng(seed);
    shuffle_in_place(larger, rng);
    larger.resize(keep);
    std::set<std::string> kept(cases.begin(), cases.end());
    kept.insert(controls.begin(), controls.end());
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < data.rows(); ++r)
        if (kept.contains(data.participant_ids[r]))
            rows.push_back(r);
    return select_rows(data, rows);
}

Eigen::VectorXd column_medians(const Eigen::MatrixXd &reference) {
    Eigen::VectorXd medians(reference.cols());
    std::vector<double> values;
    for (Eigen::Index f = 0; f < reference.cols(); ++f) {
        values.clear();
        for (Eigen::Index r = 0; r < reference.rows(); ++r)
            if (!std::isnan(reference(r, f)))
                values.push_back(reference(r, f));
        if (values.empty())
            throw Error(ErrorCode::InvalidArgument, "feature column has no observed training values");
        medians[f] = median_of(values);
    }
    return medians;
}

void impute_in_place(Eigen::MatrixXd &rows, const Eigen::VectorXd &medians) {
    for (Eigen::Index f = 0; f < rows.cols(); ++f)
        for (Eigen::Index r = 0; r < rows.rows(); ++r)
            if (std::isnan(rows(r, f)))
                rows(r, f) = medians[f];
}

void validate(const ExperimentConfig &config) {
    if (config.repeats == 0)
        throw Error(ErrorCode::InvalidArgument, "at least one repeat is required");
    if (config.multiclass) {
        if (config.strategy != SplitStrategy::record_wise)
            throw Error(ErrorCode::InvalidArgument, "identity classification needs the record-wise strategy");
        if (config.labels == LabelKind::block_shuffle)
            throw Error(ErrorCode::InvalidArgument, "block shuffling is undefined for identity labels");
        if (config.balanced)
            throw Error(ErrorCode::InvalidArgument, "balancing applies to case/control labels only");
    }
}

std::vector<double> run_split_experiment(const CohortDataset &data, const ExperimentConfig &config) {
    validate(config);
    data.validate();
    const CohortDataset base = config.strategy == SplitStrategy::collapsed ? collapse_median(data) : data;

    std::vector<double> aucs;
    aucs.reserve(config.repeats);
    for (std::size_t r = 0; r < config.repeats; ++r) {
        const std::uint64_t repeat_seed = derive_seed(config.seed, r);
        const CohortDataset sample =
            config.balanced ? balance_participants(base, derive_seed(repeat_seed, kSaltBalance)) : base;

        std::vector<int> targets(sample.rows());
        CohortDataset labelled;
        if (config.multiclass) {
            labelled = sample;
            std::map<std::string, int> identity;
            for (const auto &pid : sample.participants())
                identity.emplace(pid, static_cast<int>(identity.size()));
            for (std::size_t i = 0; i < sample.rows(); ++i)
                targets[i] = identity.at(sample.participant_ids[i]);
            if (config.labels == LabelKind::full_shuffle) {
                Rng rng = make_rng(derive_seed(repeat_seed, kSaltLabels));
                shuffle_in_place(targets, rng);
            }
        } else {
            labelled = shuffle_labels(sample, {config.labels, derive_seed(repeat_seed, kSaltLabels)});
            for (std::size_t i = 0; i < labelled.rows(); ++i)
                targets[i] = static_cast<int>(labelled.labels[i]);
        }

        // Strategies split on participant structure; labels only stratify.
        const std::uint64_t split_seed = derive_seed(repeat_seed, kSaltSplit);
        const SplitPlan plan = config.strategy == SplitStrategy::record_wise
                                   ? split_record_wise(labelled, split_seed)
                                   : split_subject_wise(labelled, config.train_fraction, split_seed);
        SplitPlan checked = plan;
        checked.strategy = config.strategy;
        check_plan(labelled, checked);

        Eigen::MatrixXd train(static_cast<Eigen::Index>(plan.train_rows.size()), labelled.features.cols());
        Eigen::MatrixXd test(static_cast<Eigen::Index>(plan.test_rows.size()), labelled.features.cols());
        std::vector<int> train_y, test_y;
        for (std::size_t i = 0; i < plan.train_rows.size(); ++i) {
            train.row(static_cast<Eigen::Index>(i)) = labelled.features.row(static_cast<Eigen::Index>(plan.train_rows[i]));
            train_y.push_back(targets[plan.train_rows[i]]);
        }
        for (std::size_t i = 0; i < plan.test_rows.size(); ++i) {
            test.row(static_cast<Eigen::Index>(i)) = labelled.features.row(static_cast<Eigen::Index>(plan.test_rows[i]));
            test_y.push_back(targets[plan.test_rows[i]]);
        }
        const Eigen::VectorXd medians = column_medians(train);
        impute_in_place(train, medians);
        impute_in_place(test, medians);

        ForestParams params = config.forest;
        params.seed = derive_seed(repeat_seed, kSaltForest);
        const ForestModel model = train_forest(train, train_y, params);
        Eigen::MatrixXd proba = predict_proba(model, test);

        if (config.multiclass) {
            const auto n_classes = static_cast<Eigen::Index>(sample.participants().size());
            if (proba.cols() < n_classes) {
                Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(proba.rows(), n_classes);
                padded.leftCols(proba.cols()) = proba;
                proba = std::move(padded);
            }
            aucs.push_back(hand_till_auc(proba, test_y));
        } else {
            const Eigen::VectorXd case_score =
                proba.cols() > 1 ? Eigen::VectorXd(proba.col(1)) : Eigen::VectorXd::Zero(proba.rows());
            aucs.push_back(roc_auc(std::span<const double>(case_score.data(), static_cast<std::size_t>(case_score.size())), test_y));
        }
    }
    return aucs;
}

AucSummary summarize(std::span<const double> values) {
    AucSummary s;
    s.n = values.size();
    if (values.empty())
        return s;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const double h = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.n);
    double ss = 0.0;
    for (double v : sorted)
        ss += (v - s.mean) * (v - s.mean);
    s.sd = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
    s.min = sorted.front();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.max = sorted.back();
    return s;
}

} // namespace medfx
