#pragma once

#include "medfx/data.hpp"
#include "medfx/forest.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace medfx {

enum class SplitStrategy { record_wise, subject_wise, collapsed };
enum class LabelKind { original, block_shuffle, full_shuffle };

std::string_view to_string(SplitStrategy strategy) noexcept;
std::string_view to_string(LabelKind kind) noexcept;
/// Accepts the CLI spellings: record/subject/collapsed and
/// original/block-shuffle/full-shuffle.
std::optional<SplitStrategy> parse_split_strategy(std::string_view text);
std::optional<LabelKind> parse_label_kind(std::string_view text);

struct SplitPlan {
    SplitStrategy strategy = SplitStrategy::record_wise;
    std::vector<std::size_t> train_rows; // ascending
    std::vector<std::size_t> test_rows;  // ascending
    std::uint64_t seed = 0;
};

struct LabelScheme {
    LabelKind kind = LabelKind::original;
    std::uint64_t seed = 0;
};

/// Halves each participant's rows at random; for odd counts a coin flip
/// decides which side receives the extra row.
SplitPlan split_record_wise(const CohortDataset &data, std::uint64_t seed);

/// Assigns whole participants to one side, stratified by label.
SplitPlan split_subject_wise(const CohortDataset &data, double train_fraction, std::uint64_t seed);

/// Throws InvalidArgument if the plan does not partition the rows, or if a
/// subject-wise or collapsed plan puts a participant on both sides.
void check_plan(const CohortDataset &data, const SplitPlan &plan);

/// One row per participant holding per-feature medians of non-missing values.
CohortDataset collapse_median(const CohortDataset &data);

CohortDataset shuffle_labels(const CohortDataset &data, const LabelScheme &scheme);

/// Keeps every participant of the smaller class and an equally sized random
/// subset of the larger one.
CohortDataset balance_participants(const CohortDataset &data, std::uint64_t seed);

/// Replaces NaN cells with the per-column median of `reference`.
Eigen::VectorXd column_medians(const Eigen::MatrixXd &reference);
void impute_in_place(Eigen::MatrixXd &rows, const Eigen::VectorXd &medians);

struct ExperimentConfig {
    SplitStrategy strategy = SplitStrategy::record_wise;
    LabelKind labels = LabelKind::original;
    std::size_t repeats = 100;
    ForestParams forest;
    double train_fraction = 0.5;
    bool balanced = false;
    /// Classify participant identity instead of case/control and score with
    /// the one-vs-one multiclass AUC.
    bool multiclass = false;
    std::uint64_t seed = 0;
};

/// Throws InvalidArgument for unsupported strategy/label/mode combinations.
void validate(const ExperimentConfig &config);

/// Test-set AUC of each repeat. Repeat r draws its split, label shuffle and
/// forest from streams derived from (seed, r), so runs that differ only in
/// the label scheme see the same splits.
std::vector<double> run_split_experiment(const CohortDataset &data, const ExperimentConfig &config);

struct AucSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Quartiles use linear interpolation between order statistics.
AucSummary summarize(std::span<const double> values);

} // namespace medfx
