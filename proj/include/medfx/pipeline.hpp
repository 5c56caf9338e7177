#pragma once

#include "medfx/audit.hpp"
#include "medfx/data.hpp"
#include "medfx/disentangle.hpp"
#include "medfx/preprocess.hpp"
#include "medfx/uitest.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace medfx {

struct DisentangleConfig {
    BatteryOptions battery;
    UiOptions ui;
    LowessConfig lowess;
    std::size_t min_per_arm = 15;
    double utc_offset_hours = 0.0;
};

struct FeatureOutcome {
    std::string feature;
    std::size_t n = 0;
    CIBattery battery;
    std::array<double, 5> adjusted_p{};
    Disentangled decision;
};

struct SkippedItem {
    std::string participant_id;
    Activity activity = Activity::tapping;
    std::string feature; // empty when the whole participant x activity was skipped
    std::string reason;
    std::string message;
};

struct GroupReport {
    GroupKey key;
    std::vector<FeatureOutcome> features;
    std::optional<UIResult> treatment;
    std::optional<UIResult> time_of_day;
};

struct ParityRow {
    GroupKey key;
    ArmCounts arms;
    double parity = 0.0;
    bool eligible = false;
};

struct DisentangleReport {
    std::vector<std::string> feature_names;
    std::vector<GroupReport> groups;   // eligible groups with at least one tested feature, sorted by key
    std::vector<SkippedItem> skipped;  // sorted by participant, activity, feature
    std::vector<ParityRow> parity;     // every group with a usable record
    std::vector<std::string> participants;
};

/// Eligibility filter, per-feature preprocessing and CI batteries, the 4p+1
/// correction and both UI tests for every participant x activity.
DisentangleReport run_disentangle(std::span<const ActivityRecord> records, std::span<const std::string> feature_names,
                                  const DisentangleConfig &config);

/// Writes ui_tests.json, features.jsonl, class_matrix.csv, diagnostics.csv,
/// parity.csv and skipped.csv into `dir` (created when absent).
void write_disentangle_outputs(const DisentangleReport &report, const std::filesystem::path &dir);

/// Writes auc.csv (repeat, strategy, scheme, auc) and summary.json.
void write_audit_outputs(std::span<const double> aucs, const ExperimentConfig &config, const std::filesystem::path &dir);

} // namespace medfx
