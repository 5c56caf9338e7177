#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medfx {

enum class Activity { tapping, voice, walk, rest };
enum class MedStatus { before, after, other };

std::string_view to_string(Activity activity) noexcept;
std::string_view to_string(MedStatus status) noexcept;
/// Case-insensitive; nullopt when the token is not a declared value.
std::optional<Activity> parse_activity(std::string_view text);
std::optional<MedStatus> parse_med_status(std::string_view text);

/// One task performance. Missing feature values are absent from `features`.
struct ActivityRecord {
    std::string participant_id;
    Activity activity = Activity::tapping;
    double timestamp = 0.0; // epoch seconds, UTC
    MedStatus med_status = MedStatus::other;
    std::map<std::string, double> features;
    std::size_t sequence = 0; // ingestion order, breaks timestamp ties

    std::optional<double> feature(const std::string &name) const;
    bool usable() const noexcept { return med_status != MedStatus::other && !features.empty(); }
};

/// Time-ordered {X, T, Y} for one participant, activity and feature.
/// x is 1 for after-medication records, t is the local hour of day.
struct TripletSeries {
    std::vector<int> x;
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> timestamps;

    std::size_t size() const noexcept { return y.size(); }
    std::vector<double> x_as_double() const;
};

/// Names of the CSV columns holding each record field. An empty feature list
/// means "every other column".
struct ColumnMapping {
    std::string participant_id = "participant_id";
    std::string activity = "activity";
    std::string timestamp = "timestamp";
    std::string med_status = "med_status";
    std::vector<std::string> features;
};

struct IngestResult {
    std::vector<ActivityRecord> records;
    std::vector<std::string> feature_names;
    std::size_t rejected = 0;
};

IngestResult ingest_csv(const std::filesystem::path &path, const ColumnMapping &mapping = {});
IngestResult ingest_csv(std::istream &in, const ColumnMapping &mapping = {});

/// Writes records in the ingestible CSV layout (default column names).
void write_activity_csv(std::ostream &out, std::span<const ActivityRecord> records,
                        std::span<const std::string> feature_names);

/// Canonical JSON-lines export, one record per line, fixed field order.
void write_records_jsonl(std::ostream &out, std::span<const ActivityRecord> records,
                         std::span<const std::string> feature_names);

double local_hour(double timestamp, double utc_offset_hours) noexcept;
long long local_day(double timestamp, double utc_offset_hours) noexcept;

TripletSeries build_triplet(std::span<const ActivityRecord> records, const std::string &feature,
                            double utc_offset_hours = 0.0);

struct GroupKey {
    std::string participant_id;
    Activity activity = Activity::tapping;

    auto operator<=>(const GroupKey &) const = default;
};

/// Records bucketed by (participant, activity); each bucket keeps input order.
std::map<GroupKey, std::vector<ActivityRecord>> group_records(std::span<const ActivityRecord> records);

struct ArmCounts {
    std::size_t before = 0;
    std::size_t after = 0;
};

/// Counts before/after records usable for at least one feature.
ArmCounts count_arms(std::span<const ActivityRecord> records);

std::vector<GroupKey> filter_eligible(std::span<const ActivityRecord> records, std::size_t min_per_arm = 15);

/// Share of active local days holding both a before and an after record.
double parity_score(std::span<const ActivityRecord> records, double utc_offset_hours = 0.0);

enum class CohortLabel { control = 0, case_ = 1 };

std::string_view to_string(CohortLabel label) noexcept;

/// Stacked feature matrix with participant blocks. Missing values are NaN.
struct CohortDataset {
    std::vector<std::string> feature_names;
    std::vector<std::string> participant_ids; // one per row
    std::vector<CohortLabel> labels;          // one per row
    Eigen::MatrixXd features;                 // rows x p

    std::size_t rows() const noexcept { return participant_ids.size(); }
    std::size_t width() const noexcept { return feature_names.size(); }

    /// Participants in order of first appearance.
    std::vector<std::string> participants() const;
    std::map<std::string, std::vector<std::size_t>> rows_by_participant() const;
    std::map<std::string, std::size_t> row_counts() const;
    /// Label of each participant (validated to be unique).
    std::map<std::string, CohortLabel> participant_labels() const;

    /// Throws InvalidArgument when a structural invariant fails.
    void validate() const;
};

CohortDataset ingest_cohort_csv(const std::filesystem::path &path);
CohortDataset ingest_cohort_csv(std::istream &in);
void write_cohort_csv(std::ostream &out, const CohortDataset &data);

} // namespace medfx
