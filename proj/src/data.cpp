#include "medfx/data.hpp"

#include "medfx/error.hpp"
#include "medfx/format.hpp"

#include "medfx/json_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

namespace medfx {

namespace {

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    return text;
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (text.empty())
        return std::nullopt;
    if (text.front() == '+')
        text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value))
        return std::nullopt;
    return value;
}

bool is_missing_token(std::string_view text) {
    const std::string lower = lowercase(trim(text));
    return lower.empty() || lower == "na" || lower == "nan" || lower == "null";
}

std::size_t column_index(const std::vector<std::string> &header, const std::string &name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw Error(ErrorCode::MissingColumn, "input is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<std::string> read_header(std::istream &in) {
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::EmptyInput, "input has no header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
        line.erase(0, 3); // UTF-8 byte order mark
    auto header = split_csv_line(line);
    for (auto &cell : header)
        cell = std::string(trim(cell));
    return header;
}

} // namespace

std::string_view to_string(Activity activity) noexcept {
    switch (activity) {
    case Activity::tapping: return "tapping";
    case Activity::voice: return "voice";
    case Activity::walk: return "walk";
    case Activity::rest: return "rest";
    }
    return "tapping";
}

std::string_view to_string(MedStatus status) noexcept {
    switch (status) {
    case MedStatus::before: return "before";
    case MedStatus::after: return "after";
    case MedStatus::other: return "other";
    }
    return "other";
}

std::string_view to_string(CohortLabel label) noexcept {
    return label == CohortLabel::case_ ? "case" : "control";
}

std::optional<Activity> parse_activity(std::string_view text) {
    const std::string lower = lowercase(trim(text));
    for (Activity a : {Activity::tapping, Activity::voice, Activity::walk, Activity::rest})
        if (lower == to_string(a))
            return a;
    return std::nullopt;
}

std::optional<MedStatus> parse_med_status(std::string_view text) {
    const std::string lower = lowercase(trim(text));
    for (MedStatus s : {MedStatus::before, MedStatus::after, MedStatus::other})
        if (lower == to_string(s))
            return s;
    return std::nullopt;
}

std::optional<double> ActivityRecord::feature(const std::string &name) const {
    const auto it = features.find(name);
    if (it == features.end())
        return std::nullopt;
    return it->second;
}

std::vector<double> TripletSeries::x_as_double() const { return {x.begin(), x.end()}; }

IngestResult ingest_csv(const std::filesystem::path &path, const ColumnMapping &mapping) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    return ingest_csv(in, mapping);
}

IngestResult ingest_csv(std::istream &in, const ColumnMapping &mapping) {
    const auto header = read_header(in);
    const std::size_t pid_col = column_index(header, mapping.participant_id);
    const std::size_t act_col = column_index(header, mapping.activity);
    const std::size_t ts_col = column_index(header, mapping.timestamp);
    const std::size_t med_col = column_index(header, mapping.med_status);

    IngestResult result;
    std::vector<std::size_t> feature_cols;
    if (mapping.features.empty()) {
        const std::set<std::size_t> reserved{pid_col, act_col, ts_col, med_col};
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (!reserved.contains(c)) {
                feature_cols.push_back(c);
                result.feature_names.push_back(header[c]);
            }
        }
    } else {
        for (const auto &name : mapping.features) {
            feature_cols.push_back(column_index(header, name));
            result.feature_names.push_back(name);
        }
    }
    if (feature_cols.empty())
        throw Error(ErrorCode::MissingColumn, "input has no feature columns");

    std::string line;
    std::size_t sequence = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            ++result.rejected;
            continue;
        }
        ActivityRecord record;
        record.participant_id = std::string(trim(cells[pid_col]));
        const auto activity = parse_activity(cells[act_col]);
        const auto timestamp = parse_double(cells[ts_col]);
        const auto status = parse_med_status(cells[med_col]);
        if (record.participant_id.empty() || !activity || !timestamp || *timestamp <= 0.0 || !status) {
            ++result.rejected;
            continue;
        }
        record.activity = *activity;
        record.timestamp = *timestamp;
        record.med_status = *status;
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const std::string &cell = cells[feature_cols[f]];
            if (is_missing_token(cell))
                continue;
            if (const auto value = parse_double(cell))
                record.features.emplace(result.feature_names[f], *value);
        }
        record.sequence = sequence++;
        result.records.push_back(std::move(record));
    }
    if (result.records.empty())
        throw Error(ErrorCode::EmptyInput, "input holds no valid rows");
    return result;
}

void write_activity_csv(std::ostream &out, std::span<const ActivityRecord> records,
                        std::span<const std::string> feature_names) {
    std::vector<std::string> cells{"participant_id", "activity", "timestamp", "med_status"};
    cells.insert(cells.end(), feature_names.begin(), feature_names.end());
    write_csv_row(out, cells);
    for (const auto &r : records) {
        cells = {r.participant_id, std::string(to_string(r.activity)), format_number(r.timestamp),
                 std::string(to_string(r.med_status))};
        for (const auto &name : feature_names) {
            const auto value = r.feature(name);
            cells.push_back(value ? format_number(*value) : std::string());
        }
        write_csv_row(out, cells);
    }
}

void write_records_jsonl(std::ostream &out, std::span<const ActivityRecord> records,
                         std::span<const std::string> feature_names) {
    for (const auto &r : records) {
        nlohmann::ordered_json row;
        row["participant_id"] = r.participant_id;
        row["activity"] = to_string(r.activity);
        row["timestamp"] = json_number(r.timestamp);
        row["med_status"] = to_string(r.med_status);
        nlohmann::ordered_json features = nlohmann::ordered_json::object();
        for (const auto &name : feature_names) {
            const auto value = r.feature(name);
            features[name] = value ? json_number(*value) : nlohmann::ordered_json(nullptr);
        }
        row["features"] = std::move(features);
        out << render_json(row) << '\n';
    }
}

double local_hour(double timestamp, double utc_offset_hours) noexcept {
    const double local = timestamp + utc_offset_hours * 3600.0;
    double seconds = std::fmod(local, 86400.0);
    if (seconds < 0)
        seconds += 86400.0;
    return seconds / 3600.0;
}

long long local_day(double timestamp, double utc_offset_hours) noexcept {
    return static_cast<long long>(std::floor((timestamp + utc_offset_hours * 3600.0) / 86400.0));
}

TripletSeries build_triplet(std::span<const ActivityRecord> records, const std::string &feature,
                            double utc_offset_hours) {
    std::vector<const ActivityRecord *> kept;
    for (const auto &r : records) {
        if (r.participant_id != records.front().participant_id || r.activity != records.front().activity)
            throw Error(ErrorCode::InvalidArgument, "build_triplet needs records of one participant and activity");
        if (r.med_status == MedStatus::other || !r.feature(feature))
            continue;
        kept.push_back(&r);
    }
    if (kept.empty())
        throw Error(ErrorCode::NoUsableRecords, "no usable records for feature '" + feature + "'");
    std::sort(kept.begin(), kept.end(), [](const ActivityRecord *a, const ActivityRecord *b) {
        return a->timestamp != b->timestamp ? a->timestamp < b->timestamp : a->sequence < b->sequence;
    });

    TripletSeries series;
    for (const auto *r : kept) {
        series.x.push_back(r->med_status == MedStatus::after ? 1 : 0);
        series.t.push_back(local_hour(r->timestamp, utc_offset_hours));
        series.y.push_back(*r->feature(feature));
        series.timestamps.push_back(r->timestamp);
    }
    return series;
}

std::map<GroupKey, std::vector<ActivityRecord>> group_records(std::span<const ActivityRecord> records) {
    std::map<GroupKey, std::vector<ActivityRecord>> groups;
    for (const auto &r : records)
        groups[GroupKey{r.participant_id, r.activity}].push_back(r);
    return groups;
}

ArmCounts count_arms(std::span<const ActivityRecord> records) {
    ArmCounts counts;
    for (const auto &r : records) {
        if (!r.usable())
            continue;
        if (r.med_status == MedStatus::before)
            ++counts.before;
        else
            ++counts.after;
    }
    return counts;
}

std::vector<GroupKey> filter_eligible(std::span<const ActivityRecord> records, std::size_t min_per_arm) {
    if (min_per_arm < 1)
        throw Error(ErrorCode::InvalidArgument, "min_per_arm must be at least 1");
    std::vector<GroupKey> eligible;
    for (const auto &[key, group] : group_records(records)) {
        const ArmCounts counts = count_arms(group);
        if (counts.before >= min_per_arm && counts.after >= min_per_arm)
            eligible.push_back(key);
    }
    return eligible;
}

double parity_score(std::span<const ActivityRecord> records, double utc_offset_hours) {
    std::map<long long, std::pair<bool, bool>> days;
    for (const auto &r : records) {
        if (!r.usable())
            continue;
        auto &day = days[local_day(r.timestamp, utc_offset_hours)];
        (r.med_status == MedStatus::before ? day.first : day.second) = true;
    }
    if (days.empty())
        throw Error(ErrorCode::NoUsableRecords, "parity score needs at least one usable record");
    const auto both = std::count_if(days.begin(), days.end(), [](const auto &d) { return d.second.first && d.second.second; });
    return static_cast<double>(both) / static_cast<double>(days.size());
}

std::vector<std::string> CohortDataset::participants() const {
    std::vector<std::string> order;
    std::set<std::string> seen;
    for (const auto &pid : participant_ids)
        if (seen.insert(pid).second)
            order.push_back(pid);
    return order;
}

std::map<std::string, std::vector<std::size_t>> CohortDataset::rows_by_participant() const {
    std::map<std::string, std::vector<std::size_t>> rows;
    for (std::size_t i = 0; i < participant_ids.size(); ++i)
        rows[participant_ids[i]].push_back(i);
    return rows;
}

std::map<std::string, std::size_t> CohortDataset::row_counts() const {
    std::map<std::string, std::size_t> counts;
    for (const auto &pid : participant_ids)
        ++counts[pid];
    return counts;
}

std::map<std::string, CohortLabel> CohortDataset::participant_labels() const {
    std::map<std::string, CohortLabel> out;
    for (std::size_t i = 0; i < participant_ids.size(); ++i) {
        const auto [it, inserted] = out.emplace(participant_ids[i], labels[i]);
        if (!inserted && it->second != labels[i])
            throw Error(ErrorCode::InvalidArgument, "participant '" + participant_ids[i] + "' carries two labels");
    }
    return out;
}

void CohortDataset::validate() const {
    if (feature_names.empty())
        throw Error(ErrorCode::InvalidArgument, "cohort has no feature columns");
    if (labels.size() != participant_ids.size() || static_cast<std::size_t>(features.rows()) != participant_ids.size() ||
        static_cast<std::size_t>(features.cols()) != feature_names.size())
        throw Error(ErrorCode::ShapeMismatch, "cohort columns have inconsistent lengths");
    participant_labels();
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        if (features.row(i).array().isNaN().all())
            throw Error(ErrorCode::InvalidArgument, "cohort row " + std::to_string(i) + " has no feature values");
}

CohortDataset ingest_cohort_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    return ingest_cohort_csv(in);
}

CohortDataset ingest_cohort_csv(std::istream &in) {
    const auto header = read_header(in);
    const std::size_t pid_col = column_index(header, "participant_id");
    const std::size_t label_col = column_index(header, "label");
    CohortDataset data;
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != pid_col && c != label_col) {
            feature_cols.push_back(c);
            data.feature_names.push_back(header[c]);
        }
    }
    if (feature_cols.empty())
        throw Error(ErrorCode::MissingColumn, "cohort input has no feature columns");

    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            continue;
        const std::string label = lowercase(trim(cells[label_col]));
        if (label != "case" && label != "control")
            continue;
        std::vector<double> values;
        bool any = false;
        for (std::size_t c : feature_cols) {
            const auto v = is_missing_token(cells[c]) ? std::nullopt : parse_double(cells[c]);
            values.push_back(v.value_or(std::numeric_limits<double>::quiet_NaN()));
            any = any || v.has_value();
        }
        if (!any)
            continue;
        data.participant_ids.emplace_back(trim(cells[pid_col]));
        data.labels.push_back(label == "case" ? CohortLabel::case_ : CohortLabel::control);
        rows.push_back(std::move(values));
    }
    if (rows.empty())
        throw Error(ErrorCode::EmptyInput, "cohort input holds no valid rows");
    data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < feature_cols.size(); ++j)
            data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    data.validate();
    return data;
}

void write_cohort_csv(std::ostream &out, const CohortDataset &data) {
    std::vector<std::string> cells{"participant_id", "label"};
    cells.insert(cells.end(), data.feature_names.begin(), data.feature_names.end());
    write_csv_row(out, cells);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        cells = {data.participant_ids[i], std::string(to_string(data.labels[i]))};
        for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
            const double v = data.features(static_cast<Eigen::Index>(i), j);
            cells.push_back(std::isnan(v) ? std::string() : format_number(v));
        }
        write_csv_row(out, cells);
    }
}

} // namespace medfx
