#include "medfx/pipeline.hpp"

#include "medfx/error.hpp"
#include "medfx/format.hpp"
#include "medfx/json_io.hpp"
#include "medfx/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace medfx {

namespace {

using ordered_json = nlohmann::ordered_json;

std::ofstream open_output(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    return out;
}

std::string reason_of(const Error &e) { return std::string(to_string(e.code())); }

// Participant-level T ~ X: every usable record of the group, time-ordered.
RegressionFit shared_treatment_time(std::span<const ActivityRecord> records, const DisentangleConfig &config) {
    std::vector<const ActivityRecord *> usable;
    for (const auto &r : records)
        if (r.usable())
            usable.push_back(&r);
    std::sort(usable.begin(), usable.end(), [](const auto *a, const auto *b) {
        return a->timestamp != b->timestamp ? a->timestamp < b->timestamp : a->sequence < b->sequence;
    });
    std::vector<int> x;
    std::vector<double> t;
    for (const auto *r : usable) {
        x.push_back(r->med_status == MedStatus::after ? 1 : 0);
        t.push_back(local_hour(r->timestamp, config.utc_offset_hours));
    }
    return fit_treatment_time(x, t, config.battery);
}

struct GroupResult {
    std::optional<GroupReport> report;
    std::vector<SkippedItem> skipped;
};

GroupResult analyze_group(const GroupKey &key, std::span<const ActivityRecord> records,
                          std::span<const std::string> feature_names, const DisentangleConfig &config) {
    GroupResult result;
    const auto skip = [&](const std::string &feature, const Error &e) {
        result.skipped.push_back({key.participant_id, key.activity, feature, reason_of(e), e.what()});
    };

    RegressionFit h1;
    try {
        h1 = shared_treatment_time(records, config);
    } catch (const Error &e) {
        skip("", e);
        return result;
    }

    GroupReport report;
    report.key = key;
    std::vector<FeatureBattery> batteries;
    for (const auto &feature : feature_names) {
        try {
            TripletSeries series = build_triplet(records, feature, config.utc_offset_hours);
            series.y = preprocess_outcome(series.y, config.lowess);
            FeatureOutcome outcome;
            outcome.feature = feature;
            outcome.n = series.size();
            outcome.battery = ci_battery(series, config.battery, &h1);
            batteries.push_back({feature, outcome.battery});
            report.features.push_back(std::move(outcome));
        } catch (const Error &e) {
            skip(feature, e);
        }
    }
    if (batteries.empty())
        return result;

    const PoolAdjustment pool = adjust_pool(batteries, config.ui);
    for (std::size_t k = 0; k < report.features.size(); ++k) {
        report.features[k].adjusted_p = pool.adjusted[k];
        report.features[k].decision = pool.decisions[k];
    }
    report.treatment = ui_test(batteries, pool, UiTarget::treatment, config.ui);
    report.time_of_day = ui_test(batteries, pool, UiTarget::time_of_day, config.ui);
    result.report = std::move(report);
    return result;
}

ordered_json number(double v) { return json_number(v); }

ordered_json ui_json(const UIResult &ui) {
    ordered_json per = ordered_json::array();
    for (const auto &f : ui.per_feature)
        per.push_back({{"feature", f.feature}, {"chosen_test", to_string(f.chosen_test)}, {"adjusted_p", number(f.adjusted_p)}});
    return {{"target", to_string(ui.target)}, {"ui_p", number(ui.ui_p)}, {"reject", ui.reject}, {"per_feature", per}};
}

std::string fit_detail(const RegressionFit &fit) {
    if (fit.arima_order)
        return "ARIMA(" + std::to_string(fit.arima_order->p) + "," + std::to_string(fit.arima_order->d) + "," +
               std::to_string(fit.arima_order->q) + ")";
    if (fit.bandwidth)
        return "L=" + std::to_string(*fit.bandwidth);
    return "";
}

} // namespace

DisentangleReport run_disentangle(std::span<const ActivityRecord> records, std::span<const std::string> feature_names,
                                  const DisentangleConfig &config) {
    DisentangleReport report;
    report.feature_names.assign(feature_names.begin(), feature_names.end());
    const auto groups = group_records(records);
    const auto eligible_keys = filter_eligible(records, config.min_per_arm);
    const std::set<GroupKey> eligible(eligible_keys.begin(), eligible_keys.end());

    std::set<std::string> participants;
    std::vector<std::pair<const GroupKey *, const std::vector<ActivityRecord> *>> work;
    for (const auto &[key, bucket] : groups) {
        participants.insert(key.participant_id);
        ParityRow row;
        row.key = key;
        row.arms = count_arms(bucket);
        row.eligible = eligible.contains(key);
        try {
            row.parity = parity_score(bucket, config.utc_offset_hours);
        } catch (const Error &) {
            continue; // no usable record
        }
        report.parity.push_back(row);
        if (row.eligible)
            work.emplace_back(&key, &bucket);
        else
            report.skipped.push_back({key.participant_id, key.activity, "", "Ineligible",
                                      "fewer than " + std::to_string(config.min_per_arm) + " records in an arm"});
    }
    report.participants.assign(participants.begin(), participants.end());

    std::vector<GroupResult> results(work.size());
    parallel_for(work.size(), [&](std::size_t i) {
        results[i] = analyze_group(*work[i].first, *work[i].second, feature_names, config);
    });
    for (auto &r : results) {
        if (r.report)
            report.groups.push_back(std::move(*r.report));
        report.skipped.insert(report.skipped.end(), r.skipped.begin(), r.skipped.end());
    }
    std::stable_sort(report.skipped.begin(), report.skipped.end(), [](const SkippedItem &a, const SkippedItem &b) {
        return std::tie(a.participant_id, a.activity) < std::tie(b.participant_id, b.activity);
    });
    return report;
}

void write_disentangle_outputs(const DisentangleReport &report, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);

    {
        ordered_json groups = ordered_json::array();
        for (const auto &g : report.groups)
            groups.push_back({{"participant", g.key.participant_id},
                              {"activity", to_string(g.key.activity)},
                              {"features_tested", g.features.size()},
                              {"treatment", ui_json(*g.treatment)},
                              {"time_of_day", ui_json(*g.time_of_day)}});
        ordered_json skipped = ordered_json::array();
        for (const auto &s : report.skipped)
            skipped.push_back({{"participant", s.participant_id},
                               {"activity", to_string(s.activity)},
                               {"feature", s.feature.empty() ? ordered_json(nullptr) : ordered_json(s.feature)},
                               {"reason", s.reason},
                               {"message", s.message}});
        auto out = open_output(dir / "ui_tests.json");
        out << render_json(ordered_json{{"groups", groups}, {"skipped", skipped}}, 2) << '\n';
    }

    {
        auto out = open_output(dir / "features.jsonl");
        for (const auto &g : report.groups)
            for (const auto &f : g.features) {
                ordered_json row{{"participant", g.key.participant_id},
                                 {"activity", to_string(g.key.activity)},
                                 {"feature", f.feature},
                                 {"n", f.n},
                                 {"backend", to_string(f.battery.backend)},
                                 {"class", to_string(f.decision.cls)},
                                 {"label", to_string(f.decision.label)}};
                for (std::size_t i = 0; i < 5; ++i)
                    row["p" + std::to_string(i + 1)] = number(f.battery.p[i]);
                for (std::size_t i = 0; i < 5; ++i)
                    row["adjusted_p" + std::to_string(i + 1)] = number(f.adjusted_p[i]);
                for (std::size_t i = 0; i < 5; ++i)
                    row["coef" + std::to_string(i + 1)] = number(f.battery.coef[i]);
                out << render_json(row) << '\n';
            }
    }

    {
        // Cells keyed by (activity, feature, participant).
        std::map<std::tuple<Activity, std::string, std::string>, std::string> cells;
        std::set<Activity> activities;
        for (const auto &row : report.parity)
            activities.insert(row.key.activity);
        for (const auto &g : report.groups)
            for (const auto &f : g.features)
                cells[{g.key.activity, f.feature, g.key.participant_id}] = std::string(to_string(f.decision.label));
        auto out = open_output(dir / "class_matrix.csv");
        std::vector<std::string> header{"activity", "feature"};
        header.insert(header.end(), report.participants.begin(), report.participants.end());
        write_csv_row(out, header);
        for (auto activity : activities)
            for (const auto &feature : report.feature_names) {
                std::vector<std::string> row{std::string(to_string(activity)), feature};
                for (const auto &pid : report.participants) {
                    const auto it = cells.find({activity, feature, pid});
                    row.push_back(it == cells.end() ? "missing" : it->second);
                }
                write_csv_row(out, row);
            }
    }

    {
        auto out = open_output(dir / "diagnostics.csv");
        write_csv_row(out, {"participant", "activity", "feature", "model", "backend", "detail", "n", "acf1",
                            "ljung_box_q", "ljung_box_p"});
        for (const auto &g : report.groups)
            for (const auto &f : g.features) {
                const std::pair<const char *, const RegressionFit *> fits[] = {
                    {"y~x", &f.battery.fit_y_x}, {"y~t", &f.battery.fit_y_t}, {"y~x+t", &f.battery.fit_y_xt}};
                for (const auto &[model, fit] : fits) {
                    const std::span<const double> resid(fit->residuals.data(), static_cast<std::size_t>(fit->residuals.size()));
                    double r1 = std::numeric_limits<double>::quiet_NaN();
                    LjungBox lb{r1, r1};
                    try {
                        r1 = acf(resid, 1);
                        lb = ljung_box(resid, 1);
                    } catch (const Error &) {
                    }
                    write_csv_row(out, {g.key.participant_id, std::string(to_string(g.key.activity)), f.feature, model,
                                        std::string(to_string(fit->backend)), fit_detail(*fit), std::to_string(f.n),
                                        format_number(r1), format_number(lb.q), format_number(lb.pvalue)});
                }
            }
    }

    {
        auto out = open_output(dir / "parity.csv");
        write_csv_row(out, {"participant", "activity", "n_before", "n_after", "parity", "eligible"});
        for (const auto &row : report.parity)
            write_csv_row(out, {row.key.participant_id, std::string(to_string(row.key.activity)),
                                std::to_string(row.arms.before), std::to_string(row.arms.after), format_number(row.parity),
                                row.eligible ? "true" : "false"});
    }

    {
        auto out = open_output(dir / "skipped.csv");
        write_csv_row(out, {"participant", "activity", "feature", "reason", "message"});
        for (const auto &s : report.skipped)
            write_csv_row(out, {s.participant_id, std::string(to_string(s.activity)), s.feature, s.reason, s.message});
    }
}

void write_audit_outputs(std::span<const double> aucs, const ExperimentConfig &config, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    const std::string strategy(to_string(config.strategy));
    const std::string scheme(to_string(config.labels));
    {
        auto out = open_output(dir / "auc.csv");
        write_csv_row(out, {"repeat", "strategy", "scheme", "auc"});
        for (std::size_t r = 0; r < aucs.size(); ++r)
            write_csv_row(out, {std::to_string(r + 1), strategy, scheme, format_number(aucs[r])});
    }
    const AucSummary s = summarize(aucs);
    ordered_json summary{{"strategy", strategy},
                         {"scheme", scheme},
                         {"metric", config.multiclass ? "hand_till_auc" : "roc_auc"},
                         {"repeats", s.n},
                         {"trees", config.forest.n_trees},
                         {"seed", config.seed},
                         {"balanced", config.balanced},
                         {"mean", number(s.mean)},
                         {"sd", number(s.sd)},
                         {"min", number(s.min)},
                         {"q1", number(s.q1)},
                         {"median", number(s.median)},
                         {"q3", number(s.q3)},
                         {"max", number(s.max)}};
    auto out = open_output(dir / "summary.json");
    out << render_json(summary, 2) << '\n';
}

} // namespace medfx
