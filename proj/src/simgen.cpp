#include "medfx/simgen.hpp"

#include "medfx/error.hpp"
#include "medfx/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace medfx {

namespace {

constexpr double kSecondsPerDay = 86400.0;

std::string two_digit(std::size_t i, std::size_t width) {
    std::string s = std::to_string(i);
    return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

double clip_hour(double t) { return std::clamp(t, 0.0, std::nextafter(24.0, 0.0)); }

double exogenous_hour(const TripletSimConfig &c, Rng &rng) {
    return clip_hour(12.0 + uniform(rng, -c.tod_halfwidth, c.tod_halfwidth));
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

int family(CausalModel model) { return (static_cast<int>(model) - 1) / 3; }

} // namespace

std::string_view to_string(CausalModel model) noexcept {
    static constexpr std::array<std::string_view, 9> names{"M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8", "M9"};
    return names[static_cast<std::size_t>(model) - 1];
}

std::string_view to_string(Scheduling scheduling) noexcept {
    return scheduling == Scheduling::paired ? "paired" : "unpaired";
}

std::optional<CausalModel> parse_causal_model(std::string_view text) {
    for (int m = 1; m <= 9; ++m)
        if (text == to_string(static_cast<CausalModel>(m)))
            return static_cast<CausalModel>(m);
    return std::nullopt;
}

std::optional<Scheduling> parse_scheduling(std::string_view text) {
    if (text == "paired")
        return Scheduling::paired;
    if (text == "unpaired" || text == "unpaired-random" || text == "unpaired_random")
        return Scheduling::unpaired_random;
    return std::nullopt;
}

bool has_treatment_effect(CausalModel model) noexcept { return (static_cast<int>(model) - 1) % 3 != 1; }
bool has_tod_effect(CausalModel model) noexcept { return (static_cast<int>(model) - 1) % 3 != 0; }
bool has_cross_dependence(CausalModel model) noexcept { return family(model) != 2; }

TripletSimConfig default_triplet_config(CausalModel model) {
    TripletSimConfig c;
    c.model = model;
    if (!has_treatment_effect(model))
        c.beta_treatment = 0.0;
    if (!has_tod_effect(model))
        c.beta_tod = 0.0;
    if (!has_cross_dependence(model))
        c.beta_xt = 0.0;
    return c;
}

void validate(const TripletSimConfig &c) {
    const auto fail = [&](const std::string &what) {
        throw Error(ErrorCode::ConfigViolation, std::string(to_string(c.model)) + ": " + what);
    };
    if (!has_treatment_effect(c.model) && c.beta_treatment != 0.0)
        fail("beta_treatment must be 0");
    if (!has_tod_effect(c.model) && c.beta_tod != 0.0)
        fail("beta_tod must be 0");
    if (!has_cross_dependence(c.model) && c.beta_xt != 0.0)
        fail("beta_xt must be 0");
    if (c.n < 1)
        fail("n must be at least 1");
    if (!(c.ar_phi > -1.0 && c.ar_phi < 1.0))
        fail("ar_phi must lie in (-1, 1)");
    if (!(c.tod_halfwidth >= 0.0 && c.tod_halfwidth <= 12.0))
        fail("tod_halfwidth must lie in [0, 12]");
    if (!std::isfinite(c.beta_treatment) || !std::isfinite(c.beta_tod) || !std::isfinite(c.beta_xt) ||
        !std::isfinite(c.start_epoch))
        fail("parameters must be finite");
}

SimulatedDesign simulate_design(const TripletSimConfig &c) {
    validate(c);
    Rng rng = make_rng(derive_seed(c.seed, 0));
    const int fam = family(c.model);

    // Draw (day, x, hour) triples, then order them in time.
    struct Task {
        std::size_t day;
        int x;
        double t;
    };
    std::vector<Task> tasks;
    tasks.reserve(c.n);
    const auto hour_given_x = [&](int x) {
        return clip_hour(12.0 + c.beta_xt * (2.0 * x - 1.0) + uniform(rng, -c.tod_halfwidth, c.tod_halfwidth));
    };

    if (c.scheduling == Scheduling::paired) {
        for (std::size_t day = 0; tasks.size() < c.n; ++day) {
            const bool both = tasks.size() + 1 < c.n;
            if (fam == 0) {
                tasks.push_back({day, 0, hour_given_x(0)});
                if (both)
                    tasks.push_back({day, 1, hour_given_x(1)});
            } else if (fam == 1) {
                // T -> X: the later task of the day is the after-medication one.
                double a = exogenous_hour(c, rng);
                double b = exogenous_hour(c, rng);
                if (both) {
                    if (b < a)
                        std::swap(a, b);
                    tasks.push_back({day, 0, a});
                    tasks.push_back({day, 1, b});
                } else {
                    tasks.push_back({day, bernoulli(rng, logistic(c.beta_xt * (a - 12.0) / 6.0)) ? 1 : 0, a});
                }
            } else {
                tasks.push_back({day, 0, exogenous_hour(c, rng)});
                if (both)
                    tasks.push_back({day, 1, exogenous_hour(c, rng)});
            }
        }
    } else {
        for (std::size_t day = 0; day < c.n; ++day) {
            if (fam == 0) {
                const int x = bernoulli(rng, 0.5) ? 1 : 0;
                tasks.push_back({day, x, hour_given_x(x)});
            } else if (fam == 1) {
                const double t = exogenous_hour(c, rng);
                tasks.push_back({day, bernoulli(rng, logistic(c.beta_xt * (t - 12.0) / 6.0)) ? 1 : 0, t});
            } else {
                const int x = bernoulli(rng, 0.5) ? 1 : 0;
                tasks.push_back({day, x, exogenous_hour(c, rng)});
            }
        }
    }

    SimulatedDesign design;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const double day_start = c.start_epoch + static_cast<double>(tasks[i].day) * kSecondsPerDay;
        double ts = std::round(day_start + tasks[i].t * 3600.0);
        if (ts >= day_start + kSecondsPerDay)
            ts = day_start + kSecondsPerDay - 1.0;
        order.emplace_back(ts, i);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[ts, i] : order) {
        const double day_start = c.start_epoch + static_cast<double>(tasks[i].day) * kSecondsPerDay;
        design.x.push_back(tasks[i].x);
        design.t.push_back((ts - day_start) / 3600.0);
        design.timestamps.push_back(ts);
    }
    return design;
}

std::vector<double> simulate_outcome(const TripletSimConfig &c, const SimulatedDesign &design, std::uint64_t stream) {
    Rng rng = make_rng(derive_seed(c.seed, 1 + stream));
    const std::size_t n = design.x.size();
    std::vector<double> y(n);
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = standard_normal(rng);
        eps = i == 0 ? z / std::sqrt(1.0 - c.ar_phi * c.ar_phi) : c.ar_phi * eps + z;
        y[i] = c.beta_treatment * design.x[i] + c.beta_tod * (design.t[i] - 12.0) / 6.0 + eps;
    }
    return y;
}

TripletSeries simulate_triplet(const TripletSimConfig &config) {
    SimulatedDesign design = simulate_design(config);
    TripletSeries series;
    series.y = simulate_outcome(config, design);
    series.x = std::move(design.x);
    series.t = std::move(design.t);
    series.timestamps = std::move(design.timestamps);
    return series;
}

std::vector<std::string> simulated_feature_names(std::size_t n_features) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < n_features; ++k)
        names.push_back("f" + two_digit(k + 1, 2));
    return names;
}

std::vector<ActivityRecord> simulate_participant_records(const TripletSimConfig &config, const std::string &participant_id,
                                                         std::size_t n_features, Activity activity) {
    const SimulatedDesign design = simulate_design(config);
    const auto names = simulated_feature_names(n_features);
    std::vector<ActivityRecord> records(design.x.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].participant_id = participant_id;
        records[i].activity = activity;
        records[i].timestamp = design.timestamps[i];
        records[i].med_status = design.x[i] == 1 ? MedStatus::after : MedStatus::before;
        records[i].sequence = i;
    }
    for (std::size_t k = 0; k < n_features; ++k) {
        const auto y = simulate_outcome(config, design, k);
        for (std::size_t i = 0; i < records.size(); ++i)
            records[i].features[names[k]] = y[i];
    }
    return records;
}

void validate(const CohortSimConfig &c) {
    if (c.n_cases < 1 || c.n_controls < 1 || c.samples_per_participant < 1 || c.p_features < 1)
        throw Error(ErrorCode::ConfigViolation, "cohort counts must be at least 1");
    if (!(c.fingerprint_sd >= 0.0) || !(c.noise_sd >= 0.0))
        throw Error(ErrorCode::ConfigViolation, "standard deviations must be non-negative");
    if (!std::isfinite(c.class_effect) || !std::isfinite(c.fingerprint_sd) || !std::isfinite(c.noise_sd))
        throw Error(ErrorCode::ConfigViolation, "cohort parameters must be finite");
    if (c.effect_features && *c.effect_features > c.p_features)
        throw Error(ErrorCode::ConfigViolation, "effect_features exceeds p_features");
}

CohortDataset simulate_cohort(const CohortSimConfig &c) {
    validate(c);
    const std::size_t participants = c.n_cases + c.n_controls;
    const std::size_t shifted = c.effect_features.value_or(c.p_features);
    const std::size_t width = std::to_string(participants).size() < 3 ? 3 : std::to_string(participants).size();

    CohortDataset data;
    for (std::size_t k = 0; k < c.p_features; ++k)
        data.feature_names.push_back("f" + two_digit(k + 1, 2));
    data.features.resize(static_cast<Eigen::Index>(participants * c.samples_per_participant),
                         static_cast<Eigen::Index>(c.p_features));

    Eigen::Index row = 0;
    for (std::size_t i = 0; i < participants; ++i) {
        const bool is_case = i < c.n_cases;
        const std::string pid = "P" + two_digit(i + 1, width);
        Rng rng = make_rng(derive_seed(c.seed, i));
        std::vector<double> offset(c.p_features);
        for (auto &o : offset)
            o = c.fingerprint_sd * standard_normal(rng);
        for (std::size_t s = 0; s < c.samples_per_participant; ++s, ++row) {
            data.participant_ids.push_back(pid);
            data.labels.push_back(is_case ? CohortLabel::case_ : CohortLabel::control);
            for (std::size_t k = 0; k < c.p_features; ++k) {
                const double shift = is_case && k < shifted ? c.class_effect : 0.0;
                data.features(row, static_cast<Eigen::Index>(k)) = offset[k] + shift + c.noise_sd * standard_normal(rng);
            }
        }
    }
    return data;
}

} // namespace medfx
