#pragma once

#include "medfx/data.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace medfx {

/// M1-M3: X -> T. M4-M6: T -> X. M7-M9: X independent of T.
/// Within each family the first model has only X -> Y, the second only
/// T -> Y and the third both.
enum class CausalModel { M1 = 1, M2, M3, M4, M5, M6, M7, M8, M9 };
enum class Scheduling { paired, unpaired_random };

std::string_view to_string(CausalModel model) noexcept;
std::string_view to_string(Scheduling scheduling) noexcept;
std::optional<CausalModel> parse_causal_model(std::string_view text);
std::optional<Scheduling> parse_scheduling(std::string_view text);

bool has_treatment_effect(CausalModel model) noexcept;
bool has_tod_effect(CausalModel model) noexcept;
bool has_cross_dependence(CausalModel model) noexcept;

struct TripletSimConfig {
    CausalModel model = CausalModel::M3;
    std::size_t n = 200;
    double beta_treatment = 1.0;
    double beta_tod = 1.0;
    double beta_xt = 3.0; // hours of shift (X -> T) or logistic steepness (T -> X)
    double ar_phi = 0.3;
    Scheduling scheduling = Scheduling::unpaired_random;
    std::uint64_t seed = 0;
    double tod_halfwidth = 6.0;          // exogenous time-of-day noise is U(-h, h) around noon
    double start_epoch = 1425859200.0;   // a UTC midnight
};

/// Defaults with the model's structural zeros applied.
TripletSimConfig default_triplet_config(CausalModel model);

/// Throws ConfigViolation when a structural zero is non-zero or a value is
/// out of range.
void validate(const TripletSimConfig &config);

/// Shared design of one simulated participant: scheduling, X and T.
struct SimulatedDesign {
    std::vector<int> x;
    std::vector<double> t;
    std::vector<double> timestamps;
};

SimulatedDesign simulate_design(const TripletSimConfig &config);

/// Outcome for one design; `stream` selects an independent noise stream.
std::vector<double> simulate_outcome(const TripletSimConfig &config, const SimulatedDesign &design,
                                     std::uint64_t stream = 0);

TripletSeries simulate_triplet(const TripletSimConfig &config);

/// Records of one participant carrying `n_features` outcomes that share X and T.
std::vector<ActivityRecord> simulate_participant_records(const TripletSimConfig &config, const std::string &participant_id,
                                                         std::size_t n_features, Activity activity = Activity::tapping);

std::vector<std::string> simulated_feature_names(std::size_t n_features);

struct CohortSimConfig {
    std::size_t n_cases = 10;
    std::size_t n_controls = 10;
    std::size_t samples_per_participant = 100;
    std::size_t p_features = 10;
    double fingerprint_sd = 3.0;
    double class_effect = 0.3;
    double noise_sd = 1.0;
    std::optional<std::size_t> effect_features; // leading features shifted for cases; all when unset
    std::uint64_t seed = 0;
};

void validate(const CohortSimConfig &config);

CohortDataset simulate_cohort(const CohortSimConfig &config);

} // namespace medfx
