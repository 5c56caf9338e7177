// medfx command-line front end: disentangle, audit, simulate.

#include "medfx/audit.hpp"
#include "medfx/error.hpp"
#include "medfx/format.hpp"
#include "medfx/json_io.hpp"
#include "medfx/pipeline.hpp"
#include "medfx/random.hpp"
#include "medfx/simgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kExitInput = 2;

int report_error(std::string_view code, const std::string &message) {
    std::cerr << ordered_json{{"error", code}, {"message", message}}.dump() << '\n';
    return kExitInput;
}

// Reads key=value lines ('#' starts a comment) and inserts "--key value" after
// the subcommand name unless the flag already appears on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    const auto it = std::find(args.begin(), args.end(), "--config");
    if (it == args.end())
        return args;
    if (it + 1 == args.end())
        throw medfx::Error(medfx::ErrorCode::InvalidArgument, "--config needs a file argument");
    const std::string path = *(it + 1);
    args.erase(it, it + 2);

    std::ifstream in(path);
    if (!in)
        throw medfx::Error(medfx::ErrorCode::Io, "cannot read config file " + path);
    std::vector<std::string> injected;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw medfx::Error(medfx::ErrorCode::InvalidArgument, "config line without '=': " + line);
            continue;
        }
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = "--" + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const bool present = std::any_of(args.begin(), args.end(), [&](const std::string &a) {
            return a == key || a.rfind(key + "=", 0) == 0;
        });
        if (present)
            continue;
        if (value == "true") {
            injected.push_back(key);
        } else if (value != "false") {
            injected.push_back(key);
            injected.push_back(value);
        }
    }
    const auto sub = args.size() > 1 ? args.begin() + 2 : args.end();
    args.insert(sub, injected.begin(), injected.end());
    return args;
}

struct DisentangleArgs {
    std::string input;
    std::string out_dir = "medfx_out";
    std::string backend = "newey-west";
    double alpha = 0.05;
    std::size_t min_per_arm = 15;
    double span = 2.0 / 3.0;
    std::size_t robust_iters = 3;
    double tz_offset = 0.0;
    bool backend_h1 = false;
    bool raw_pattern = false;
};

struct AuditArgs {
    std::string input;
    std::string out_dir = "medfx_audit";
    std::string strategy = "record";
    std::string labels = "original";
    std::size_t repeats = 100;
    std::size_t trees = 500;
    std::size_t mtry = 0;
    std::uint64_t seed = 0;
    double train_fraction = 0.5;
    bool balanced = false;
    bool multiclass = false;
};

struct SimulateArgs {
    std::string kind = "triplet";
    std::string out = "simulated.csv";
    std::uint64_t seed = 0;
    // triplet
    std::string model = "M3";
    std::size_t n = 200;
    double beta_treatment = 1.0;
    double beta_tod = 1.0;
    double beta_xt = 3.0;
    double ar_phi = 0.3;
    std::string scheduling = "unpaired";
    double tod_halfwidth = 6.0;
    std::size_t participants = 1;
    std::size_t features = 1;
    std::string activity = "tapping";
    // cohort
    std::size_t n_cases = 10;
    std::size_t n_controls = 10;
    std::size_t samples = 100;
    std::size_t p_features = 10;
    double fingerprint_sd = 3.0;
    double class_effect = 0.3;
    double noise_sd = 1.0;
    std::size_t effect_features = 0;
};

int run_disentangle_cmd(const DisentangleArgs &a) {
    medfx::DisentangleConfig config;
    config.battery.backend = *medfx::parse_backend(a.backend);
    config.battery.backend_for_h1 = a.backend_h1;
    config.ui.alpha = a.alpha;
    config.ui.raw_pattern = a.raw_pattern;
    config.lowess.span = a.span;
    config.lowess.robust_iters = a.robust_iters;
    config.min_per_arm = a.min_per_arm;
    config.utc_offset_hours = a.tz_offset;

    const medfx::IngestResult data = medfx::ingest_csv(a.input);
    const auto report = medfx::run_disentangle(data.records, data.feature_names, config);
    medfx::write_disentangle_outputs(report, a.out_dir);

    std::size_t treatment = 0, tod = 0;
    for (const auto &g : report.groups) {
        treatment += g.treatment->reject ? 1 : 0;
        tod += g.time_of_day->reject ? 1 : 0;
    }
    std::cout << "records: " << data.records.size() << " (rejected " << data.rejected << ")\n"
              << "participant x activity groups tested: " << report.groups.size() << '\n'
              << "treatment UI rejections: " << treatment << '\n'
              << "time-of-day UI rejections: " << tod << '\n'
              << "skipped items: " << report.skipped.size() << '\n'
              << "outputs: " << a.out_dir << '\n';
    return 0;
}

int run_audit_cmd(const AuditArgs &a) {
    medfx::ExperimentConfig config;
    config.strategy = *medfx::parse_split_strategy(a.strategy);
    config.labels = *medfx::parse_label_kind(a.labels);
    config.repeats = a.repeats;
    config.forest.n_trees = a.trees;
    if (a.mtry > 0)
        config.forest.mtry = a.mtry;
    config.train_fraction = a.train_fraction;
    config.balanced = a.balanced;
    config.multiclass = a.multiclass;
    config.seed = a.seed;
    medfx::validate(config);

    const medfx::CohortDataset data = medfx::ingest_cohort_csv(a.input);
    const auto aucs = medfx::run_split_experiment(data, config);
    medfx::write_audit_outputs(aucs, config, a.out_dir);
    const auto s = medfx::summarize(aucs);
    std::cout << (a.multiclass ? "hand_till_auc" : "roc_auc") << " over " << s.n << " repeats: mean "
              << medfx::format_number(s.mean) << ", median " << medfx::format_number(s.median) << ", IQR ["
              << medfx::format_number(s.q1) << ", " << medfx::format_number(s.q3) << "]\n"
              << "outputs: " << a.out_dir << '\n';
    return 0;
}

std::filesystem::path sidecar_path(const std::filesystem::path &out) {
    std::filesystem::path p = out;
    p.replace_extension(".config.json");
    return p;
}

void write_sidecar(const std::filesystem::path &out, const ordered_json &config) {
    std::ofstream side(sidecar_path(out), std::ios::binary);
    if (!side)
        throw medfx::Error(medfx::ErrorCode::Io, "cannot write " + sidecar_path(out).string());
    side << medfx::render_json(config, 2) << '\n';
}

std::ofstream open_csv(const std::filesystem::path &out) {
    if (out.has_parent_path())
        std::filesystem::create_directories(out.parent_path());
    std::ofstream file(out, std::ios::binary);
    if (!file)
        throw medfx::Error(medfx::ErrorCode::Io, "cannot write " + out.string());
    return file;
}

int run_simulate_cmd(const SimulateArgs &a, const CLI::App &cmd) {
    const std::filesystem::path out = a.out;
    if (a.kind == "cohort") {
        medfx::CohortSimConfig c;
        c.n_cases = a.n_cases;
        c.n_controls = a.n_controls;
        c.samples_per_participant = a.samples;
        c.p_features = a.p_features;
        c.fingerprint_sd = a.fingerprint_sd;
        c.class_effect = a.class_effect;
        c.noise_sd = a.noise_sd;
        if (a.effect_features > 0)
            c.effect_features = a.effect_features;
        c.seed = a.seed;
        const auto data = medfx::simulate_cohort(c);
        auto file = open_csv(out);
        medfx::write_cohort_csv(file, data);
        write_sidecar(out, {{"kind", "cohort"},
                            {"n_cases", c.n_cases},
                            {"n_controls", c.n_controls},
                            {"samples_per_participant", c.samples_per_participant},
                            {"p_features", c.p_features},
                            {"fingerprint_sd", medfx::json_number(c.fingerprint_sd)},
                            {"class_effect", medfx::json_number(c.class_effect)},
                            {"noise_sd", medfx::json_number(c.noise_sd)},
                            {"effect_features", c.effect_features.value_or(c.p_features)},
                            {"seed", c.seed}});
        std::cout << "wrote " << data.rows() << " rows to " << out.string() << '\n';
        return 0;
    }

    const auto model = medfx::parse_causal_model(a.model);
    medfx::TripletSimConfig c = medfx::default_triplet_config(*model);
    // Explicit flags override the model defaults, so structural zeros can be violated on purpose.
    if (cmd.count("--beta-treatment"))
        c.beta_treatment = a.beta_treatment;
    if (cmd.count("--beta-tod"))
        c.beta_tod = a.beta_tod;
    if (cmd.count("--beta-xt"))
        c.beta_xt = a.beta_xt;
    c.n = a.n;
    c.ar_phi = a.ar_phi;
    c.scheduling = *medfx::parse_scheduling(a.scheduling);
    c.tod_halfwidth = a.tod_halfwidth;
    medfx::validate(c);
    const auto activity = medfx::parse_activity(a.activity);

    std::vector<medfx::ActivityRecord> records;
    const std::size_t width = std::max<std::size_t>(2, std::to_string(a.participants).size());
    for (std::size_t i = 0; i < a.participants; ++i) {
        medfx::TripletSimConfig pc = c;
        pc.seed = a.participants == 1 ? a.seed : medfx::derive_seed(a.seed, i);
        std::string id = std::to_string(i + 1);
        id = "S" + std::string(width - id.size(), '0') + id;
        auto part = medfx::simulate_participant_records(pc, id, a.features, *activity);
        records.insert(records.end(), part.begin(), part.end());
    }
    auto file = open_csv(out);
    const auto names = medfx::simulated_feature_names(a.features);
    medfx::write_activity_csv(file, records, names);
    write_sidecar(out, {{"kind", "triplet"},
                        {"model", medfx::to_string(c.model)},
                        {"n", c.n},
                        {"beta_treatment", medfx::json_number(c.beta_treatment)},
                        {"beta_tod", medfx::json_number(c.beta_tod)},
                        {"beta_xt", medfx::json_number(c.beta_xt)},
                        {"ar_phi", medfx::json_number(c.ar_phi)},
                        {"scheduling", medfx::to_string(c.scheduling)},
                        {"tod_halfwidth", medfx::json_number(c.tod_halfwidth)},
                        {"participants", a.participants},
                        {"features", a.features},
                        {"activity", a.activity},
                        {"seed", a.seed}});
    std::cout << "wrote " << records.size() << " records to " << out.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Personalized treatment vs time-of-day effect analysis and split-leakage audits for longitudinal "
                 "activity data.\nAll numbers are written with 12 significant digits; MEDFX_THREADS caps worker "
                 "threads. Any subcommand accepts --config FILE holding key=value lines (flag name without dashes); "
                 "command-line flags take precedence."};
    app.require_subcommand(1);

    DisentangleArgs da;
    auto *dis = app.add_subcommand(
        "disentangle",
        "Run the five conditional-independence tests per participant x activity x feature and the treatment and "
        "time-of-day union-intersection tests.\nOutputs in --out-dir:\n"
        "  ui_tests.json      per participant x activity UI results and skipped items\n"
        "  features.jsonl     per feature class, label, raw and adjusted p-values\n"
        "  class_matrix.csv   activity, feature, one column per participant (treatment|time_of_day|both|none|missing)\n"
        "  diagnostics.csv    lag-1 autocorrelation and Ljung-Box test of each outcome-model residual series\n"
        "  parity.csv         per participant x activity arm counts and parity score\n"
        "  skipped.csv        items left out with the reason");
    dis->add_option("--input", da.input, "Activity CSV (participant_id, activity, timestamp, med_status, features...)")
        ->required()
        ->check(CLI::ExistingFile);
    dis->add_option("--out-dir", da.out_dir, "Output directory")->capture_default_str();
    dis->add_option("--backend", da.backend, "Regression backend for the outcome models")
        ->check(CLI::IsMember({"ols", "newey-west", "arima"}))
        ->capture_default_str();
    dis->add_option("--alpha", da.alpha, "Significance level for patterns and UI tests")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    dis->add_option("--min-per-arm", da.min_per_arm, "Minimum before and after records per participant x activity")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    dis->add_option("--span", da.span, "Lowess span in (0, 1]")->capture_default_str();
    dis->add_option("--robust-iters", da.robust_iters, "Lowess robustness iterations")->capture_default_str();
    dis->add_option("--tz-offset", da.tz_offset, "UTC offset in hours used for the time of day")->capture_default_str();
    dis->add_flag("--backend-h1", da.backend_h1, "Fit T ~ X with the chosen backend instead of OLS");
    dis->add_flag("--raw-pattern", da.raw_pattern, "Classify features on raw instead of adjusted p-values");

    AuditArgs aa;
    auto *aud = app.add_subcommand(
        "audit", "Repeated train/test random-forest experiments on a case/control cohort.\nOutputs in --out-dir:\n"
                 "  auc.csv        repeat, strategy, scheme, auc\n"
                 "  summary.json   mean, sd and quartiles of the AUC values");
    aud->add_option("--input", aa.input, "Cohort CSV (participant_id, label, features...)")
        ->required()
        ->check(CLI::ExistingFile);
    aud->add_option("--out-dir", aa.out_dir, "Output directory")->capture_default_str();
    aud->add_option("--strategy", aa.strategy, "Split strategy")
        ->check(CLI::IsMember({"record", "subject", "collapsed"}))
        ->capture_default_str();
    aud->add_option("--labels", aa.labels, "Label scheme")
        ->check(CLI::IsMember({"original", "block-shuffle", "full-shuffle"}))
        ->capture_default_str();
    aud->add_option("--repeats", aa.repeats, "Number of random splits")->check(CLI::PositiveNumber)->capture_default_str();
    aud->add_option("--trees", aa.trees, "Trees per forest")->check(CLI::PositiveNumber)->capture_default_str();
    aud->add_option("--mtry", aa.mtry, "Features tried per split (0 = floor(sqrt(p)))")->capture_default_str();
    aud->add_option("--seed", aa.seed, "Master seed")->capture_default_str();
    aud->add_option("--train-fraction", aa.train_fraction, "Participant share used for training in subject splits")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    aud->add_flag("--balanced", aa.balanced, "Subsample the larger class to the size of the smaller one per repeat");
    aud->add_flag("--multiclass", aa.multiclass,
                  "Classify participant identity (record strategy, original or full-shuffle labels)");

    SimulateArgs sa;
    auto *sim = app.add_subcommand(
        "simulate", "Generate synthetic data.\n  --kind triplet writes an activity CSV ingestible by 'disentangle'\n"
                    "  --kind cohort writes a cohort CSV ingestible by 'audit'\n"
                    "The configuration is echoed to a sidecar JSON next to the CSV (out.csv -> out.config.json).");
    sim->add_option("--kind", sa.kind, "Data kind")->check(CLI::IsMember({"triplet", "cohort"}))->capture_default_str();
    sim->add_option("--out", sa.out, "Output CSV path")->capture_default_str();
    sim->add_option("--seed", sa.seed, "Seed")->capture_default_str();
    sim->add_option("--model", sa.model, "Causal model M1..M9")
        ->check(CLI::IsMember({"M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8", "M9"}))
        ->capture_default_str();
    sim->add_option("--n", sa.n, "Records per participant")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--beta-treatment", sa.beta_treatment, "Treatment effect (model default when omitted)");
    sim->add_option("--beta-tod", sa.beta_tod, "Time-of-day effect per 6 hours (model default when omitted)");
    sim->add_option("--beta-xt", sa.beta_xt, "X/T cross-dependence strength (model default when omitted)");
    sim->add_option("--ar-phi", sa.ar_phi, "AR(1) coefficient of the errors")->capture_default_str();
    sim->add_option("--scheduling", sa.scheduling, "Task scheduling")
        ->check(CLI::IsMember({"paired", "unpaired"}))
        ->capture_default_str();
    sim->add_option("--tod-halfwidth", sa.tod_halfwidth, "Half-width in hours of the time-of-day noise")
        ->capture_default_str();
    sim->add_option("--participants", sa.participants, "Simulated participants")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--features", sa.features, "Outcome features per participant")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--activity", sa.activity, "Activity name")
        ->check(CLI::IsMember({"tapping", "voice", "walk", "rest"}))
        ->capture_default_str();
    sim->add_option("--n-cases", sa.n_cases, "Cohort case participants")->capture_default_str();
    sim->add_option("--n-controls", sa.n_controls, "Cohort control participants")->capture_default_str();
    sim->add_option("--samples", sa.samples, "Cohort rows per participant")->capture_default_str();
    sim->add_option("--p-features", sa.p_features, "Cohort feature count")->capture_default_str();
    sim->add_option("--fingerprint-sd", sa.fingerprint_sd, "Between-participant offset sd")->capture_default_str();
    sim->add_option("--class-effect", sa.class_effect, "Case shift on effect features")->capture_default_str();
    sim->add_option("--noise-sd", sa.noise_sd, "Within-participant noise sd")->capture_default_str();
    sim->add_option("--effect-features", sa.effect_features, "Leading features carrying the case shift (0 = all)")
        ->capture_default_str();

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args));
        std::vector<char *> cargs;
        for (auto &s : args)
            cargs.push_back(s.data());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        return report_error("UsageError", e.what());
    } catch (const medfx::Error &e) {
        return report_error(medfx::to_string(e.code()), e.what());
    }

    try {
        if (*dis)
            return run_disentangle_cmd(da);
        if (*aud)
            return run_audit_cmd(aa);
        return run_simulate_cmd(sa, *sim);
    } catch (const medfx::Error &e) {
        return report_error(medfx::to_string(e.code()), e.what());
    } catch (const std::exception &e) {
        report_error("InternalError", e.what());
        return 1;
    }
}
