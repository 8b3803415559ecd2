#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "artifact.hpp"
#include "config.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "features.hpp"
#include "fsutil.hpp"
#include "ingest.hpp"
#include "linear.hpp"
#include "mlp.hpp"
#include "physics.hpp"
#include "report.hpp"
#include "synthetic.hpp"
#include "text.hpp"

// The pvcast command line: synth, ingest, train, predict, evaluate, report.
namespace pvcast::cli {

namespace fs = std::filesystem;

// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kSchema = 2,
    kEmpty = 3,
    kDivergence = 4,
    kMismatch = 5,
    kNoOverlap = 6,
};

class CommandError : public Error {
public:
    CommandError(int code, const std::string& what) : Error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

// Model output (normalized target) to array power in W, clamped to
// [0, rated array power]. In irradiance mode the denormalized irradiance is
// floored at zero and converted with the panel model.
inline double output_to_power(double y, features::TargetMode mode, const FeatureSpec& spec,
                              const physics::PanelArray& panel) {
    double p;
    if (mode == features::TargetMode::irradiance) {
        const double g = features::denormalize_value(spec.at("ghi_pyr"), y);
        p = physics::instantaneous_power(std::max(0.0, g), panel);
    } else {
        p = features::denormalize_value(spec.at(kPowerTarget), y);
    }
    if (!std::isfinite(p)) p = 0.0;
    return std::clamp(p, 0.0, panel.rated_power_w());
}

struct Io {
    std::ostream& out;
    std::ostream& err;
};

namespace detail {

inline void require_file(const fs::path& p, std::string_view what) {
    if (p.empty()) throw CommandError(kUsage, std::string(what) + " path not given");
    if (!fs::exists(p)) throw CommandError(kEmpty, std::string(what) + " not found: " + p.string());
}

inline void require_distinct(const std::vector<fs::path>& paths) {
    for (std::size_t i = 0; i < paths.size(); ++i)
        for (std::size_t j = i + 1; j < paths.size(); ++j)
            if (!paths[i].empty() && fs::weakly_canonical(paths[i]) == fs::weakly_canonical(paths[j]))
                throw CommandError(kUsage, "paths must be distinct: " + paths[i].string());
}

inline void ensure_dir(const fs::path& p) {
    if (!p.empty()) fs::create_directories(p);
}

inline std::vector<ingest::WeatherRecord> load_cache(const config::RunConfig& c) {
    if (!fs::exists(c.records_cache()))
        throw CommandError(kEmpty, "no cached dataset at " + c.records_cache().string() + "; run ingest first");
    std::ifstream in(c.records_cache());
    return ingest::parse_csv(in).records;
}

inline features::DatasetLayout layout_for(const config::RunConfig& c) {
    return {c.all_features ? features::all_inputs() : features::default_inputs(), c.target_mode};
}

template <class Write>
void write_text_atomic(const fs::path& p, Write&& write) {
    std::ostringstream os;
    write(os);
    fsutil::write_atomic(p, os.str());
}

}  // namespace detail

struct SynthOptions {
    std::string out;
    std::string actual_out;
    int days = 1461;
    double noise_sigma = 0.05;
    std::string relation = "nonlinear";
    std::string start = "2014-01-01";
};

inline int cmd_synth(const config::RunConfig& c, const SynthOptions& o, Io io) {
    if (o.out.empty()) throw CommandError(kUsage, "synth needs --out");
    auto start = parse_date(o.start);
    if (!start) throw CommandError(kUsage, "synth --start: expected yyyy-mm-dd");
    auto records = synthetic::generate(c.train.seed, o.days, o.noise_sigma, synthetic::parse_relation(o.relation), *start);
    detail::write_text_atomic(o.out, [&](std::ostream& os) { ingest::write_csv(os, records); });
    io.out << "wrote " << records.size() << " records to " << o.out << "\n";
    if (!o.actual_out.empty()) {
        const auto panel = c.panel_array();
        eval::PowerSeries actual;
        actual.reserve(records.size());
        for (const auto& r : records)
            actual.push_back({r.time, std::min(panel.rated_power_w(), physics::instantaneous_power(std::max(0.0, r.ghi_pyr), panel))});
        detail::write_text_atomic(o.actual_out, [&](std::ostream& os) { eval::write_power_csv(os, actual); });
        io.out << "wrote actual power for " << actual.size() << " slots to " << o.actual_out << "\n";
    }
    return kOk;
}

inline int cmd_ingest(const config::RunConfig& c, Io io) {
    detail::require_file(c.input, "input CSV");
    detail::ensure_dir(c.artifact_dir);
    detail::require_distinct({c.input, c.records_cache()});
    ingest::ParseOptions opts;
    opts.strict_range = c.strict_range;
    opts.drop_cleaning_rows = c.drop_cleaning_rows;
    std::ifstream in(c.input);
    auto result = ingest::ingest(in, opts);
    io.out << result.report.summary();
    if (result.records.empty()) throw CommandError(kEmpty, "no rows accepted from " + c.input.string());
    detail::write_text_atomic(c.records_cache(), [&](std::ostream& os) { ingest::write_csv(os, result.records); });
    io.out << "cached " << result.records.size() << " records at " << c.records_cache().string() << "\n";
    return kOk;
}

inline int cmd_train(const config::RunConfig& c, Io io) {
    auto records = detail::load_cache(c);
    if (records.empty()) throw CommandError(kEmpty, "cached dataset is empty");
    const auto layout = detail::layout_for(c);
    auto spec = default_feature_spec();
    if (c.all_features) {
        std::vector<ingest::WeatherRecord> before;
        for (const auto& r : records)
            if (r.time < c.split_boundary) before.push_back(r);
        const auto extras = features::extra_inputs();
        spec = features::with_inferred_bounds(spec, before.empty() ? records : before, extras);
    }
    const auto panel = c.panel_array();
    auto built = features::build_dataset(records, spec, layout, panel);
    auto split = features::chronological_split(built.matrix, c.split_boundary);
    if (split.one_side_empty())
        io.err << "warning: split boundary " << format_timestamp(c.split_boundary) << " leaves "
               << (split.train.empty() ? "the train" : "the test") << " side empty\n";
    if (split.train.empty()) throw CommandError(kEmpty, "empty train set");

    models::ModelArtifact artifact;
    artifact.bounds = spec;
    artifact.raw_inputs = layout.raw_inputs;
    artifact.target_mode = layout.mode;
    artifact.seed = c.train.seed;

    double train_loss = 0.0;
    std::optional<double> val_loss;
    if (c.model == "linreg") {
        auto lin = models::fit_linear(split.train, c.ridge_lambda);
        train_loss = models::mean_squared_error(models::predict(lin, split.train), split.train.target());
        artifact.model = std::move(lin);
    } else {
        auto mlp = models::fit_mlp(split.train, c.train, c.hidden_layers, c.activation);
        if (!mlp.training_loss.empty()) train_loss = mlp.training_loss.back();
        if (!mlp.validation_loss.empty()) val_loss = mlp.validation_loss.back();
        artifact.model = std::move(mlp);
    }

    const auto text_artifact = models::serialize_artifact(artifact);
    fsutil::write_atomic(c.model_path(), text_artifact);
    io.out << "model: " << c.model << " (" << split.train.rows() << " train rows, " << split.test.rows()
           << " test rows, " << built.dropped << " dropped)\n";
    io.out << "final train loss (MSE, normalized): " << text::format_double(train_loss) << "\n";
    if (val_loss) io.out << "final validation loss (MSE, normalized): " << text::format_double(*val_loss) << "\n";
    if (!split.test.empty()) {
        auto pred = models::predict(artifact, split.test);
        io.out << "held-out loss (MSE, normalized): "
               << text::format_double(models::mean_squared_error(pred, split.test.target())) << "\n";
    }
    io.out << "wrote " << c.model_path().string() << " (fnv1a64 " << models::hex64(models::fnv1a64(text_artifact))
           << ")\n";
    return kOk;
}

struct PredictOptions {
    std::string from;
    std::string to;
    std::string out;
};

inline int cmd_predict(const config::RunConfig& c, const PredictOptions& o, Io io) {
    detail::require_file(c.model_path(), "model artifact");
    const auto artifact = models::load_model(c.model_path());
    auto records = detail::load_cache(c);
    features::DatasetLayout layout = detail::layout_for(c);
    layout.mode = artifact.target_mode;
    if (layout.columns() != artifact.feature_order())
        throw CommandError(kMismatch, "feature columns do not match the model artifact's feature_order");

    Timestamp from = c.split_boundary;
    if (!o.from.empty()) {
        auto t = config::parse_time_or_date(o.from);
        if (!t) throw CommandError(kUsage, "--from: expected yyyy-mm-dd[ HH:MM]");
        from = *t;
    }
    std::optional<Timestamp> end;  // exclusive
    if (!o.to.empty()) {
        if (auto d = parse_date(text::trim(o.to))) end = start_of(Date{d->days + 1});
        else if (auto t = parse_timestamp(text::trim(o.to))) end = *t + 1;
        else throw CommandError(kUsage, "--to: expected yyyy-mm-dd[ HH:MM]");
    }
    std::vector<ingest::WeatherRecord> subset;
    for (const auto& r : records)
        if (r.time >= from && (!end || r.time < *end)) subset.push_back(r);
    if (subset.empty()) throw CommandError(kEmpty, "no records in the requested range");

    const auto panel = c.panel_array();
    auto built = features::build_dataset(subset, artifact.bounds, layout, panel);
    auto y = models::predict(artifact, built.matrix);
    eval::PowerSeries series;
    series.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        series.push_back({built.matrix.timestamps()[i], output_to_power(y[i], artifact.target_mode, artifact.bounds, panel)});

    const fs::path out = o.out.empty() ? c.artifact_dir / "predicted.csv" : fs::path(o.out);
    detail::ensure_dir(out.parent_path());
    detail::write_text_atomic(out, [&](std::ostream& os) { eval::write_power_csv(os, series); });
    io.out << "wrote " << series.size() << " predictions to " << out.string() << "\n";
    return kOk;
}

struct EvaluateOptions {
    std::string predicted;
    std::string actual;
};

inline int cmd_evaluate(const config::RunConfig& c, const EvaluateOptions& o, Io io) {
    const fs::path predicted = o.predicted.empty() ? c.artifact_dir / "predicted.csv" : fs::path(o.predicted);
    const fs::path actual = o.actual;
    detail::require_file(predicted, "predicted CSV");
    detail::require_file(actual, "actual CSV");
    detail::require_distinct({predicted, actual, c.report_dir});
    std::ifstream pin(predicted), ain(actual);
    auto pred = eval::read_power_csv(pin);
    auto act = eval::read_power_csv(ain);
    if (pred.empty() || act.empty()) throw CommandError(kEmpty, "predicted or actual series is empty");
    auto r = eval::evaluate(pred, act);

    detail::ensure_dir(c.report_dir);
    detail::write_text_atomic(c.report_dir / "per_interval.csv", [&](std::ostream& os) { eval::write_per_interval_csv(os, r); });
    detail::write_text_atomic(c.report_dir / "per_day.csv", [&](std::ostream& os) { eval::write_per_day_csv(os, r); });
    detail::write_text_atomic(c.report_dir / "summary.csv", [&](std::ostream& os) { eval::write_summary_csv(os, r); });
    io.out << "days: " << r.per_day.size() << ", daily MAPE: "
           << (r.mape ? text::format_fixed(*r.mape, 3) + " %" : std::string("undefined")) << ", undefined intervals: "
           << r.undefined_count << ", unmatched predicted/actual: " << r.unmatched_predicted << "/" << r.unmatched_actual
           << "\n";
    return kOk;
}

struct ReportOptions {
    std::string day;
};

inline int cmd_report(const config::RunConfig& c, const ReportOptions& o, Io io) {
    const auto interval_path = c.report_dir / "per_interval.csv";
    const auto day_path = c.report_dir / "per_day.csv";
    detail::require_file(interval_path, "per_interval.csv");
    detail::require_file(day_path, "per_day.csv");
    std::ifstream iin(interval_path), din(day_path);
    auto intervals = eval::read_per_interval_csv(iin);
    auto days = eval::read_per_day_csv(din);
    if (intervals.empty()) throw CommandError(kEmpty, "per_interval.csv has no rows");

    Date day = date_of(intervals.front().time);
    if (!o.day.empty()) {
        auto d = parse_date(text::trim(o.day));
        if (!d) throw CommandError(kUsage, "--day: expected yyyy-mm-dd");
        day = *d;
    }
    fsutil::write_atomic(c.report_dir / "comparison_day.svg", report::comparison_day_svg(intervals, day));
    fsutil::write_atomic(c.report_dir / "comparison_month.svg", report::comparison_month_svg(days));
    fsutil::write_atomic(c.report_dir / "ape_daily.svg", report::ape_daily_svg(days));
    io.out << "wrote comparison_day.svg, comparison_month.svg, ape_daily.svg to " << c.report_dir.string() << "\n";
    return kOk;
}

namespace detail {

// --key value overrides. Each config key gets an underscore and a hyphen spelling.
struct KeyOptions {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::map<std::string, bool> flags;
    std::string config_path;

    void attach(CLI::App& app) {
        app.add_option("--config", config_path, "Flat key = value config file");
        const auto& flag_keys = config::flag_keys();
        for (const auto& key : config::known_keys()) {
            std::string names = "--" + key;
            std::string hyphen = key;
            std::replace(hyphen.begin(), hyphen.end(), '_', '-');
            if (hyphen != key) names += ",--" + hyphen;
            if (std::find(flag_keys.begin(), flag_keys.end(), key) != flag_keys.end())
                options[key] = app.add_flag(names, flags[key]);
            else
                options[key] = app.add_option(names, values[key]);
        }
    }

    config::RunConfig resolve() const {
        config::Settings s;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw config::ConfigError("cannot read config file " + config_path);
            s = config::parse_settings(in);
        }
        for (const auto& [key, opt] : options) {
            if (opt->count() == 0) continue;
            auto f = flags.find(key);
            s[key] = f != flags.end() ? (f->second ? "true" : "false") : values.at(key);
        }
        config::RunConfig c;
        config::apply(c, s);
        return c;
    }
};

inline int exit_code_for(const std::exception& e) {
    if (auto* ce = dynamic_cast<const CommandError*>(&e)) return ce->code();
    if (dynamic_cast<const SchemaError*>(&e)) return kSchema;
    if (dynamic_cast<const ArtifactError*>(&e)) return kSchema;
    if (dynamic_cast<const EmptyDatasetError*>(&e)) return kEmpty;
    if (dynamic_cast<const DivergenceError*>(&e)) return kDivergence;
    if (dynamic_cast<const ColumnMismatchError*>(&e)) return kMismatch;
    if (dynamic_cast<const NoOverlapError*>(&e)) return kNoOverlap;
    return kUsage;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"pvcast: photovoltaic power forecasting from weather observations"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic weather CSV");
    auto* ingest = app.add_subcommand("ingest", "Validate and gap-audit a weather CSV, caching accepted rows");
    auto* train = app.add_subcommand("train", "Train a model on rows before the split boundary");
    auto* predict = app.add_subcommand("predict", "Predict array power for a date range");
    auto* evaluate = app.add_subcommand("evaluate", "Compare predicted and actual power series");
    auto* report = app.add_subcommand("report", "Render SVG charts from evaluation CSVs");

    std::map<CLI::App*, detail::KeyOptions> keys;
    for (auto* sub : {synth, ingest, train, predict, evaluate, report}) keys[sub].attach(*sub);

    SynthOptions so;
    synth->add_option("--out", so.out, "Output weather CSV")->required();
    synth->add_option("--actual-out,--actual_out", so.actual_out, "Also write time,power_w computed from the irradiance");
    synth->add_option("--days", so.days, "Number of days")->check(CLI::PositiveNumber);
    synth->add_option("--noise-sigma,--noise_sigma", so.noise_sigma, "Relative Gaussian noise on irradiance");
    synth->add_option("--relation", so.relation, "linear or nonlinear")->check(CLI::IsMember({"linear", "nonlinear"}));
    synth->add_option("--start", so.start, "First date, yyyy-mm-dd");

    PredictOptions po;
    predict->add_option("--from", po.from, "First timestamp or date (default: split boundary)");
    predict->add_option("--to", po.to, "Last timestamp or date, inclusive");
    predict->add_option("--out", po.out, "Output CSV (default: <artifact_dir>/predicted.csv)");

    EvaluateOptions eo;
    evaluate->add_option("--predicted", eo.predicted, "Predicted time,power_w CSV");
    evaluate->add_option("--actual", eo.actual, "Actual time,power_w CSV")->required();

    ReportOptions ro;
    report->add_option("--day", ro.day, "Day for comparison_day.svg (default: first day)");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        Io io{out, err};
        for (auto& [sub, ko] : keys) {
            if (!sub->parsed()) continue;
            const auto cfg = ko.resolve();
            if (sub == synth) return cmd_synth(cfg, so, io);
            if (sub == ingest) return cmd_ingest(cfg, io);
            if (sub == train) return cmd_train(cfg, io);
            if (sub == predict) return cmd_predict(cfg, po, io);
            if (sub == evaluate) return cmd_evaluate(cfg, eo, io);
            if (sub == report) return cmd_report(cfg, ro, io);
        }
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return detail::exit_code_for(e);
    }
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace pvcast::cli
