#include "commands.hpp"

#include "aldi/config.hpp"
#include "aldi/csv.hpp"
#include "aldi/detector.hpp"
#include "aldi/error.hpp"
#include "aldi/eval.hpp"
#include "aldi/ingest.hpp"
#include "aldi/labels.hpp"
#include "aldi/pipeline.hpp"
#include "aldi/time.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace aldi::cli {

namespace fs = std::filesystem;

namespace {

// A failure tagged with the pipeline stage that raised it.
struct StageFailure {
    std::string stage;
    int code;
    std::string message;
};

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw StageFailure{stage, kConfigError, e.what()};
    } catch (const IoError& e) {
        throw StageFailure{stage, kIoError, e.what()};
    } catch (const std::exception& e) {
        throw StageFailure{stage, kPipelineError, e.what()};
    }
}

// Settings shared by the subcommands that read meter data. Flags are applied
// on top of the optional --config file in command-line order.
struct Settings {
    std::string config_path;
    std::vector<std::string> inputs;
    std::vector<std::pair<std::string, std::string>> overrides;

    RunConfig resolve() const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!inputs.empty()) {
            cfg.inputs.assign(inputs.begin(), inputs.end());
        }
        for (const auto& [key, value] : overrides) {
            cfg.set(key, value);
        }
        cfg.validate();
        return cfg;
    }
};

void add_setting(CLI::App* app, Settings& s, const std::string& flag, const std::string& key,
                 const std::string& help) {
    app->add_option_function<std::string>(
        flag, [&s, key](const std::string& v) { s.overrides.emplace_back(key, v); }, help);
}

void add_input_options(CLI::App* app, Settings& s) {
    app->add_option("--config", s.config_path, "Configuration file (key = value lines)");
    app->add_option("--input", s.inputs, "Long-format meter CSV; repeat for several files");
    add_setting(app, s, "--timestamp-column", "timestamp_column", "Timestamp column name");
    add_setting(app, s, "--building-column", "building_column", "Building id column name");
    add_setting(app, s, "--reading-column", "reading_column", "Meter reading column name");
    add_setting(app, s, "--site-column", "site_column", "Site id column name");
    add_setting(app, s, "--default-site", "default_site", "Site for rows without a site column");
    add_setting(app, s, "--max-gap", "max_gap", "Longest interior gap (hours) to interpolate");
}

void add_method_options(CLI::App* app, Settings& s) {
    add_setting(app, s, "--n-components", "n_components", "GMM components for aldi++");
    add_setting(app, s, "--p-threshold", "p_threshold", "KS p-value threshold for aldi");
    add_setting(app, s, "--aggregation", "aggregation", "day-start or day-mean");
    add_setting(app, s, "--granularity", "granularity", "site or building");
    add_setting(app, s, "--seed", "seed", "Random seed");
    add_setting(app, s, "--window", "window", "Matrix profile window length (hours)");
    app->add_flag_function(
        "--leave-one-out",
        [&s](std::int64_t) { s.overrides.emplace_back("leave_one_out", "true"); },
        "Exclude the tested day from its weekday reference");
    add_setting(app, s, "--out", "out", "Output directory");
}

void warn(const std::string& msg) { std::cerr << "aldi: warning: " << msg << '\n'; }

std::vector<ingest::Portfolio> load_portfolios(const RunConfig& cfg) {
    return in_stage("ingest", [&] {
        if (cfg.inputs.empty()) {
            throw ConfigError("no input file given (use --input or 'input =' in the config)");
        }
        std::vector<ingest::MeterRecord> records;
        for (const auto& path : cfg.inputs) {
            auto report = ingest::parse_csv(path, cfg.columns, cfg.sites);
            if (report.malformed_rows > 0) {
                warn(path.string() + ": skipped " + std::to_string(report.malformed_rows) + " malformed row(s)");
                for (const auto& ex : report.malformed_examples) warn("  " + ex);
            }
            records.insert(records.end(), std::make_move_iterator(report.records.begin()),
                           std::make_move_iterator(report.records.end()));
        }
        std::vector<ingest::Portfolio> out;
        for (auto& aligned : ingest::align_sites(records)) {
            const auto& site = aligned.portfolio.site_id;
            if (aligned.duplicates > 0) {
                warn("site '" + site + "': " + std::to_string(aligned.duplicates) +
                     " duplicate reading(s), last one kept");
            }
            if (aligned.outside_whole_days > 0) {
                warn("site '" + site + "': " + std::to_string(aligned.outside_whole_days) +
                     " reading(s) outside whole days dropped");
            }
            out.push_back(ingest::impute_short_gaps(aligned.portfolio, cfg.max_gap));
        }
        return out;
    });
}

void prepare_dir(const fs::path& dir) {
    in_stage("output", [&] {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    });
}

void write_output(const fs::path& path, const std::string& contents) {
    in_stage("output", [&] { csv::write_file_atomic(path, contents); });
}

template <typename Writer>
std::string render(Writer&& w) {
    std::ostringstream s;
    w(s);
    return s.str();
}

LabelSet load_labels(const std::string& path, const char* stage) {
    return in_stage(stage, [&] { return read_labels(fs::path(path)); });
}

// detect ----------------------------------------------------------------------

int cmd_detect(const Settings& s) {
    const RunConfig cfg = in_stage("config", [&] { return s.resolve(); });
    const auto portfolios = load_portfolios(cfg);
    const auto result = in_stage("detect", [&] { return pipeline::detect(portfolios, cfg.detect_options()); });
    for (const auto& d : result.diagnostics) warn(d);

    prepare_dir(cfg.out);
    write_output(cfg.out / "labels.csv", labels_to_csv(result.labels));
    write_output(cfg.out / "dvalues.csv", render([&](std::ostream& o) { detect::write_dvalues(o, result.dvalues); }));
    write_output(cfg.out / "run.conf", cfg.serialize());

    std::cout << "labelled " << result.labels.size() << " " << to_string(result.labels.granularity()) << " key(s): "
              << result.labels.count(Label::Discord) << " discord, " << result.labels.count(Label::NonDiscord)
              << " non-discord, " << result.labels.count(Label::Unevaluable) << " unevaluable\n";
    return kOk;
}

// evaluate --------------------------------------------------------------------

struct EvaluateArgs {
    std::string pred;
    std::string truth;
    std::string out;
    std::optional<int> to_daily;
    bool broadcast = false;
};

void emit_report(const eval::BenchmarkReport& report, const fs::path& out) {
    write_report_table(std::cout, report);
    if (out.empty()) return;
    prepare_dir(out);
    write_output(out / "report.csv", render([&](std::ostream& o) { eval::write_report_csv(o, report); }));
    write_output(out / "report.txt", render([&](std::ostream& o) { eval::write_report_table(o, report); }));
    write_output(out / "confusion.csv", render([&](std::ostream& o) { eval::write_confusion_csv(o, report); }));
}

int cmd_evaluate(const EvaluateArgs& a) {
    if (a.to_daily && (*a.to_daily < 1 || *a.to_daily > 24)) {
        throw StageFailure{"config", kConfigError, "--to-daily must lie in [1, 24]"};
    }
    const LabelSet pred = load_labels(a.pred, "evaluate");
    const LabelSet truth = load_labels(a.truth, "evaluate");

    eval::MethodReport m = in_stage("evaluate", [&] {
        eval::HarmonizeOptions opts;
        opts.to_daily = a.to_daily;
        opts.broadcast = a.broadcast;
        auto [p, t] = eval::harmonize(pred, truth, opts);
        const auto cm = eval::confusion(p, t);
        eval::MethodReport r;
        r.name = pred.method().empty() ? "pred" : pred.method();
        r.matrix = cm.matrix;
        r.excluded_unevaluable = cm.excluded_unevaluable;
        r.rates = eval::tpr_fpr(cm.matrix);
        r.roc_auc = eval::binary_auc(cm.matrix);
        if (const auto scores = eval::dvalue_scores(p); !scores.empty()) {
            try {
                r.roc_auc_scores = eval::roc_auc(scores, t);
            } catch (const std::invalid_argument&) {
            }
        }
        if (cm.unmatched > 0) warn(std::to_string(cm.unmatched) + " key(s) present on one side only were ignored");
        if (cm.excluded_unevaluable > 0) {
            warn(std::to_string(cm.excluded_unevaluable) + " unevaluable key(s) excluded");
        }
        return r;
    });
    eval::BenchmarkReport report;
    report.methods.push_back(std::move(m));
    emit_report(report, a.out);
    return kOk;
}

// export-filter ---------------------------------------------------------------

int cmd_export_filter(const Settings& s, const std::string& labels_path, const std::string& out) {
    const LabelSet labels = load_labels(labels_path, "export");
    LabelSet hourly;
    if (labels.granularity() == Granularity::BuildingHour) {
        hourly = labels;
    } else {
        const RunConfig cfg = in_stage("config", [&] {
            if (s.inputs.empty() && s.config_path.empty()) {
                throw ConfigError("daily labels need --input (or --config) to expand to hourly rows");
            }
            return s.resolve();
        });
        const auto portfolios = load_portfolios(cfg);
        hourly = in_stage("export", [&] { return detect::daily_to_hourly(labels, portfolios); });
    }
    in_stage("output", [&] { detect::export_train_filter(hourly, out); });
    std::cout << "wrote " << hourly.size() << " filter row(s), "
              << hourly.size() - hourly.count(Label::NonDiscord) << " dropped\n";
    return kOk;
}

// benchmark -------------------------------------------------------------------

int cmd_benchmark(const Settings& s, const std::optional<std::string>& truth_flag, bool no_broadcast) {
    const RunConfig cfg = in_stage("config", [&] {
        RunConfig c = s.resolve();
        if (truth_flag) c.truth = *truth_flag;
        if (!c.truth) throw ConfigError("benchmark needs --truth (or 'truth =' in the config)");
        return c;
    });
    const LabelSet truth = load_labels(cfg.truth->string(), "evaluate");
    const auto portfolios = load_portfolios(cfg);

    std::vector<eval::Labeler> labelers;
    for (const auto m : cfg.methods) {
        auto opts = cfg.detect_options();
        opts.method = m;
        labelers.push_back(eval::Labeler{std::string(pipeline::to_string(m)),
                                         [&portfolios, opts] { return pipeline::detect(portfolios, opts).labels; }});
    }
    eval::HarmonizeOptions h;
    h.to_daily = cfg.to_daily.value_or(14);
    h.broadcast = !no_broadcast;
    const auto report = in_stage("benchmark", [&] { return eval::benchmark(labelers, truth, cfg.runs, h); });

    emit_report(report, cfg.out);
    write_output(cfg.out / "run.conf", cfg.serialize());
    bool any_failed = false;
    for (const auto& m : report.methods) any_failed = any_failed || m.failed;
    return any_failed ? kPipelineError : kOk;
}

// convert ---------------------------------------------------------------------

struct ConvertArgs {
    std::string input;
    std::string out;
    std::string timestamp_column = "timestamp";
    std::string site = "site";
};

int cmd_convert(const ConvertArgs& a) {
    const std::string contents = in_stage("ingest", [&] {
        std::ifstream in(a.input);
        if (!in) throw IoError("cannot read '" + a.input + "'");
        std::string line;
        if (!std::getline(in, line)) throw DataError("'" + a.input + "' is empty");
        if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto header = csv::split_line(line);
        std::size_t ts_col = header.size();
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (csv::trim(header[i]) == a.timestamp_column) ts_col = i;
        }
        if (ts_col == header.size()) {
            throw DataError("wide file has no '" + a.timestamp_column + "' column");
        }

        // building column -> (timestamp, cell) rows
        std::map<std::string, std::map<std::int64_t, std::string>> columns;
        std::size_t line_no = 1;
        std::size_t skipped = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (csv::trim(line).empty()) continue;
            const auto fields = csv::split_line(line);
            const auto ts = fields.size() == header.size() ? parse_timestamp(csv::trim(fields[ts_col])) : std::nullopt;
            if (!ts) {
                ++skipped;
                continue;
            }
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (i == ts_col) continue;
                columns[csv::trim(header[i])][ts->hours] = csv::trim(fields[i]);
            }
        }
        if (skipped > 0) warn("skipped " + std::to_string(skipped) + " malformed row(s)");

        std::ostringstream out;
        out << "timestamp,site_id,building_id,meter_reading\n";
        for (const auto& [building, cells] : columns) {
            for (const auto& [hours, cell] : cells) {
                out << format_timestamp(HourStamp{hours}) << ',' << a.site << ',' << building << ',' << cell << '\n';
            }
        }
        return out.str();
    });
    write_output(a.out, contents);
    return kOk;
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"Discord day detection for hourly building meter data"};
    app.require_subcommand(1);

    Settings detect_s;
    auto* detect = app.add_subcommand("detect", "Label daily load profiles as discords");
    add_input_options(detect, detect_s);
    add_method_options(detect, detect_s);
    add_setting(detect, detect_s, "--method", "method", "aldi++, aldi or 2sd");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Score predicted labels against ground truth");
    evaluate->add_option("--pred", ev.pred, "Predicted label CSV")->required();
    evaluate->add_option("--truth", ev.truth, "Ground-truth label CSV")->required();
    evaluate->add_option("--to-daily", ev.to_daily, "Convert hourly sides to daily with this hour threshold");
    evaluate->add_flag("--broadcast", ev.broadcast, "Broadcast site-day predictions onto building-day truth");
    evaluate->add_option("--out", ev.out, "Directory for report files");

    Settings export_s;
    std::string export_labels;
    std::string export_out;
    auto* exporter = app.add_subcommand("export-filter", "Write a keep/drop filter for model training");
    exporter->add_option("--labels", export_labels, "Label CSV")->required();
    exporter->add_option("--out", export_out, "Filter CSV to write")->required();
    add_input_options(exporter, export_s);

    Settings bench_s;
    std::optional<std::string> bench_truth;
    bool no_broadcast = false;
    auto* bench = app.add_subcommand("benchmark", "Compare several methods against ground truth");
    add_input_options(bench, bench_s);
    add_method_options(bench, bench_s);
    add_setting(bench, bench_s, "--methods", "methods", "Comma-separated methods to compare");
    add_setting(bench, bench_s, "--runs", "runs", "Timed runs per method");
    add_setting(bench, bench_s, "--to-daily", "to_daily", "Hour threshold for hourly to daily conversion");
    bench->add_option("--truth", bench_truth, "Ground-truth label CSV");
    bench->add_flag("--no-broadcast", no_broadcast, "Do not broadcast site-day labels onto building-day truth");

    ConvertArgs conv;
    auto* convert = app.add_subcommand("convert", "Convert a wide meter CSV (one column per building) to long format");
    convert->add_option("--input", conv.input, "Wide CSV")->required();
    convert->add_option("--out", conv.out, "Long CSV to write")->required();
    convert->add_option("--timestamp-column", conv.timestamp_column, "Timestamp column name");
    convert->add_option("--site", conv.site, "Site id for every building");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (detect->parsed()) return cmd_detect(detect_s);
        if (evaluate->parsed()) return cmd_evaluate(ev);
        if (exporter->parsed()) return cmd_export_filter(export_s, export_labels, export_out);
        if (bench->parsed()) return cmd_benchmark(bench_s, bench_truth, no_broadcast);
        if (convert->parsed()) return cmd_convert(conv);
    } catch (const StageFailure& f) {
        std::cerr << "aldi: error in stage '" << f.stage << "': " << f.message << '\n';
        return f.code;
    }
    return kConfigError;
}

} // namespace aldi::cli
