#pragma once

// Command-line front end. Every command validates its flags, calls library
// operations, writes its artifacts to files, and prints a short human summary
// on stdout. Exit codes: 0 ok, 2 usage or missing input, 3 data/integrity
// error, 4 backend error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trapsift/trapsift.hpp"

namespace trapsift::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kBackend = 4 };

struct InputMissing : ConfigError {
    using ConfigError::ConfigError;
};

inline void require_file(const std::string& flag, const fs::path& p) {
    if (p.empty()) throw InputMissing(flag + " is required");
    if (!fs::exists(p)) throw InputMissing(flag + ": no such file: " + p.string());
}

inline std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
    return buf;
}

// ---- ingest -------------------------------------------------------------

struct IngestArgs {
    std::string manifest;
    std::string out;
    std::string summary;
    std::string season_map;
    std::vector<std::string> empty_categories;
    bool require_bbox = false;
};

inline int ingest(const IngestArgs& a, std::ostream& log) {
    require_file("--manifest", a.manifest);
    if (a.out.empty()) throw InputMissing("--out is required");
    std::map<std::string, std::string> seasons;
    if (!a.season_map.empty()) {
        require_file("--season-map", a.season_map);
        seasons = read_season_map(a.season_map);
    }
    const Manifest m = parse_manifest(a.manifest, seasons);
    LabelPolicy policy;
    if (!a.empty_categories.empty()) policy.empty_categories = {a.empty_categories.begin(), a.empty_categories.end()};
    policy.require_bbox_for_nonempty = a.require_bbox;

    const LabelingResult r = to_labeled(m, policy);
    const LabelSummary s = summarize(r.set);
    write_labeled(a.out, r.set);

    Json summary = to_json(s);
    summary["excluded_without_bbox"] = r.excluded_without_bbox;
    summary["excluded_unannotated"] = r.excluded_unannotated;
    summary["corrupt"] = m.corrupt_count;
    const fs::path summary_path = a.summary.empty() ? fs::path(a.out).replace_extension(".summary.json") : fs::path(a.summary);
    write_json_file(summary_path, summary);

    log << "labeled " << r.set.size() << " images: empty=" << s.overall.empty << " nonempty=" << s.overall.nonempty
        << " locations=" << s.per_location.size() << "; excluded " << r.excluded_count() << ", corrupt "
        << m.corrupt_count << "\n";
    return kOk;
}

// ---- split --------------------------------------------------------------

struct SplitArgs {
    std::string labels;
    std::string policy = "location";
    std::string assignment;
    std::string manifest;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> holdout;
    std::size_t cap = 1000;
    bool no_cap = false;
    bool balance = false;
    bool bbox_only = false;
    std::string out;
};

inline int split(const SplitArgs& a, std::ostream& log) {
    require_file("--labels", a.labels);
    require_file("--assignment", a.assignment);
    if (a.out.empty()) throw InputMissing("--out is required");
    if (a.bbox_only) require_file("--manifest", a.manifest);
    const bool randomized = !a.no_cap || a.holdout || a.balance;
    if (randomized && !a.seed) throw ConfigError("--seed is required (capping, holdout and balancing are randomized)");

    SplitPlan plan;
    if (a.policy == "location") {
        plan.policy = SplitPlan::Policy::location;
        plan.locations.by_location = read_assignment_csv(a.assignment);
    } else if (a.policy == "time") {
        plan.policy = SplitPlan::Policy::time;
        plan.seasons.by_season = read_assignment_csv(a.assignment);
    } else {
        throw ConfigError("--split must be 'location' or 'time'");
    }
    plan.holdout_locations = a.holdout;
    if (!a.no_cap) plan.empty_cap = a.cap;
    plan.balance_train = a.balance;
    plan.bbox_only = a.bbox_only;
    plan.seed = a.seed.value_or(0);

    std::optional<Manifest> manifest;
    if (a.bbox_only) manifest = parse_manifest(a.manifest);
    SplitResult r = run_split_plan(read_labeled(a.labels), plan, manifest ? &*manifest : nullptr);
    if (!a.seed) r.provenance.seed.reset();
    write_split(a.out, r);
    for (Partition p : kPartitions) {
        const auto s = summarize(r[p]);
        log << to_string(p) << ": empty=" << s.overall.empty << " nonempty=" << s.overall.nonempty
            << " locations=" << s.per_location.size() << "\n";
    }
    return kOk;
}

// ---- scoring commands ---------------------------------------------------

struct LoadedEval {
    RunManifest run;
    JoinResult joined;
};

inline LoadedEval load_eval(const std::string& scores, const std::string& labels) {
    require_file("--scores", scores);
    require_file("--labels", labels);
    ScoreFile f = read_scores(scores);
    return {f.run, join(f.records, read_labeled(labels))};
}

inline Json join_json(const JoinResult& j) {
    return {{"matched", j.set.size()}, {"unmatched_scores", j.unmatched_scores}, {"unmatched_labels", j.unmatched_labels}};
}

struct EvalArgs {
    std::string scores;
    std::string labels;
    double target_recall = kDefaultTargetRecall;
    std::string out;
};

inline int calibrate(const EvalArgs& a, std::ostream& log) {
    if (a.out.empty()) throw InputMissing("--out is required");
    const auto e = load_eval(a.scores, a.labels);
    const auto c = calibrate_threshold(e.joined.set, a.target_recall);
    write_json_file(a.out, to_json(c));
    log << e.run.run_id << ": threshold " << csv::format_real(c.threshold) << " recall " << percent(c.point.recall)
        << " precision " << percent(c.point.precision) << " TNR " << percent(c.point.tnr) << "\n";
    return kOk;
}

/// Writes curve.csv, calibration.json and eval.json into the output directory.
inline int eval(const EvalArgs& a, std::ostream& log) {
    if (a.out.empty()) throw InputMissing("--out is required");
    const auto e = load_eval(a.scores, a.labels);
    const PRCurve curve = pr_curve(e.joined.set);
    const auto c = calibrate_threshold(e.joined.set, a.target_recall);
    const double auc = pr_auc(curve);

    const fs::path dir = a.out;
    fs::create_directories(dir);
    csv::write_text(dir / "curve.csv", curve_to_csv(curve));
    write_json_file(dir / "calibration.json", to_json(c));
    Json report;
    report["run"] = to_json(e.run);
    report["join"] = join_json(e.joined);
    report["pr_auc"] = auc;
    report["calibration"] = to_json(c);
    write_json_file(dir / "eval.json", report);
    log << e.run.run_id << ": PR-AUC " << csv::format_real(auc) << ", at recall>=" << csv::format_real(a.target_recall)
        << " threshold " << csv::format_real(c.threshold) << " precision " << percent(c.point.precision) << " TNR "
        << percent(c.point.tnr) << "\n";
    return kOk;
}

struct CompareArgs {
    std::vector<std::string> scores;
    std::string labels;
    double target_recall = kDefaultTargetRecall;
    double margin = kDefaultDegradationMargin;
    std::string out;
};

inline int compare(const CompareArgs& a, std::ostream& log) {
    if (a.scores.size() != 2) throw InputMissing("--scores must be given exactly twice (baseline, candidate)");
    if (a.out.empty()) throw InputMissing("--out is required");
    const auto ea = load_eval(a.scores[0], a.labels);
    const auto eb = load_eval(a.scores[1], a.labels);
    DeltaReport d = compare_runs(ea.joined.set, eb.joined.set, a.target_recall, a.margin);
    d.run_a = ea.run.run_id;
    d.run_b = eb.run.run_id;
    write_json_file(a.out, to_json(d));
    log << d.run_a << " -> " << d.run_b << ": precision " << percent(d.point_a.precision) << " -> "
        << percent(d.point_b.precision) << ", TNR " << percent(d.point_a.tnr) << " -> " << percent(d.point_b.tnr)
        << (d.degraded ? "  DEGRADED" : "") << "\n";
    return kOk;
}

struct SimulateArgs {
    std::string scores;
    std::string labels;
    std::optional<double> threshold;
    double target_recall = kDefaultTargetRecall;
    std::string sizes;
    std::string out;
};

inline int simulate(const SimulateArgs& a, std::ostream& log) {
    if (a.out.empty()) throw InputMissing("--out is required");
    const auto e = load_eval(a.scores, a.labels);
    std::optional<std::map<std::string, std::uint64_t>> sizes;
    if (!a.sizes.empty()) {
        require_file("--sizes", a.sizes);
        sizes.emplace();
        for (auto& row : csv::expect_header(csv::read_file(a.sizes), {"image_id", "bytes"}, a.sizes))
            (*sizes)[row[0]] = std::stoull(row[1]);
    }
    const double t = a.threshold ? *a.threshold : calibrate_threshold(e.joined.set, a.target_recall).threshold;
    const auto r = simulate_filter(e.joined.set, t, sizes ? &*sizes : nullptr);
    Json j;
    j["threshold"] = t;
    j["point"] = to_json(r.point);
    j["savings"] = to_json(r.savings);
    write_json_file(a.out, j);
    log << "threshold " << csv::format_real(t) << ": discard " << r.savings.n_discarded << "/" << r.savings.n_processed
        << " (" << percent(r.savings.discard_fraction) << "), TNR " << percent(r.point.tnr) << ", recall "
        << percent(r.point.recall) << "\n";
    return kOk;
}

// ---- bench --------------------------------------------------------------

struct BackendArgs {
    std::string backend;
    std::string model;
    int size = 224;
    std::string scale = "symmetric";
};

inline std::unique_ptr<InferenceBackend> open_backend(const BackendArgs& a) {
    auto b = make_backend(a.backend.empty() ? default_backend_name() : a.backend);
    require_file("--model", a.model);
    b->load(a.model);
    return b;
}

struct BenchArgs {
    BackendArgs backend;
    std::vector<std::string> inputs;
    std::size_t runs = kDefaultMeasuredRuns;
    std::size_t warmup = kDefaultWarmupRuns;
    bool memory = true;
    std::string out;
};

inline int bench(const BenchArgs& a, std::ostream& log) {
    if (a.out.empty()) throw InputMissing("--out is required");
    if (a.runs < 1) throw ConfigError("--runs must be at least 1");
    const PreprocessSpec spec{a.backend.size, parse_pixel_scale(a.backend.scale), ResizeMethod::bilinear};
    validate(spec);
    for (const auto& p : a.inputs) require_file("--input", p);
    auto backend = open_backend(a.backend);
    validate(spec, backend->metadata());

    BenchConfig cfg;
    cfg.warmup_runs = a.warmup;
    cfg.measured_runs = a.runs;
    for (const auto& p : a.inputs) cfg.inputs.push_back({fs::path(p).stem().string(), preprocess(read_bytes(p), spec)});
    if (cfg.inputs.empty()) cfg.inputs.push_back({"synthetic", constant_tensor(spec.target_size, 0.0f)});

    BenchReport report;
    try {
        report = run_bench(*backend, cfg);
    } catch (const BenchFailure& f) {
        write_json_file(a.out, to_json(f.partial()));
        throw;
    }
    if (a.memory) {
        try {
            auto fresh = make_backend(a.backend.backend.empty() ? default_backend_name() : a.backend.backend);
            report.peak_memory_bytes = measure_memory(*fresh, a.backend.model, cfg.inputs.front()).peak_bytes;
        } catch (const UnsupportedError& e) {
            log << "memory: " << e.what() << "\n";
        }
    }
    write_json_file(a.out, to_json(report));
    log << report.backend.model_name << ": mean " << csv::format_real(report.stats.mean_ms) << " ms over "
        << report.measured_runs << " runs (p95 " << csv::format_real(report.stats.p95_ms) << " ms)";
    if (report.peak_memory_bytes) log << ", peak RSS " << *report.peak_memory_bytes / (1024.0 * 1024.0) << " MiB";
    log << "\n";
    return kOk;
}

// ---- filter -------------------------------------------------------------

struct FilterArgs {
    BackendArgs backend;
    std::optional<double> threshold;
    std::string calibration;
    std::string action = "move";
    std::string quarantine;
    std::vector<std::string> inputs;
    std::string watch;
    std::vector<std::string> patterns;
    bool markers = false;
    std::optional<std::size_t> max_files;
    std::optional<double> idle_timeout_s;
    std::string out;
};

inline std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs, const std::vector<std::string>& patterns) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(in))
                if (e.is_regular_file() && matches_any(e.path().filename().string(), patterns)) found.push_back(e.path());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            require_file("input", in);
            out.emplace_back(in);
        }
    }
    return out;
}

inline int filter(const FilterArgs& a, std::ostream& log) {
    if (a.out.empty()) throw InputMissing("--out is required");
    if (a.threshold.has_value() == !a.calibration.empty())
        throw ConfigError("give exactly one of --threshold or --calibration");
    if (a.watch.empty() && a.inputs.empty()) throw InputMissing("no inputs (give files/directories or --watch)");
    if (!a.watch.empty() && !fs::is_directory(a.watch)) throw InputMissing("--watch: not a directory: " + a.watch);

    FilterConfig cfg;
    if (a.threshold) {
        cfg.threshold = *a.threshold;
    } else {
        require_file("--calibration", a.calibration);
        cfg.threshold = calibration_from_json(read_json_file(a.calibration)).threshold;
    }
    if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) throw ConfigError("threshold must be in [0,1]");
    cfg.action = parse_filter_action(a.action);
    cfg.quarantine_dir = a.quarantine.empty() ? fs::path(a.out) / "quarantine" : fs::path(a.quarantine);
    const PreprocessSpec spec{a.backend.size, parse_pixel_scale(a.backend.scale), ResizeMethod::bilinear};
    validate(spec);

    WatchOptions wopts;
    if (!a.patterns.empty()) wopts.patterns = a.patterns;
    wopts.write_markers = a.markers;
    const auto inputs = a.watch.empty() ? expand_inputs(a.inputs, wopts.patterns) : std::vector<fs::path>{};

    auto backend = open_backend(a.backend);
    for (const auto& w : backend->metadata().warnings) log << "warning: " << w << "\n";

    const fs::path dir = a.out;
    fs::create_directories(dir);
    const fs::path log_path = dir / "decisions.jsonl";
    csv::write_text(log_path, "");
    auto append = [&](const std::vector<FilterDecision>& ds) {
        std::ofstream(log_path, std::ios::app) << decisions_to_jsonl(ds);
    };

    SavingsReport totals;
    try {
        if (a.watch.empty()) {
            FilterRun run = run_filter(inputs, cfg, spec, *backend);
            append(run.decisions);
            totals = run.report;
        } else {
            WatchSession session(cfg, spec, *backend, wopts);
            auto last_activity = std::chrono::steady_clock::now();
            std::uint64_t last_seen = 0;
            totals = run_watch(
                a.watch, session,
                [&](const WatchSession& s) {
                    if (a.max_files && s.totals().n_processed >= *a.max_files) return true;
                    if (s.totals().n_processed != last_seen) {
                        last_seen = s.totals().n_processed;
                        last_activity = std::chrono::steady_clock::now();
                    }
                    return a.idle_timeout_s &&
                           std::chrono::duration<double>(std::chrono::steady_clock::now() - last_activity).count() >=
                               *a.idle_timeout_s;
                },
                std::chrono::milliseconds(100), [&](const FilterRun& run) { append(run.decisions); });
        }
    } catch (const FilterAborted& e) {
        append(e.partial().decisions);
        write_json_file(dir / "savings.json", to_json(e.partial().report));
        throw;
    }
    write_json_file(dir / "savings.json", to_json(totals));
    log << "processed " << totals.n_processed << ", discarded " << totals.n_discarded << " ("
        << percent(totals.discard_fraction) << "), saved " << totals.bytes_saved << " bytes, errors " << totals.n_errors
        << "\n";
    return kOk;
}

// ---- plot ---------------------------------------------------------------

struct PlotArgs {
    std::vector<std::string> curves;
    std::vector<std::string> labels;
    std::vector<std::string> bench;
    std::string out;
};

inline int plot_cmd(const PlotArgs& a, std::ostream& log) {
    if (a.curves.empty()) throw InputMissing("at least one --curve is required");
    if (a.out.empty()) throw InputMissing("--out is required");
    if (!a.labels.empty() && a.labels.size() != a.curves.size())
        throw ConfigError("--label must be given once per --curve");
    if (!a.bench.empty() && a.bench.size() != a.curves.size())
        throw ConfigError("--bench must be given once per --curve (scatter mode)");

    std::vector<plot::NamedCurve> curves;
    for (std::size_t i = 0; i < a.curves.size(); ++i) {
        require_file("--curve", a.curves[i]);
        const std::string label = a.labels.empty() ? fs::path(a.curves[i]).stem().string() : a.labels[i];
        curves.push_back({label, curve_from_csv(csv::read_text(a.curves[i]), a.curves[i])});
    }
    std::string svg;
    if (a.bench.empty()) {
        svg = plot::pr_curves_svg(curves);
    } else {
        std::vector<plot::ScatterPoint> points;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            require_file("--bench", a.bench[i]);
            const BenchReport r = bench_report_from_json(read_json_file(a.bench[i]));
            points.push_back({curves[i].label, r.stats.mean_ms, pr_auc(curves[i].curve)});
        }
        svg = plot::latency_auc_svg(points);
    }
    csv::write_text(a.out, svg);
    for (const auto& c : curves) log << c.label << ": PR-AUC " << csv::format_real(pr_auc(c.curve)) << "\n";
    return kOk;
}

// ---- entry point --------------------------------------------------------

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const BackendError*>(&e) || dynamic_cast<const UnsupportedError*>(&e)) return kBackend;
    if (dynamic_cast<const ConfigError*>(&e)) return kUsage;
    if (dynamic_cast<const Error*>(&e)) return kData;
    return kData;
}

inline int run(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"trapsift: empty camera-trap image filtering toolkit"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* c_ingest = app.add_subcommand("ingest", "Label a camera-trap manifest as empty/nonempty");
    c_ingest->add_option("--manifest", ingest_args.manifest, "COCO Camera Traps JSON")->required();
    c_ingest->add_option("--out", ingest_args.out, "Labeled CSV to write")->required();
    c_ingest->add_option("--summary", ingest_args.summary, "Summary JSON (default: <out>.summary.json)");
    c_ingest->add_option("--season-map", ingest_args.season_map, "CSV image_id,season for images without a season");
    c_ingest->add_option("--empty-category", ingest_args.empty_categories, "Category treated as empty (repeatable)");
    c_ingest->add_flag("--require-bbox", ingest_args.require_bbox, "Exclude nonempty images without boxes");

    SplitArgs split_args;
    auto* c_split = app.add_subcommand("split", "Partition a labeled set");
    c_split->add_option("--labels", split_args.labels)->required();
    c_split->add_option("--split", split_args.policy, "location or time")->check(CLI::IsMember({"location", "time"}));
    c_split->add_option("--assignment", split_args.assignment, "CSV key,partition")->required();
    c_split->add_option("--manifest", split_args.manifest, "Needed with --bbox-only");
    c_split->add_option("--seed", split_args.seed);
    c_split->add_option("--holdout", split_args.holdout, "Move K random train locations to val_dev");
    c_split->add_option("--cap", split_args.cap, "Empty images kept per location in train/val_dev")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    c_split->add_flag("--no-cap", split_args.no_cap);
    c_split->add_flag("--balance", split_args.balance, "Balance classes in train");
    c_split->add_flag("--bbox-only", split_args.bbox_only, "Keep only box-annotated nonempty images");
    c_split->add_option("--out", split_args.out, "Output directory")->required();

    EvalArgs calib_args;
    auto* c_calib = app.add_subcommand("calibrate", "Threshold reaching the target nonempty recall");
    c_calib->add_option("--scores", calib_args.scores)->required();
    c_calib->add_option("--labels", calib_args.labels)->required();
    c_calib->add_option("--target-recall", calib_args.target_recall)->capture_default_str();
    c_calib->add_option("--out", calib_args.out)->required();

    EvalArgs eval_args;
    auto* c_eval = app.add_subcommand("eval", "PR curve, PR-AUC and calibrated operating point");
    c_eval->add_option("--scores", eval_args.scores)->required();
    c_eval->add_option("--labels", eval_args.labels)->required();
    c_eval->add_option("--target-recall", eval_args.target_recall)->capture_default_str();
    c_eval->add_option("--out", eval_args.out, "Output directory")->required();

    CompareArgs cmp_args;
    auto* c_cmp = app.add_subcommand("compare", "Compare two runs at their own calibrated thresholds");
    c_cmp->add_option("--scores", cmp_args.scores, "Baseline then candidate score file")->required();
    c_cmp->add_option("--labels", cmp_args.labels)->required();
    c_cmp->add_option("--target-recall", cmp_args.target_recall)->capture_default_str();
    c_cmp->add_option("--margin", cmp_args.margin, "TNR drop that counts as degraded")->capture_default_str();
    c_cmp->add_option("--out", cmp_args.out)->required();

    auto add_backend = [](CLI::App* c, BackendArgs& b) {
        c->add_option("--backend", b.backend, "replay or opencv-dnn (default: $TRAPSIFT_BACKEND or replay)");
        c->add_option("--model", b.model, "Model artifact (replay: score .jsonl or script .json)");
        c->add_option("--size", b.size, "Square input size")->capture_default_str();
        c->add_option("--scale", b.scale, "Pixel scale: symmetric or unit")
            ->capture_default_str()
            ->check(CLI::IsMember({"symmetric", "unit"}));
    };

    BenchArgs bench_args;
    auto* c_bench = app.add_subcommand("bench", "Measure inference latency and peak memory");
    add_backend(c_bench, bench_args.backend);
    c_bench->add_option("--input", bench_args.inputs, "Image(s) cycled across runs (default: synthetic)");
    c_bench->add_option("--runs", bench_args.runs)->capture_default_str();
    c_bench->add_option("--warmup", bench_args.warmup)->capture_default_str();
    bool no_memory = false;
    c_bench->add_flag("--no-memory", no_memory);
    c_bench->add_option("--out", bench_args.out)->required();

    FilterArgs filter_args;
    auto* c_filter = app.add_subcommand("filter", "Score images and discard the empty ones");
    add_backend(c_filter, filter_args.backend);
    c_filter->add_option("--threshold", filter_args.threshold);
    c_filter->add_option("--calibration", filter_args.calibration, "Calibration JSON from calibrate/eval");
    c_filter->add_option("--action", filter_args.action)
        ->capture_default_str()
        ->check(CLI::IsMember({"move", "delete", "mark"}));
    c_filter->add_option("--quarantine", filter_args.quarantine, "Destination for moved images (default: <out>/quarantine)");
    c_filter->add_option("--watch", filter_args.watch, "Directory to watch for new images");
    c_filter->add_option("--pattern", filter_args.patterns, "Glob for image files (repeatable)");
    c_filter->add_flag("--markers", filter_args.markers, "Write <file>.trapsift markers for processed files");
    c_filter->add_option("--max-files", filter_args.max_files, "Stop watching after N files");
    c_filter->add_option("--idle-timeout", filter_args.idle_timeout_s, "Stop watching after N idle seconds");
    c_filter->add_option("--out", filter_args.out, "Output directory")->required();
    c_filter->add_option("inputs", filter_args.inputs, "Image files or directories");

    SimulateArgs sim_args;
    auto* c_sim = app.add_subcommand("simulate", "Project storage savings on a labeled set");
    c_sim->add_option("--scores", sim_args.scores)->required();
    c_sim->add_option("--labels", sim_args.labels)->required();
    c_sim->add_option("--threshold", sim_args.threshold, "Default: calibrate at --target-recall");
    c_sim->add_option("--target-recall", sim_args.target_recall)->capture_default_str();
    c_sim->add_option("--sizes", sim_args.sizes, "CSV image_id,bytes");
    c_sim->add_option("--out", sim_args.out)->required();

    PlotArgs plot_args;
    auto* c_plot = app.add_subcommand("plot", "SVG precision-recall (or latency vs PR-AUC) figure");
    c_plot->add_option("--curve", plot_args.curves, "Curve CSV from eval (repeatable)")->required();
    c_plot->add_option("--label", plot_args.labels, "Legend label per curve");
    c_plot->add_option("--bench", plot_args.bench, "Bench JSON per curve: latency vs PR-AUC scatter");
    c_plot->add_option("--out", plot_args.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        log << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kUsage;
    }

    try {
        if (c_ingest->parsed()) return ingest(ingest_args, log);
        if (c_split->parsed()) return split(split_args, log);
        if (c_calib->parsed()) return calibrate(calib_args, log);
        if (c_eval->parsed()) return eval(eval_args, log);
        if (c_cmp->parsed()) return compare(cmp_args, log);
        if (c_bench->parsed()) {
            bench_args.memory = !no_memory;
            return bench(bench_args, log);
        }
        if (c_filter->parsed()) return filter(filter_args, log);
        if (c_sim->parsed()) return simulate(sim_args, log);
        if (c_plot->parsed()) return plot_cmd(plot_args, log);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kUsage;
}

} // namespace trapsift::cli
