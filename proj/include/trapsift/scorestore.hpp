#pragma once

// Model predictions: detector-output reduction, the JSON Lines score file,
// and the join of predictions with ground-truth labels.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "trapsift/csv.hpp"
#include "trapsift/error.hpp"
#include "trapsift/json_io.hpp"
#include "trapsift/manifest.hpp"

namespace trapsift {

enum class ScoreSource { classifier, detector };
enum class PrecisionMode { float32, int8, int8_qat };

inline const char* to_string(ScoreSource s) { return s == ScoreSource::classifier ? "classifier" : "detector"; }
inline const char* to_string(PrecisionMode p) {
    switch (p) {
    case PrecisionMode::float32: return "float";
    case PrecisionMode::int8: return "int8";
    case PrecisionMode::int8_qat: return "int8_qat";
    }
    return "?";
}

inline ScoreSource parse_score_source(const std::string& s) {
    if (s == "classifier") return ScoreSource::classifier;
    if (s == "detector") return ScoreSource::detector;
    throw ValidationError("unknown score source '" + s + "'");
}

inline PrecisionMode parse_precision_mode(const std::string& s) {
    if (s == "float") return PrecisionMode::float32;
    if (s == "int8") return PrecisionMode::int8;
    if (s == "int8_qat") return PrecisionMode::int8_qat;
    throw ValidationError("unknown precision mode '" + s + "'");
}

struct Detection {
    std::string class_id;
    double confidence = 0;
    std::optional<std::array<double, 4>> box; // x, y, w, h

    bool operator==(const Detection&) const = default;
};

struct ScoreRecord {
    std::string image_id;
    double nonempty_score = 0;
    ScoreSource source = ScoreSource::classifier;
    std::optional<std::vector<Detection>> detections;

    bool operator==(const ScoreRecord&) const = default;
};

struct RunManifest {
    std::string run_id;
    std::string model_name;
    PrecisionMode precision_mode = PrecisionMode::float32;
    int input_resolution = 224;
    std::optional<double> width_multiplier;
    std::string dataset_split;
    std::string backend_id;
    /// Detector classes excluded from the nonempty reduction (e.g. an explicit background class).
    std::vector<std::string> background_classes;

    bool operator==(const RunManifest&) const = default;
};

struct ScoreFile {
    RunManifest run;
    std::vector<ScoreRecord> records;

    bool operator==(const ScoreFile&) const = default;
};

struct EvalItem {
    std::string image_id;
    Label label = Label::empty;
    double score = 0;

    bool operator==(const EvalItem&) const = default;
};

struct EvalSet {
    std::vector<EvalItem> items;

    std::size_t size() const noexcept { return items.size(); }
};

inline bool in_unit_interval(double v) noexcept { return v >= 0.0 && v <= 1.0; }

/// Maximum confidence over all detections not in `background`; 0 when nothing remains.
inline double reduce_detections(std::span<const Detection> detections, const std::set<std::string>& background = {}) {
    double best = 0.0;
    for (const auto& d : detections) {
        if (!in_unit_interval(d.confidence))
            throw ValidationError("detection confidence " + csv::format_real(d.confidence) + " outside [0,1]");
        if (background.count(d.class_id)) continue;
        best = std::max(best, d.confidence);
    }
    return best;
}

inline void validate(const EvalSet& e) {
    std::unordered_set<std::string> seen;
    for (const auto& it : e.items) {
        if (!in_unit_interval(it.score))
            throw ValidationError("score for '" + it.image_id + "' outside [0,1]: " + csv::format_real(it.score));
        if (!seen.insert(it.image_id).second) throw IntegrityError("duplicate image id '" + it.image_id + "'");
    }
}

// ---- JSON mapping -------------------------------------------------------

inline Json to_json(const RunManifest& m) {
    Json j;
    j["run_id"] = m.run_id;
    j["model_name"] = m.model_name;
    j["precision_mode"] = to_string(m.precision_mode);
    j["input_resolution"] = m.input_resolution;
    if (m.width_multiplier) j["width_multiplier"] = *m.width_multiplier;
    j["dataset_split"] = m.dataset_split;
    j["backend_id"] = m.backend_id;
    if (!m.background_classes.empty()) j["background_classes"] = m.background_classes;
    return j;
}

inline RunManifest run_manifest_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("run manifest must be an object");
    RunManifest m;
    try {
        m.run_id = j.at("run_id").get<std::string>();
        m.model_name = j.value("model_name", std::string{});
        m.precision_mode = parse_precision_mode(j.value("precision_mode", std::string{"float"}));
        m.input_resolution = j.value("input_resolution", 224);
        if (auto it = j.find("width_multiplier"); it != j.end() && !it->is_null())
            m.width_multiplier = it->get<double>();
        m.dataset_split = j.value("dataset_split", std::string{});
        m.backend_id = j.value("backend_id", std::string{});
        if (auto it = j.find("background_classes"); it != j.end() && !it->is_null())
            m.background_classes = it->get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("run manifest: ") + e.what());
    }
    if (m.input_resolution <= 0) throw ValidationError("run manifest: input_resolution must be positive");
    return m;
}

inline Json to_json(const Detection& d) {
    Json j{{"class_id", d.class_id}, {"confidence", d.confidence}};
    if (d.box) j["box"] = *d.box;
    return j;
}

inline Json to_json(const ScoreRecord& r) {
    Json j{{"image_id", r.image_id}, {"nonempty_score", r.nonempty_score}, {"source", to_string(r.source)}};
    if (r.detections) {
        Json arr = Json::array();
        for (const auto& d : *r.detections) arr.push_back(to_json(d));
        j["detections"] = std::move(arr);
    }
    return j;
}

inline ScoreRecord score_record_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("score record must be an object");
    ScoreRecord r;
    try {
        r.image_id = j.at("image_id").get<std::string>();
        r.nonempty_score = j.at("nonempty_score").get<double>();
        r.source = parse_score_source(j.at("source").get<std::string>());
        if (auto it = j.find("detections"); it != j.end() && !it->is_null()) {
            std::vector<Detection> ds;
            for (const auto& dj : *it) {
                Detection d{dj.at("class_id").get<std::string>(), dj.at("confidence").get<double>(), std::nullopt};
                if (auto b = dj.find("box"); b != dj.end() && !b->is_null()) d.box = b->get<std::array<double, 4>>();
                ds.push_back(std::move(d));
            }
            r.detections = std::move(ds);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("score record: ") + e.what());
    }
    return r;
}

/// Record invariants: score in [0,1]; a detector record with detections scores their reduction.
inline void validate(const ScoreRecord& r, const RunManifest& run) {
    if (!in_unit_interval(r.nonempty_score))
        throw ValidationError("record '" + r.image_id + "': nonempty_score outside [0,1]");
    if (r.source == ScoreSource::detector && r.detections) {
        const std::set<std::string> background(run.background_classes.begin(), run.background_classes.end());
        double expected = 0;
        try {
            expected = reduce_detections(*r.detections, background);
        } catch (const ValidationError& e) {
            throw ValidationError("record '" + r.image_id + "': " + e.what());
        }
        if (expected != r.nonempty_score)
            throw ValidationError("record '" + r.image_id + "': nonempty_score " + csv::format_real(r.nonempty_score) +
                                  " differs from max detection confidence " + csv::format_real(expected));
    }
}

/// First line: the run manifest. Then one record per line.
inline std::string serialize_scores(const ScoreFile& f) {
    std::string out = to_json(f.run).dump() + "\n";
    for (const auto& r : f.records) out += to_json(r).dump() + "\n";
    return out;
}

inline ScoreFile parse_scores(const std::string& text, const std::string& origin = "scores") {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    ScoreFile f;
    bool have_manifest = false;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const Json j = parse_json(line, origin, line_no - 1);
        if (!have_manifest) {
            f.run = run_manifest_from_json(j);
            have_manifest = true;
            continue;
        }
        ScoreRecord r = score_record_from_json(j);
        validate(r, f.run);
        if (!seen.insert(r.image_id).second)
            throw IntegrityError(origin + ": duplicate image id '" + r.image_id + "' on line " + std::to_string(line_no));
        f.records.push_back(std::move(r));
    }
    if (!have_manifest) throw ParseError(origin + ": missing run manifest line", 1, 1);
    return f;
}

inline ScoreFile read_scores(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("score file not found: " + path.string());
    return parse_scores(csv::read_text(path), path.string());
}

inline void write_scores(const std::filesystem::path& path, const ScoreFile& f) {
    std::unordered_set<std::string> seen;
    for (const auto& r : f.records) {
        validate(r, f.run);
        if (!seen.insert(r.image_id).second) throw IntegrityError("duplicate image id '" + r.image_id + "'");
    }
    csv::write_text(path, serialize_scores(f));
}

inline std::string scores_to_csv(const std::vector<ScoreRecord>& records) {
    std::string out = csv::format_row({"image_id", "nonempty_score"});
    for (const auto& r : records) out += csv::format_row({r.image_id, csv::format_real(r.nonempty_score)});
    return out;
}

struct JoinResult {
    EvalSet set;
    std::size_t unmatched_scores = 0;
    std::size_t unmatched_labels = 0;
};

/// Inner join on image_id, sorted by image_id. No overlap at all is an integrity error.
inline JoinResult join(const std::vector<ScoreRecord>& scores, const LabeledSet& labels) {
    std::unordered_map<std::string, const ScoreRecord*> by_id;
    for (const auto& r : scores)
        if (!by_id.emplace(r.image_id, &r).second) throw IntegrityError("duplicate score for '" + r.image_id + "'");

    JoinResult out;
    std::unordered_set<std::string> label_ids;
    for (const auto& it : labels.items) {
        if (!label_ids.insert(it.image_id).second) throw IntegrityError("duplicate label for '" + it.image_id + "'");
        auto s = by_id.find(it.image_id);
        if (s == by_id.end()) {
            ++out.unmatched_labels;
            continue;
        }
        out.set.items.push_back({it.image_id, it.label, s->second->nonempty_score});
    }
    out.unmatched_scores = scores.size() - out.set.items.size();
    if (out.set.items.empty())
        throw IntegrityError("scores and labels share no image ids (" + std::to_string(scores.size()) + " scores, " +
                             std::to_string(labels.size()) + " labels)");
    std::sort(out.set.items.begin(), out.set.items.end(),
              [](const EvalItem& a, const EvalItem& b) { return a.image_id < b.image_id; });
    validate(out.set);
    return out;
}

} // namespace trapsift
