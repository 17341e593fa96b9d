#pragma once

// Inference runtime abstraction plus the deterministic replay backend used for
// tests, benchmarks of the harness itself, and offline replays of score files.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "trapsift/error.hpp"
#include "trapsift/json_io.hpp"
#include "trapsift/scorestore.hpp"

namespace trapsift {

/// Interleaved height x width x channels, RGB order.
struct Tensor {
    int height = 0;
    int width = 0;
    int channels = 3;
    std::vector<float> data;

    std::size_t size() const noexcept { return data.size(); }
    float at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

inline Tensor constant_tensor(int size, float value) {
    return Tensor{size, size, 3, std::vector<float>(static_cast<std::size_t>(size) * size * 3, value)};
}

struct InferenceInput {
    /// Identity of the source image (file stem in the filter pipeline). Only replay uses it.
    std::string image_id;
    Tensor tensor;
};

struct InferenceOutput {
    ScoreSource source = ScoreSource::classifier;
    /// Classifier: probability of the nonempty class.
    double nonempty_probability = 0;
    /// Detector: raw detections.
    std::vector<Detection> detections;
};

struct BackendMetadata {
    std::string backend_id;
    std::string model_name;
    PrecisionMode precision_mode = PrecisionMode::float32;
    std::optional<int> input_resolution;
    std::vector<std::string> background_classes;
    /// Free-form notes surfaced to the operator (e.g. activations known to quantize poorly).
    std::vector<std::string> warnings;
};

/// Single nonempty confidence from a backend output.
inline double nonempty_score(const InferenceOutput& out, const BackendMetadata& meta) {
    if (out.source == ScoreSource::classifier) {
        if (!in_unit_interval(out.nonempty_probability))
            throw BackendError("classifier probability outside [0,1]");
        return out.nonempty_probability;
    }
    const std::set<std::string> background(meta.background_classes.begin(), meta.background_classes.end());
    try {
        return reduce_detections(out.detections, background);
    } catch (const ValidationError& e) {
        throw BackendError(e.what());
    }
}

class InferenceBackend {
public:
    virtual ~InferenceBackend() = default;

    virtual void load(const std::filesystem::path& artifact) = 0;
    virtual bool loaded() const = 0;
    virtual InferenceOutput infer(const InferenceInput& input) = 0;
    virtual BackendMetadata metadata() const = 0;
};

/// What the replay backend answers, how long each call takes, and which faults to inject.
struct ReplayScript {
    std::unordered_map<std::string, ScoreRecord> records;
    /// Score for image ids absent from `records`; without it such ids are a backend error.
    std::optional<double> default_score;
    /// Per-call latency, cycled. Empty means no delay.
    std::vector<std::chrono::nanoseconds> latencies;
    /// Multiplier on the first call's latency (cold-start spike).
    double first_call_factor = 1.0;
    /// Touched allocation held while loaded, for memory-probe tests.
    std::size_t allocate_bytes = 0;
    /// 0-based call index that throws BackendError.
    std::optional<std::size_t> fail_on_call;
    RunManifest run;
};

inline ReplayScript replay_script_from_scores(const ScoreFile& f) {
    ReplayScript s;
    s.run = f.run;
    for (const auto& r : f.records) s.records.emplace(r.image_id, r);
    return s;
}

/// Deterministic backend. Each call reports its scripted latency to `latency_sink`, which by
/// default sleeps; tests pass a sink that advances a manual clock instead.
class ReplayBackend final : public InferenceBackend {
public:
    using LatencySink = std::function<void(std::chrono::nanoseconds)>;

    ReplayBackend() : sink_(sleep_sink()) {}
    explicit ReplayBackend(ReplayScript script, LatencySink sink = sleep_sink())
        : script_(std::move(script)), sink_(std::move(sink)) {
        activate();
    }

    static LatencySink sleep_sink() {
        return [](std::chrono::nanoseconds d) {
            if (d.count() > 0) std::this_thread::sleep_for(d);
        };
    }

    /// `.jsonl`: a score file to replay. `.json`: a script object with optional keys
    /// scores (file path or {image_id: score}), default_score, latencies_ms, first_call_factor,
    /// allocate_bytes, fail_on_call.
    void load(const std::filesystem::path& artifact) override {
        ballast_.clear();
        ballast_.shrink_to_fit();
        if (artifact.empty()) {
            activate();
            return;
        }
        if (!std::filesystem::exists(artifact)) throw BackendError("replay artifact not found: " + artifact.string());
        try {
            if (artifact.extension() == ".jsonl") {
                script_ = replay_script_from_scores(read_scores(artifact));
            } else {
                script_ = script_from_json(read_json_file(artifact), artifact.parent_path());
            }
        } catch (const BackendError&) {
            throw;
        } catch (const Error& e) {
            throw BackendError(std::string("replay artifact: ") + e.what());
        }
        activate();
    }

    bool loaded() const override { return loaded_; }

    InferenceOutput infer(const InferenceInput& input) override {
        if (!loaded_) throw BackendError("replay backend not loaded");
        const std::size_t call = calls_++;
        if (script_.fail_on_call && *script_.fail_on_call == call)
            throw BackendError("injected failure on call " + std::to_string(call));
        if (!script_.latencies.empty()) {
            auto d = script_.latencies[call % script_.latencies.size()];
            if (call == 0 && script_.first_call_factor != 1.0)
                d = std::chrono::nanoseconds(static_cast<std::int64_t>(d.count() * script_.first_call_factor));
            sink_(d);
        }
        InferenceOutput out;
        auto it = script_.records.find(input.image_id);
        if (it == script_.records.end()) {
            if (!script_.default_score) throw BackendError("no replay score for '" + input.image_id + "'");
            out.nonempty_probability = *script_.default_score;
            return out;
        }
        const ScoreRecord& r = it->second;
        if (r.source == ScoreSource::detector && r.detections) {
            out.source = ScoreSource::detector;
            out.detections = *r.detections;
        } else {
            out.nonempty_probability = r.nonempty_score;
        }
        return out;
    }

    BackendMetadata metadata() const override {
        BackendMetadata m;
        m.backend_id = "replay";
        m.model_name = script_.run.model_name.empty() ? "replay" : script_.run.model_name;
        m.precision_mode = script_.run.precision_mode;
        if (!script_.run.run_id.empty()) m.input_resolution = script_.run.input_resolution;
        m.background_classes = script_.run.background_classes;
        return m;
    }

    std::size_t calls() const noexcept { return calls_; }
    const ReplayScript& script() const noexcept { return script_; }

private:
    void activate() {
        calls_ = 0;
        if (script_.allocate_bytes > 0) ballast_.assign(script_.allocate_bytes, 1);
        loaded_ = true;
    }

    static ReplayScript script_from_json(const Json& j, const std::filesystem::path& base) {
        if (!j.is_object()) throw BackendError("replay script must be a JSON object");
        ReplayScript s;
        try {
            if (auto it = j.find("scores"); it != j.end()) {
                if (it->is_string()) {
                    std::filesystem::path p = it->get<std::string>();
                    if (p.is_relative()) p = base / p;
                    s = replay_script_from_scores(read_scores(p));
                } else {
                    for (const auto& [id, v] : it->items())
                        s.records[id] = ScoreRecord{id, v.get<double>(), ScoreSource::classifier, std::nullopt};
                }
            }
            if (auto it = j.find("default_score"); it != j.end()) s.default_score = it->get<double>();
            if (auto it = j.find("latencies_ms"); it != j.end())
                for (double ms : it->get<std::vector<double>>())
                    s.latencies.emplace_back(static_cast<std::int64_t>(ms * 1e6));
            s.first_call_factor = j.value("first_call_factor", 1.0);
            s.allocate_bytes = j.value("allocate_bytes", std::size_t{0});
            if (auto it = j.find("fail_on_call"); it != j.end()) s.fail_on_call = it->get<std::size_t>();
            if (auto it = j.find("run"); it != j.end()) s.run = run_manifest_from_json(*it);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("replay script: ") + e.what());
        }
        return s;
    }

    ReplayScript script_;
    LatencySink sink_;
    std::vector<unsigned char> ballast_;
    std::size_t calls_ = 0;
    bool loaded_ = false;
};

inline constexpr const char* kBackendEnvVar = "TRAPSIFT_BACKEND";

/// Backend named by TRAPSIFT_BACKEND, else "replay".
inline std::string default_backend_name() {
    const char* env = std::getenv(kBackendEnvVar);
    return env && *env ? env : "replay";
}

} // namespace trapsift
