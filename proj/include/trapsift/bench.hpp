#pragma once

// Latency and memory measurement of an inference backend: unmeasured warmup
// calls, a fixed number of timed calls around infer() only, and summary
// statistics over the timed calls.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "trapsift/backend.hpp"
#include "trapsift/error.hpp"
#include "trapsift/json_io.hpp"

namespace trapsift {

inline constexpr std::size_t kDefaultWarmupRuns = 5;
inline constexpr std::size_t kDefaultMeasuredRuns = 50;

struct BenchConfig {
    std::size_t warmup_runs = kDefaultWarmupRuns;
    std::size_t measured_runs = kDefaultMeasuredRuns;
    /// Inputs cycled across calls. A single entry reuses one fixed input.
    std::vector<InferenceInput> inputs;
};

struct LatencyStats {
    double mean_ms = 0;
    double std_ms = 0;
    double min_ms = 0;
    double max_ms = 0;
    double p50_ms = 0;
    double p95_ms = 0;

    bool operator==(const LatencyStats&) const = default;
};

struct BenchReport {
    LatencyStats stats;
    std::vector<double> runs_ms;
    std::optional<std::uint64_t> peak_memory_bytes;
    std::size_t warmup_runs = 0;
    std::size_t measured_runs = 0;
    BackendMetadata backend;
};

/// Linear interpolation between closest ranks over sorted samples.
inline double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0;
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = static_cast<std::size_t>(std::ceil(rank));
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - static_cast<double>(lo));
}

/// Population standard deviation; mean clamped into [min, max] against rounding.
inline LatencyStats summarize_latencies(const std::vector<double>& runs_ms) {
    LatencyStats s;
    if (runs_ms.empty()) return s;
    std::vector<double> sorted = runs_ms;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    s.min_ms = sorted.front();
    s.max_ms = sorted.back();
    s.mean_ms = std::clamp(std::accumulate(runs_ms.begin(), runs_ms.end(), 0.0) / n, s.min_ms, s.max_ms);
    double sq = 0;
    for (double v : runs_ms) sq += (v - s.mean_ms) * (v - s.mean_ms);
    s.std_ms = std::sqrt(sq / n);
    s.p50_ms = percentile(sorted, 0.50);
    s.p95_ms = percentile(sorted, 0.95);
    return s;
}

struct SteadyClock {
    std::chrono::steady_clock::time_point now() const { return std::chrono::steady_clock::now(); }
};

/// Clock advanced explicitly, for exact latency tests.
class ManualClock {
public:
    std::chrono::steady_clock::time_point now() const { return std::chrono::steady_clock::time_point(elapsed_); }
    void advance(std::chrono::nanoseconds d) { elapsed_ += d; }

private:
    std::chrono::nanoseconds elapsed_{0};
};

/// Thrown when the backend fails mid-run; carries the statistics of the calls that completed.
class BenchFailure : public BackendError {
public:
    BenchFailure(const std::string& what, BenchReport partial) : BackendError(what), partial_(std::move(partial)) {}
    const BenchReport& partial() const noexcept { return partial_; }

private:
    BenchReport partial_;
};

template <typename Clock = SteadyClock>
BenchReport run_bench(InferenceBackend& backend, const BenchConfig& config, const Clock& clock = Clock{}) {
    if (config.measured_runs < 1) throw ConfigError("measured_runs must be at least 1");
    if (!backend.loaded()) throw BackendError("backend not loaded");

    BenchReport report;
    report.warmup_runs = config.warmup_runs;
    report.measured_runs = config.measured_runs;
    report.backend = backend.metadata();

    std::vector<InferenceInput> synthetic;
    const std::vector<InferenceInput>* inputs = &config.inputs;
    if (inputs->empty()) {
        synthetic.push_back({"synthetic", constant_tensor(report.backend.input_resolution.value_or(224), 0.0f)});
        inputs = &synthetic;
    }
    auto input_for = [&](std::size_t call) -> const InferenceInput& { return (*inputs)[call % inputs->size()]; };

    std::size_t call = 0;
    auto fail = [&](const std::exception& e, bool warmup) {
        report.stats = summarize_latencies(report.runs_ms);
        report.measured_runs = report.runs_ms.size();
        throw BenchFailure(std::string(warmup ? "backend failed during warmup: " : "backend failed during run ") +
                               (warmup ? "" : std::to_string(report.runs_ms.size()) + ": ") + e.what(),
                           report);
    };
    for (std::size_t i = 0; i < config.warmup_runs; ++i, ++call) {
        try {
            (void)backend.infer(input_for(call));
        } catch (const std::exception& e) {
            fail(e, true);
        }
    }
    report.runs_ms.reserve(config.measured_runs);
    for (std::size_t i = 0; i < config.measured_runs; ++i, ++call) {
        const auto& input = input_for(call);
        try {
            const auto t0 = clock.now();
            (void)backend.infer(input);
            const auto t1 = clock.now();
            report.runs_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        } catch (const std::exception& e) {
            fail(e, false);
        }
    }
    report.stats = summarize_latencies(report.runs_ms);
    return report;
}

// ---- memory -------------------------------------------------------------

struct MemoryProbe {
    std::uint64_t peak_bytes = 0;
    std::uint64_t baseline_bytes = 0;
    /// False when the kernel refused to reset the high-water mark, in which case the peak
    /// covers the whole process lifetime.
    bool window_reset = false;
};

namespace detail {

/// Reads a "<key>: <n> kB" line from /proc/self/status.
inline std::optional<std::uint64_t> proc_status_kb(const std::string& key) {
    std::ifstream in("/proc/self/status");
    if (!in) return std::nullopt;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + ":", 0) != 0) continue;
        return std::strtoull(line.c_str() + key.size() + 1, nullptr, 10);
    }
    return std::nullopt;
}

inline bool reset_peak_rss() {
    std::ofstream out("/proc/self/clear_refs");
    if (!out) return false;
    out << "5";
    out.flush();
    return static_cast<bool>(out);
}

} // namespace detail

/// Peak resident set size of this process across one load + infer cycle.
inline MemoryProbe measure_memory(InferenceBackend& backend, const std::filesystem::path& artifact,
                                  const InferenceInput& input) {
    const auto baseline = detail::proc_status_kb("VmRSS");
    if (!baseline) throw UnsupportedError("memory introspection unavailable (no /proc/self/status)");
    MemoryProbe probe;
    probe.baseline_bytes = *baseline * 1024;
    probe.window_reset = detail::reset_peak_rss();
    backend.load(artifact);
    (void)backend.infer(input);
    const auto peak = detail::proc_status_kb("VmHWM");
    if (!peak) throw UnsupportedError("memory introspection unavailable (no VmHWM)");
    probe.peak_bytes = *peak * 1024;
    return probe;
}

// ---- serialization ------------------------------------------------------

inline Json to_json(const BackendMetadata& m) {
    Json j{{"backend_id", m.backend_id}, {"model_name", m.model_name}, {"precision_mode", to_string(m.precision_mode)}};
    j["input_resolution"] = m.input_resolution ? Json(*m.input_resolution) : Json(nullptr);
    if (!m.warnings.empty()) j["warnings"] = m.warnings;
    return j;
}

inline Json to_json(const BenchReport& r) {
    Json j;
    j["mean_ms"] = r.stats.mean_ms;
    j["std_ms"] = r.stats.std_ms;
    j["min_ms"] = r.stats.min_ms;
    j["max_ms"] = r.stats.max_ms;
    j["p50_ms"] = r.stats.p50_ms;
    j["p95_ms"] = r.stats.p95_ms;
    if (r.peak_memory_bytes) j["peak_memory_bytes"] = *r.peak_memory_bytes;
    j["runs"] = r.runs_ms;
    j["config"] = {{"warmup_runs", r.warmup_runs}, {"measured_runs", r.measured_runs}};
    j["backend"] = to_json(r.backend);
    return j;
}

inline BenchReport bench_report_from_json(const Json& j) {
    try {
        BenchReport r;
        r.stats = {j.at("mean_ms").get<double>(), j.at("std_ms").get<double>(), j.at("min_ms").get<double>(),
                   j.at("max_ms").get<double>(),  j.at("p50_ms").get<double>(), j.at("p95_ms").get<double>()};
        if (auto it = j.find("peak_memory_bytes"); it != j.end()) r.peak_memory_bytes = it->get<std::uint64_t>();
        r.runs_ms = j.at("runs").get<std::vector<double>>();
        r.warmup_runs = j.at("config").at("warmup_runs").get<std::size_t>();
        r.measured_runs = j.at("config").at("measured_runs").get<std::size_t>();
        if (auto b = j.find("backend"); b != j.end()) {
            r.backend.backend_id = b->value("backend_id", std::string{});
            r.backend.model_name = b->value("model_name", std::string{});
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bench report: ") + e.what());
    }
}

} // namespace trapsift
