#pragma once

// Deployable empty-image filter and its offline simulator.
//
// Pipeline stages: decode + preprocess run on worker threads, inference is
// serialized on the calling thread (one backend instance), and decisions plus
// file actions are applied there as well. At most `max_in_flight` decoded
// images are buffered at any time. Any failure before a discard decision keeps
// the file untouched.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include "trapsift/backend.hpp"
#include "trapsift/error.hpp"
#include "trapsift/json_io.hpp"
#include "trapsift/metrics.hpp"
#include "trapsift/preprocess.hpp"

namespace trapsift {

enum class FilterAction { move_to_dir, delete_file, mark_only };
enum class Decision { keep, discard };

inline const char* to_string(FilterAction a) {
    switch (a) {
    case FilterAction::move_to_dir: return "move";
    case FilterAction::delete_file: return "delete";
    case FilterAction::mark_only: return "mark";
    }
    return "?";
}

inline FilterAction parse_filter_action(const std::string& s) {
    if (s == "move") return FilterAction::move_to_dir;
    if (s == "delete") return FilterAction::delete_file;
    if (s == "mark") return FilterAction::mark_only;
    throw ConfigError("unknown action '" + s + "' (expected move, delete or mark)");
}

inline const char* to_string(Decision d) { return d == Decision::keep ? "keep" : "discard"; }

inline Decision decide(double score, double threshold) noexcept {
    return predicts_nonempty(score, threshold) ? Decision::keep : Decision::discard;
}

inline constexpr std::size_t kDefaultMaxInFlight = 8;

struct FilterConfig {
    double threshold = 0.5;
    FilterAction action = FilterAction::move_to_dir;
    std::filesystem::path quarantine_dir = "quarantine";
    std::size_t max_in_flight = kDefaultMaxInFlight;
    /// Decode workers; 0 picks min(4, hardware threads).
    std::size_t decode_threads = 0;
    /// Time source for per-image latency; steady_clock when empty. A fixed clock makes decision
    /// logs reproducible byte for byte.
    std::function<std::chrono::steady_clock::time_point()> clock;
};

struct FilterDecision {
    std::string image_id;
    std::filesystem::path path;
    /// Absent when the image could not be scored (it is then kept).
    std::optional<double> nonempty_score;
    Decision decision = Decision::keep;
    double latency_ms = 0;
    std::optional<std::string> error;
};

struct SavingsReport {
    std::uint64_t n_processed = 0;
    std::uint64_t n_discarded = 0;
    std::uint64_t bytes_saved = 0;
    double discard_fraction = 0;
    std::uint64_t n_errors = 0;

    bool operator==(const SavingsReport&) const = default;
};

struct FilterRun {
    std::vector<FilterDecision> decisions;
    SavingsReport report;
};

/// Backend failure aborted the run; `partial()` holds decisions made before the failure.
class FilterAborted : public BackendError {
public:
    FilterAborted(const std::string& what, FilterRun partial) : BackendError(what), partial_(std::move(partial)) {}
    const FilterRun& partial() const noexcept { return partial_; }

private:
    FilterRun partial_;
};

inline void finalize(SavingsReport& r) {
    r.discard_fraction = r.n_processed == 0 ? 0.0 : static_cast<double>(r.n_discarded) / static_cast<double>(r.n_processed);
}

namespace detail {

/// Moves `src` into `dir`, never overwriting: name collisions get a numeric suffix.
inline std::filesystem::path move_into(const std::filesystem::path& src, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    fs::path target = dir / src.filename();
    for (int i = 1; fs::exists(target); ++i)
        target = dir / (src.stem().string() + "-" + std::to_string(i) + src.extension().string());
    std::error_code ec;
    fs::rename(src, target, ec);
    if (ec) {
        // Cross-device: copy then remove the source only after the copy succeeded.
        fs::copy_file(src, target);
        fs::remove(src);
    }
    return target;
}

struct Decoded {
    std::size_t index;
    std::optional<Tensor> tensor;
    std::uint64_t bytes = 0;
    std::string error;
};

} // namespace detail

/// Scores every path once and applies `cfg.action` to discards. Decisions come back in input order.
inline FilterRun run_filter(const std::vector<std::filesystem::path>& inputs, const FilterConfig& cfg,
                            const PreprocessSpec& spec, InferenceBackend& backend) {
    if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) throw ConfigError("threshold must be in [0,1]");
    if (cfg.max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
    if (!backend.loaded()) throw BackendError("backend not loaded");
    const BackendMetadata meta = backend.metadata();
    validate(spec, meta);

    FilterRun run;
    if (inputs.empty()) return run;
    auto now = [&] { return cfg.clock ? cfg.clock() : std::chrono::steady_clock::now(); };

    const std::size_t n = inputs.size();
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_workers =
        std::min(n, cfg.decode_threads ? cfg.decode_threads : std::min<std::size_t>(4, hw));

    std::counting_semaphore<> slots(static_cast<std::ptrdiff_t>(cfg.max_in_flight));
    std::mutex mu;
    std::condition_variable ready;
    std::deque<detail::Decoded> queue;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};

    std::vector<std::jthread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                slots.acquire();
                const std::size_t i = next.fetch_add(1);
                if (i >= n || abort.load()) {
                    slots.release();
                    return;
                }
                detail::Decoded d{i, std::nullopt, 0, {}};
                try {
                    const auto bytes = read_bytes(inputs[i]);
                    d.bytes = bytes.size();
                    d.tensor = preprocess(bytes, spec);
                } catch (const std::exception& e) {
                    d.error = e.what();
                }
                {
                    std::lock_guard lock(mu);
                    queue.push_back(std::move(d));
                }
                ready.notify_one();
            }
        });
    }

    std::vector<std::optional<FilterDecision>> slots_out(n);
    std::map<std::size_t, std::uint64_t> discarded_bytes;
    std::optional<std::string> failure;

    for (std::size_t received = 0; received < n && !failure; ++received) {
        detail::Decoded d;
        {
            std::unique_lock lock(mu);
            ready.wait(lock, [&] { return !queue.empty(); });
            d = std::move(queue.front());
            queue.pop_front();
        }
        slots.release();

        FilterDecision fd;
        fd.path = inputs[d.index];
        fd.image_id = fd.path.stem().string();
        if (!d.tensor) {
            fd.decision = Decision::keep;
            fd.error = d.error;
            slots_out[d.index] = std::move(fd);
            continue;
        }
        double score = 0;
        try {
            const auto t0 = now();
            const InferenceOutput out = backend.infer({fd.image_id, std::move(*d.tensor)});
            const auto t1 = now();
            fd.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            score = nonempty_score(out, meta);
        } catch (const std::exception& e) {
            failure = "backend failed on " + fd.path.string() + ": " + e.what();
            break;
        }
        fd.nonempty_score = score;
        fd.decision = decide(score, cfg.threshold);
        if (fd.decision == Decision::discard) {
            try {
                switch (cfg.action) {
                case FilterAction::move_to_dir: detail::move_into(fd.path, cfg.quarantine_dir); break;
                case FilterAction::delete_file: std::filesystem::remove(fd.path); break;
                case FilterAction::mark_only: break;
                }
                discarded_bytes[d.index] = d.bytes;
            } catch (const std::exception& e) {
                fd.error = std::string("discard action failed, file kept: ") + e.what();
            }
        }
        slots_out[d.index] = std::move(fd);
    }

    if (failure) {
        abort.store(true);
        slots.release(static_cast<std::ptrdiff_t>(n_workers));
    }
    workers.clear(); // joins

    for (auto& slot : slots_out) {
        if (!slot) continue;
        auto& r = run.report;
        ++r.n_processed;
        if (slot->error) ++r.n_errors;
        if (slot->decision == Decision::discard) ++r.n_discarded;
        run.decisions.push_back(std::move(*slot));
    }
    for (const auto& [_, b] : discarded_bytes) run.report.bytes_saved += b;
    finalize(run.report);
    if (failure) throw FilterAborted(*failure, std::move(run));
    return run;
}

struct SimulationResult {
    OperatingPoint point;
    SavingsReport savings;
};

/// Offline projection of the filter on a labeled set: images scoring below `threshold` are discarded.
inline SimulationResult simulate_filter(const EvalSet& e, double threshold,
                                        const std::map<std::string, std::uint64_t>* byte_sizes = nullptr) {
    SimulationResult r;
    r.point = metrics_at(e, threshold);
    for (const auto& it : e.items) {
        ++r.savings.n_processed;
        if (decide(it.score, threshold) == Decision::discard) {
            ++r.savings.n_discarded;
            if (byte_sizes)
                if (auto s = byte_sizes->find(it.image_id); s != byte_sizes->end()) r.savings.bytes_saved += s->second;
        }
    }
    finalize(r.savings);
    return r;
}

inline Json to_json(const SavingsReport& r) {
    return {{"n_processed", r.n_processed},
            {"n_discarded", r.n_discarded},
            {"bytes_saved", r.bytes_saved},
            {"discard_fraction", r.discard_fraction},
            {"n_errors", r.n_errors}};
}

inline Json to_json(const FilterDecision& d) {
    Json j{{"image_id", d.image_id}, {"path", d.path.string()}};
    j["nonempty_score"] = d.nonempty_score ? Json(*d.nonempty_score) : Json(nullptr);
    j["decision"] = to_string(d.decision);
    j["latency_ms"] = d.latency_ms;
    if (d.error) j["error"] = *d.error;
    return j;
}

inline std::string decisions_to_jsonl(const std::vector<FilterDecision>& ds) {
    std::string out;
    for (const auto& d : ds) out += to_json(d).dump() + "\n";
    return out;
}

} // namespace trapsift
