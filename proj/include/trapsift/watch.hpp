#pragma once

// Watched-directory mode: file-creation events (possibly duplicated, possibly
// in bursts) are filtered by glob, de-duplicated, and fed to run_filter so that
// every file is processed exactly once.

#include <fnmatch.h>
#include <poll.h>
#include <sys/inotify.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "trapsift/error.hpp"
#include "trapsift/filterpipe.hpp"

namespace trapsift {

inline constexpr const char* kMarkerSuffix = ".trapsift";

struct WatchOptions {
    std::vector<std::string> patterns{"*.jpg", "*.jpeg", "*.JPG", "*.JPEG", "*.png", "*.PNG"};
    /// Write `<file>.trapsift` next to kept files so restarts skip them.
    bool write_markers = false;
};

inline bool matches_any(const std::string& filename, const std::vector<std::string>& patterns) {
    return std::any_of(patterns.begin(), patterns.end(),
                       [&](const std::string& p) { return ::fnmatch(p.c_str(), filename.c_str(), 0) == 0; });
}

class WatchSession {
public:
    WatchSession(FilterConfig cfg, PreprocessSpec spec, InferenceBackend& backend, WatchOptions opts = {})
        : cfg_(std::move(cfg)), spec_(spec), backend_(backend), opts_(std::move(opts)) {}

    /// Handles one batch of events. Already-seen, marked, or non-matching paths are ignored.
    FilterRun submit(const std::vector<std::filesystem::path>& events) {
        std::vector<std::filesystem::path> fresh;
        for (const auto& p : events) {
            const std::string name = p.filename().string();
            if (name.ends_with(kMarkerSuffix) || !matches_any(name, opts_.patterns)) continue;
            std::error_code ec;
            auto key = std::filesystem::weakly_canonical(p, ec);
            if (ec) key = p.lexically_normal();
            if (!seen_.insert(key.string()).second) continue;
            if (!std::filesystem::is_regular_file(p, ec)) continue;
            if (opts_.write_markers && std::filesystem::exists(marker_for(p))) continue;
            fresh.push_back(p);
        }
        FilterRun run = run_filter(fresh, cfg_, spec_, backend_);
        if (opts_.write_markers)
            for (const auto& d : run.decisions)
                if (std::filesystem::exists(d.path)) std::ofstream(marker_for(d.path)) << to_string(d.decision) << "\n";
        accumulate(run);
        return run;
    }

    const SavingsReport& totals() const noexcept { return totals_; }
    std::size_t seen_count() const noexcept { return seen_.size(); }

    static std::filesystem::path marker_for(const std::filesystem::path& p) {
        return p.parent_path() / (p.filename().string() + kMarkerSuffix);
    }

private:
    void accumulate(const FilterRun& run) {
        totals_.n_processed += run.report.n_processed;
        totals_.n_discarded += run.report.n_discarded;
        totals_.bytes_saved += run.report.bytes_saved;
        totals_.n_errors += run.report.n_errors;
        finalize(totals_);
    }

    FilterConfig cfg_;
    PreprocessSpec spec_;
    InferenceBackend& backend_;
    WatchOptions opts_;
    std::set<std::string> seen_;
    SavingsReport totals_;
};

/// inotify watch on one directory (non-recursive) for completed writes and moved-in files.
class DirectoryWatcher {
public:
    explicit DirectoryWatcher(const std::filesystem::path& dir) : dir_(dir) {
        fd_ = ::inotify_init1(IN_NONBLOCK | IN_CLOEXEC);
        if (fd_ < 0) throw UnsupportedError(std::string("inotify unavailable: ") + std::strerror(errno));
        if (::inotify_add_watch(fd_, dir.c_str(), IN_CLOSE_WRITE | IN_MOVED_TO) < 0) {
            const int err = errno;
            ::close(fd_);
            throw ConfigError("cannot watch " + dir.string() + ": " + std::strerror(err));
        }
    }
    DirectoryWatcher(const DirectoryWatcher&) = delete;
    DirectoryWatcher& operator=(const DirectoryWatcher&) = delete;
    ~DirectoryWatcher() {
        if (fd_ >= 0) ::close(fd_);
    }

    /// Regular files already present, sorted by name.
    std::vector<std::filesystem::path> existing() const {
        std::vector<std::filesystem::path> out;
        for (const auto& e : std::filesystem::directory_iterator(dir_))
            if (e.is_regular_file()) out.push_back(e.path());
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Waits up to `timeout` for events; returns the affected paths (duplicates possible).
    std::vector<std::filesystem::path> poll(std::chrono::milliseconds timeout) {
        std::vector<std::filesystem::path> out;
        pollfd pfd{fd_, POLLIN, 0};
        if (::poll(&pfd, 1, static_cast<int>(timeout.count())) <= 0) return out;
        alignas(inotify_event) char buf[16384];
        for (;;) {
            const ssize_t len = ::read(fd_, buf, sizeof buf);
            if (len <= 0) break;
            for (char* p = buf; p < buf + len;) {
                const auto* ev = reinterpret_cast<const inotify_event*>(p);
                if (ev->len > 0 && !(ev->mask & IN_ISDIR)) out.push_back(dir_ / ev->name);
                p += sizeof(inotify_event) + ev->len;
            }
        }
        return out;
    }

private:
    std::filesystem::path dir_;
    int fd_ = -1;
};

/// Processes existing files, then events until `stop()` returns true (checked after every poll).
inline SavingsReport run_watch(const std::filesystem::path& dir, WatchSession& session,
                               const std::function<bool(const WatchSession&)>& stop,
                               std::chrono::milliseconds poll_interval = std::chrono::milliseconds(200),
                               const std::function<void(const FilterRun&)>& on_batch = {}) {
    DirectoryWatcher watcher(dir);
    auto handle = [&](const std::vector<std::filesystem::path>& events) {
        if (events.empty()) return;
        FilterRun run = session.submit(events);
        if (on_batch && !run.decisions.empty()) on_batch(run);
    };
    handle(watcher.existing());
    while (!stop(session)) handle(watcher.poll(poll_interval));
    return session.totals();
}

} // namespace trapsift
