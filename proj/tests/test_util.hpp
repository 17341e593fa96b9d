#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>

#include "trapsift/trapsift.hpp"

namespace testutil {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        static std::mt19937_64 entropy{std::random_device{}()};
        path_ = fs::temp_directory_path() / ("trapsift-test-" + std::to_string(entropy()));
        fs::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline trapsift::EvalSet eval_set(const std::vector<double>& positives, const std::vector<double>& negatives) {
    trapsift::EvalSet e;
    int i = 0;
    for (double s : positives) e.items.push_back({"p" + std::to_string(i++), trapsift::Label::nonempty, s});
    for (double s : negatives) e.items.push_back({"n" + std::to_string(i++), trapsift::Label::empty, s});
    return e;
}

/// The 7-item fixture used across metrics and simulation tests.
inline trapsift::EvalSet seven_item_fixture() { return eval_set({0.9, 0.7, 0.4, 0.2}, {0.8, 0.3, 0.1}); }

/// Random labeled scores with forced ties: scores come from a grid of `levels` values.
/// Guarantees at least one item of each class.
inline trapsift::EvalSet random_eval_set(std::mt19937_64& rng, std::size_t n, std::size_t levels) {
    std::uniform_int_distribution<std::size_t> level(0, levels - 1);
    std::bernoulli_distribution positive(std::uniform_real_distribution<double>(0.05, 0.95)(rng));
    trapsift::EvalSet e;
    e.items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = levels == 1 ? 0.5 : static_cast<double>(level(rng)) / static_cast<double>(levels - 1);
        const bool pos = i == 0 ? true : i == 1 ? false : positive(rng);
        e.items.push_back({"i" + std::to_string(i), pos ? trapsift::Label::nonempty : trapsift::Label::empty, s});
    }
    return e;
}

/// Log-uniform size in [lo, hi].
inline std::size_t log_uniform_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    std::uniform_real_distribution<double> u(std::log(double(lo)), std::log(double(hi) + 1));
    return std::min<std::size_t>(hi, static_cast<std::size_t>(std::exp(u(rng))));
}

/// Synthetic labeled set: `locations` sites, six seasons S1..S6, random class mix and per-site sizes.
inline trapsift::LabeledSet synthetic_labeled(std::mt19937_64& rng, std::size_t locations, std::size_t max_per_location) {
    trapsift::LabeledSet set;
    std::uniform_int_distribution<std::size_t> count(1, max_per_location);
    std::uniform_int_distribution<int> season(1, 6);
    std::bernoulli_distribution empty(0.7);
    std::size_t id = 0;
    for (std::size_t l = 0; l < locations; ++l) {
        const std::string loc = "L" + std::to_string(l);
        const std::size_t n = count(rng);
        for (std::size_t k = 0; k < n; ++k) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "img%07zu", id++);
            set.items.push_back({buf, empty(rng) ? trapsift::Label::empty : trapsift::Label::nonempty, loc,
                                 "S" + std::to_string(season(rng))});
        }
    }
    return set;
}

inline void write_png(const fs::path& path, int width, int height, cv::Scalar bgr) {
    cv::Mat img(height, width, CV_8UC3, bgr);
    if (!cv::imwrite(path.string(), img)) throw std::runtime_error("cannot write " + path.string());
}

inline std::string read_file(const fs::path& p) { return trapsift::csv::read_text(p); }

} // namespace testutil
