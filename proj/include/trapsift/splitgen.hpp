#pragma once

// Dataset partitioning policies: location-disjoint and season-based splits,
// per-location class caps, class balancing, box-only subsets and random
// location holdouts. Every operation returns items sorted by image_id, so
// results depend only on set contents and the seed, never on input order.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "trapsift/csv.hpp"
#include "trapsift/error.hpp"
#include "trapsift/json_io.hpp"
#include "trapsift/manifest.hpp"
#include "trapsift/rng.hpp"

namespace trapsift {

enum class Partition { train, val_dev, val };

inline const char* to_string(Partition p) {
    switch (p) {
    case Partition::train: return "train";
    case Partition::val_dev: return "val_dev";
    case Partition::val: return "val";
    }
    return "?";
}

inline Partition parse_partition(const std::string& s) {
    if (s == "train") return Partition::train;
    if (s == "val_dev") return Partition::val_dev;
    if (s == "val") return Partition::val;
    throw ConfigError("unknown partition '" + s + "' (expected train, val_dev or val)");
}

struct LocationAssignment {
    std::map<std::string, Partition> by_location;
};

struct SeasonAssignment {
    std::map<std::string, Partition> by_season;
};

struct SplitProvenance {
    std::string policy;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> steps;
};

struct SplitResult {
    LabeledSet train;
    LabeledSet val_dev;
    LabeledSet val;
    SplitProvenance provenance;

    LabeledSet& operator[](Partition p) {
        return p == Partition::train ? train : p == Partition::val_dev ? val_dev : val;
    }
    const LabeledSet& operator[](Partition p) const {
        return p == Partition::train ? train : p == Partition::val_dev ? val_dev : val;
    }
};

inline constexpr Partition kPartitions[] = {Partition::train, Partition::val_dev, Partition::val};

/// Sorted by image_id; duplicate ids are an integrity error.
inline LabeledSet canonical(LabeledSet set) {
    std::sort(set.items.begin(), set.items.end(),
              [](const LabeledItem& a, const LabeledItem& b) { return a.image_id < b.image_id; });
    for (std::size_t i = 1; i < set.items.size(); ++i)
        if (set.items[i].image_id == set.items[i - 1].image_id)
            throw IntegrityError("duplicate image id '" + set.items[i].image_id + "' in labeled set");
    return set;
}

inline std::set<std::string> locations_of(const LabeledSet& set) {
    std::set<std::string> out;
    for (const auto& it : set.items) out.insert(it.location_id);
    return out;
}

inline SplitResult split_by_location(const LabeledSet& set, const LocationAssignment& a) {
    const LabeledSet sorted = canonical(set);
    std::set<std::string> unassigned;
    for (const auto& it : sorted.items)
        if (!a.by_location.count(it.location_id)) unassigned.insert(it.location_id);
    if (!unassigned.empty())
        throw ConfigError("locations missing from assignment: " +
                          detail::join_ids({unassigned.begin(), unassigned.end()}));

    SplitResult r;
    r.provenance.policy = "location";
    for (const auto& it : sorted.items) r[a.by_location.at(it.location_id)].items.push_back(it);
    r.provenance.steps.push_back("split_by_location");
    return r;
}

inline SplitResult split_by_time(const LabeledSet& set, const SeasonAssignment& a) {
    const LabeledSet sorted = canonical(set);
    std::vector<std::string> no_season;
    std::set<std::string> unassigned;
    for (const auto& it : sorted.items) {
        if (!it.season)
            no_season.push_back(it.image_id);
        else if (!a.by_season.count(*it.season))
            unassigned.insert(*it.season);
    }
    if (!no_season.empty()) throw ConfigError("items without season: " + detail::join_ids(no_season));
    if (!unassigned.empty())
        throw ConfigError("seasons missing from assignment: " +
                          detail::join_ids({unassigned.begin(), unassigned.end()}));

    SplitResult r;
    r.provenance.policy = "time";
    for (const auto& it : sorted.items) r[a.by_season.at(*it.season)].items.push_back(it);
    r.provenance.steps.push_back("split_by_time");
    return r;
}

/// Keeps at most `cap` items of `cls` per location, chosen uniformly without replacement.
inline LabeledSet cap_class_per_location(const LabeledSet& set, Label cls, std::size_t cap, std::uint64_t seed) {
    if (cap < 1) throw ConfigError("cap must be at least 1");
    const LabeledSet sorted = canonical(set);

    std::map<std::string, std::vector<std::size_t>> by_location;
    for (std::size_t i = 0; i < sorted.items.size(); ++i)
        if (sorted.items[i].label == cls) by_location[sorted.items[i].location_id].push_back(i);

    std::vector<bool> keep(sorted.items.size(), true);
    for (const auto& [loc, members] : by_location) {
        if (members.size() <= cap) continue;
        for (std::size_t i : members) keep[i] = false;
        SplitMix64 rng(derive_seed(seed, "cap/" + loc));
        for (std::size_t pick : sample_without_replacement(members.size(), cap, rng)) keep[members[pick]] = true;
    }

    LabeledSet out;
    for (std::size_t i = 0; i < sorted.items.size(); ++i)
        if (keep[i]) out.items.push_back(sorted.items[i]);
    return out;
}

/// Downsamples the majority class to the minority count.
inline LabeledSet balance_classes(const LabeledSet& set, std::uint64_t seed) {
    const LabeledSet sorted = canonical(set);
    std::vector<std::size_t> empties;
    std::vector<std::size_t> nonempties;
    for (std::size_t i = 0; i < sorted.items.size(); ++i)
        (sorted.items[i].label == Label::empty ? empties : nonempties).push_back(i);
    if (empties.empty() || nonempties.empty())
        throw ConfigError("balance_classes needs both classes present (empty=" + std::to_string(empties.size()) +
                          ", nonempty=" + std::to_string(nonempties.size()) + ")");

    const bool empty_is_majority = empties.size() > nonempties.size();
    const auto& majority = empty_is_majority ? empties : nonempties;
    const std::size_t target = std::min(empties.size(), nonempties.size());

    std::vector<bool> keep(sorted.items.size(), true);
    if (majority.size() > target) {
        for (std::size_t i : majority) keep[i] = false;
        SplitMix64 rng(derive_seed(seed, "balance"));
        for (std::size_t pick : sample_without_replacement(majority.size(), target, rng)) keep[majority[pick]] = true;
    }
    LabeledSet out;
    for (std::size_t i = 0; i < sorted.items.size(); ++i)
        if (keep[i]) out.items.push_back(sorted.items[i]);
    return out;
}

/// Drops nonempty items that have no bounding box in `manifest`.
inline LabeledSet select_bbox_subset(const LabeledSet& set, const Manifest& manifest) {
    std::unordered_set<std::string> boxed;
    for (const auto& b : manifest.boxes) boxed.insert(b.image_id);
    LabeledSet out;
    for (const auto& it : canonical(set).items)
        if (it.label == Label::empty || boxed.count(it.image_id)) out.items.push_back(it);
    return out;
}

struct HoldoutResult {
    LabeledSet remainder;
    LabeledSet holdout;
};

/// Moves `k` whole locations, drawn uniformly from the distinct locations of `set`, into the holdout.
inline HoldoutResult random_location_holdout(const LabeledSet& set, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw ConfigError("holdout size must be at least 1");
    const LabeledSet sorted = canonical(set);
    const std::set<std::string> locs = locations_of(sorted);
    if (locs.size() < k)
        throw ConfigError("cannot hold out " + std::to_string(k) + " locations: only " +
                          std::to_string(locs.size()) + " present");
    const std::vector<std::string> ordered(locs.begin(), locs.end());
    SplitMix64 rng(derive_seed(seed, "holdout"));
    std::set<std::string> chosen;
    for (std::size_t i : sample_without_replacement(ordered.size(), k, rng)) chosen.insert(ordered[i]);

    HoldoutResult r;
    for (const auto& it : sorted.items) (chosen.count(it.location_id) ? r.holdout : r.remainder).items.push_back(it);
    return r;
}

/// Composite plan reproducing the dataset tables: optional box-only subset, a location or season
/// split, an optional random holdout of train locations into val_dev, an optional per-location cap
/// of the empty class on train and val_dev, and optional balancing of train.
struct SplitPlan {
    enum class Policy { location, time };
    Policy policy = Policy::location;
    LocationAssignment locations;
    SeasonAssignment seasons;
    std::optional<std::size_t> holdout_locations;
    std::optional<std::size_t> empty_cap;
    bool balance_train = false;
    bool bbox_only = false;
    std::uint64_t seed = 0;
};

inline SplitResult run_split_plan(const LabeledSet& set, const SplitPlan& plan, const Manifest* manifest = nullptr) {
    std::vector<std::string> steps;
    LabeledSet input = set;
    if (plan.bbox_only) {
        if (!manifest) throw ConfigError("box-only subset needs the manifest");
        input = select_bbox_subset(input, *manifest);
        steps.push_back("select_bbox_subset");
    }
    SplitResult r = plan.policy == SplitPlan::Policy::location ? split_by_location(input, plan.locations)
                                                               : split_by_time(input, plan.seasons);
    steps.insert(steps.end(), r.provenance.steps.begin(), r.provenance.steps.end());

    if (plan.holdout_locations) {
        auto h = random_location_holdout(r.train, *plan.holdout_locations, derive_seed(plan.seed, "plan/holdout"));
        r.train = std::move(h.remainder);
        r.val_dev.items.insert(r.val_dev.items.end(), h.holdout.items.begin(), h.holdout.items.end());
        r.val_dev = canonical(std::move(r.val_dev));
        steps.push_back("random_location_holdout(k=" + std::to_string(*plan.holdout_locations) + ")");
    }
    if (plan.empty_cap) {
        r.train = cap_class_per_location(r.train, Label::empty, *plan.empty_cap, derive_seed(plan.seed, "plan/cap/train"));
        r.val_dev =
            cap_class_per_location(r.val_dev, Label::empty, *plan.empty_cap, derive_seed(plan.seed, "plan/cap/val_dev"));
        steps.push_back("cap_class_per_location(empty, cap=" + std::to_string(*plan.empty_cap) + ", train+val_dev)");
    }
    if (plan.balance_train) {
        r.train = balance_classes(r.train, derive_seed(plan.seed, "plan/balance"));
        steps.push_back("balance_classes(train)");
    }
    r.provenance.steps = std::move(steps);
    r.provenance.seed = plan.seed;
    return r;
}

/// CSV key,partition. A leading "key,partition" header line is optional.
inline std::map<std::string, Partition> read_assignment_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("assignment not found: " + path.string());
    auto rows = csv::read_file(path);
    if (!rows.empty() && rows.front() == csv::Row{"key", "partition"}) rows.erase(rows.begin());
    std::map<std::string, Partition> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw ParseError(path.string() + ": expected key,partition", i + 1, 1);
        if (!out.emplace(rows[i][0], parse_partition(rows[i][1])).second)
            throw ConfigError(path.string() + ": key '" + rows[i][0] + "' assigned twice");
    }
    return out;
}

inline Json provenance_json(const SplitResult& r) {
    Json counts = Json::object();
    for (Partition p : kPartitions) {
        const auto s = summarize(r[p]);
        counts[to_string(p)] = {{"empty", s.overall.empty},
                                {"nonempty", s.overall.nonempty},
                                {"total", s.overall.total()},
                                {"locations", s.per_location.size()}};
    }
    Json j;
    j["policy"] = r.provenance.policy;
    j["seed"] = r.provenance.seed ? Json(*r.provenance.seed) : Json(nullptr);
    j["steps"] = r.provenance.steps;
    j["counts"] = std::move(counts);
    return j;
}

/// Writes train.csv, val_dev.csv, val.csv and provenance.json into `dir`.
inline void write_split(const std::filesystem::path& dir, const SplitResult& r) {
    std::filesystem::create_directories(dir);
    for (Partition p : kPartitions) write_labeled(dir / (std::string(to_string(p)) + ".csv"), r[p]);
    write_json_file(dir / "provenance.json", provenance_json(r));
}

} // namespace trapsift
