#include <algorithm>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "trapsift/splitgen.hpp"

using namespace trapsift;

namespace {

LabeledSet make_set(const std::vector<std::tuple<std::string, Label, std::string, std::string>>& rows) {
    LabeledSet s;
    for (const auto& [id, label, loc, season] : rows)
        s.items.push_back({id, label, loc, season.empty() ? std::nullopt : std::optional<std::string>(season)});
    return s;
}

std::size_t count(const LabeledSet& s, Label l, const std::string& loc = "") {
    return static_cast<std::size_t>(std::count_if(s.items.begin(), s.items.end(), [&](const LabeledItem& it) {
        return it.label == l && (loc.empty() || it.location_id == loc);
    }));
}

std::vector<std::string> ids(const LabeledSet& s) {
    std::vector<std::string> out;
    for (const auto& it : s.items) out.push_back(it.image_id);
    return out;
}

bool sorted_unique(const LabeledSet& s) {
    for (std::size_t i = 1; i < s.items.size(); ++i)
        if (!(s.items[i - 1].image_id < s.items[i].image_id)) return false;
    return true;
}

constexpr Label E = Label::empty;
constexpr Label N = Label::nonempty;

} // namespace

TEST(Rng, SplitMixReferenceSequence) {
    // First outputs of the reference splitmix64 for seed 0.
    SplitMix64 r(0);
    EXPECT_EQ(r(), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(r(), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(r(), 0x06c45d188009454fULL);
}

TEST(Rng, SampleWithoutReplacementIsDistinctAndSorted) {
    SplitMix64 r(42);
    for (std::size_t n : {1u, 5u, 100u}) {
        for (std::size_t k = 0; k <= n + 2; k += 3) {
            const auto s = sample_without_replacement(n, k, r);
            EXPECT_EQ(s.size(), std::min(n, k));
            EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
            EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
            for (auto i : s) EXPECT_LT(i, n);
        }
    }
}

TEST(Rng, SamplingIsRoughlyUniform) {
    SplitMix64 r(9);
    std::vector<int> hits(10, 0);
    for (int round = 0; round < 20000; ++round)
        for (auto i : sample_without_replacement(10, 3, r)) ++hits[i];
    for (int h : hits) EXPECT_NEAR(h, 6000, 300);
}

TEST(SplitByLocation, ThreeLocations) {
    const auto s = make_set({{"a", E, "A", ""}, {"b", N, "B", ""}, {"c", E, "C", ""}, {"d", N, "A", ""}});
    LocationAssignment a{{{"A", Partition::train}, {"B", Partition::val_dev}, {"C", Partition::val}}};
    const auto r = split_by_location(s, a);
    EXPECT_EQ(ids(r.train), (std::vector<std::string>{"a", "d"}));
    EXPECT_EQ(ids(r.val_dev), (std::vector<std::string>{"b"}));
    EXPECT_EQ(ids(r.val), (std::vector<std::string>{"c"}));
}

TEST(SplitByLocation, EmptyInputAndUnassignedLocation) {
    const auto r = split_by_location({}, {});
    for (Partition p : kPartitions) EXPECT_TRUE(r[p].items.empty());
    const auto s = make_set({{"a", E, "A", ""}, {"b", E, "Z", ""}});
    try {
        split_by_location(s, {{{"A", Partition::train}}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("Z"), std::string::npos);
    }
}

TEST(SplitByTime, SeasonRouting) {
    std::mt19937_64 rng(1);
    const auto s = testutil::synthetic_labeled(rng, 30, 40);
    SeasonAssignment a;
    for (int i = 1; i <= 4; ++i) a.by_season["S" + std::to_string(i)] = Partition::train;
    a.by_season["S5"] = Partition::val_dev;
    a.by_season["S6"] = Partition::val;
    const auto r = split_by_time(s, a);
    for (const auto& it : r.train.items) EXPECT_LE(it.season->at(1), '4');
    for (const auto& it : r.val_dev.items) EXPECT_EQ(*it.season, "S5");
    for (const auto& it : r.val.items) EXPECT_EQ(*it.season, "S6");
    EXPECT_EQ(r.train.size() + r.val_dev.size() + r.val.size(), s.size());
}

TEST(SplitByTime, MissingSeasonIsConfigError) {
    const auto s = make_set({{"a", E, "A", "S1"}, {"b", E, "A", ""}});
    EXPECT_THROW(split_by_time(s, {{{"S1", Partition::train}}}), ConfigError);
    const auto t = make_set({{"a", E, "A", "S1"}, {"b", E, "A", "S7"}});
    EXPECT_THROW(split_by_time(t, {{{"S1", Partition::train}}}), ConfigError);
}

TEST(SplitInvariants, DisjointCoverAndLocationPurity) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const auto s = testutil::synthetic_labeled(rng, 50 + seed, 30);
        LocationAssignment a;
        for (const auto& loc : locations_of(s)) a.by_location[loc] = kPartitions[rng() % 3];
        const auto r = split_by_location(s, a);
        std::map<std::string, Partition> seen_loc;
        std::vector<std::string> all;
        for (Partition p : kPartitions) {
            EXPECT_TRUE(sorted_unique(r[p]));
            for (const auto& it : r[p].items) {
                all.push_back(it.image_id);
                auto [pos, inserted] = seen_loc.emplace(it.location_id, p);
                EXPECT_EQ(pos->second, p) << "location " << it.location_id << " spans partitions";
            }
        }
        std::sort(all.begin(), all.end());
        EXPECT_EQ(all, ids(canonical(s)));
    }
}

TEST(CapClass, CapsEachLocationIndependently) {
    LabeledSet s;
    for (int i = 0; i < 1500; ++i) s.items.push_back({"a" + std::to_string(i), E, "A", std::nullopt});
    for (int i = 0; i < 10; ++i) s.items.push_back({"b" + std::to_string(i), E, "B", std::nullopt});
    for (int i = 0; i < 7; ++i) s.items.push_back({"n" + std::to_string(i), N, "A", std::nullopt});
    const auto out = cap_class_per_location(s, E, 1000, 5);
    EXPECT_EQ(count(out, E, "A"), 1000u);
    EXPECT_EQ(count(out, E, "B"), 10u);
    EXPECT_EQ(count(out, N), 7u);
    EXPECT_TRUE(sorted_unique(out));
}

TEST(CapClass, MinOfCapAndCountProperty) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        std::mt19937_64 rng(seed);
        const auto s = testutil::synthetic_labeled(rng, 20, 200);
        const std::size_t cap = 1 + rng() % 80;
        const auto out = cap_class_per_location(s, E, cap, seed);
        for (const auto& loc : locations_of(s)) {
            EXPECT_EQ(count(out, E, loc), std::min(cap, count(s, E, loc)));
            EXPECT_EQ(count(out, N, loc), count(s, N, loc));
        }
        // Output is a subset of the input.
        const auto in_ids = ids(canonical(s));
        for (const auto& id : ids(out)) EXPECT_TRUE(std::binary_search(in_ids.begin(), in_ids.end(), id));
    }
}

TEST(CapClass, SeedDeterminesSelection) {
    std::mt19937_64 rng(3);
    const auto s = testutil::synthetic_labeled(rng, 10, 300);
    EXPECT_EQ(cap_class_per_location(s, E, 20, 1), cap_class_per_location(s, E, 20, 1));
    EXPECT_NE(cap_class_per_location(s, E, 20, 1), cap_class_per_location(s, E, 20, 2));
    auto shuffled = s;
    std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
    EXPECT_EQ(cap_class_per_location(shuffled, E, 20, 1), cap_class_per_location(s, E, 20, 1));
    EXPECT_THROW(cap_class_per_location(s, E, 0, 1), ConfigError);
}

TEST(Balance, DownsamplesMajority) {
    LabeledSet s;
    for (int i = 0; i < 70; ++i) s.items.push_back({"e" + std::to_string(i), E, "L", std::nullopt});
    for (int i = 0; i < 30; ++i) s.items.push_back({"n" + std::to_string(i), N, "L", std::nullopt});
    const auto out = balance_classes(s, 1);
    EXPECT_EQ(count(out, E), 30u);
    EXPECT_EQ(count(out, N), 30u);
}

TEST(Balance, ExactBalanceProperty) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        std::mt19937_64 rng(seed);
        const auto s = testutil::synthetic_labeled(rng, 5, 100);
        const auto out = balance_classes(s, seed);
        const auto m = std::min(count(s, E), count(s, N));
        EXPECT_EQ(count(out, E), m);
        EXPECT_EQ(count(out, N), m);
    }
}

TEST(Balance, SingleClassIsConfigError) {
    EXPECT_THROW(balance_classes(make_set({{"a", E, "L", ""}}), 0), ConfigError);
    EXPECT_THROW(balance_classes({}, 0), ConfigError);
}

TEST(BboxSubset, KeepsEmptiesAndBoxedNonempty) {
    const auto s = make_set({{"a", E, "L", ""}, {"b", N, "L", ""}, {"c", N, "L", ""}});
    Manifest m;
    m.boxes.push_back({"c", 0, 0, 1, 1});
    EXPECT_EQ(ids(select_bbox_subset(s, m)), (std::vector<std::string>{"a", "c"}));
}

TEST(Holdout, MovesWholeLocations) {
    for (std::size_t k : {20u, 23u}) {
        std::mt19937_64 rng(k);
        const auto s = testutil::synthetic_labeled(rng, 60, 25);
        const auto h = random_location_holdout(s, k, 77);
        EXPECT_EQ(locations_of(h.holdout).size(), k);
        for (const auto& loc : locations_of(h.holdout)) EXPECT_EQ(locations_of(h.remainder).count(loc), 0u);
        EXPECT_EQ(h.holdout.size() + h.remainder.size(), s.size());
        EXPECT_EQ(ids(random_location_holdout(s, k, 77).holdout), ids(h.holdout));
    }
}

TEST(Holdout, TooManyLocations) {
    const auto s = make_set({{"a", E, "A", ""}, {"b", E, "B", ""}});
    EXPECT_THROW(random_location_holdout(s, 3, 0), ConfigError);
    EXPECT_THROW(random_location_holdout(s, 0, 0), ConfigError);
}

TEST(SplitPlan, FullPipelineOrderAndProvenance) {
    std::mt19937_64 rng(8);
    const auto s = testutil::synthetic_labeled(rng, 80, 120);
    SplitPlan plan;
    for (const auto& loc : locations_of(s)) plan.locations.by_location[loc] = kPartitions[fnv1a64(loc) % 3];
    plan.holdout_locations = 5;
    plan.empty_cap = 30;
    plan.balance_train = true;
    plan.seed = 2024;
    const auto r = run_split_plan(s, plan);
    ASSERT_EQ(r.provenance.steps.size(), 4u);
    EXPECT_EQ(r.provenance.steps[0], "split_by_location");
    EXPECT_EQ(count(r.train, E), count(r.train, N));
    for (const auto& loc : locations_of(r.val_dev)) EXPECT_LE(count(r.val_dev, E, loc), 30u);
    // val is never capped or balanced.
    const auto plain = split_by_location(s, plan.locations);
    EXPECT_EQ(r.val, plain.val);

    testutil::TempDir d1, d2;
    write_split(d1.path(), r);
    write_split(d2.path(), run_split_plan(s, plan));
    for (const char* f : {"train.csv", "val_dev.csv", "val.csv", "provenance.json"})
        EXPECT_EQ(testutil::read_file(d1 / f), testutil::read_file(d2 / f)) << f;
    const auto back = read_labeled(d1 / "train.csv");
    EXPECT_EQ(back, r.train);
}

TEST(SplitPlan, BboxOnlyNeedsManifest) {
    SplitPlan plan;
    plan.bbox_only = true;
    EXPECT_THROW(run_split_plan({}, plan), ConfigError);
}

TEST(AssignmentCsv, HeaderOptionalAndDuplicatesRejected) {
    testutil::TempDir d;
    csv::write_text(d / "a.csv", "key,partition\nA,train\nB,val\n");
    const auto m = read_assignment_csv(d / "a.csv");
    EXPECT_EQ(m.at("A"), Partition::train);
    EXPECT_EQ(m.at("B"), Partition::val);
    csv::write_text(d / "b.csv", "A,train\nA,val\n");
    EXPECT_THROW(read_assignment_csv(d / "b.csv"), ConfigError);
    csv::write_text(d / "c.csv", "A,nowhere\n");
    EXPECT_THROW(read_assignment_csv(d / "c.csv"), ConfigError);
    EXPECT_THROW(read_assignment_csv(d / "missing.csv"), ConfigError);
}
