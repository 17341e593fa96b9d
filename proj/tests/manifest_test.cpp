#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "trapsift/manifest.hpp"

using namespace trapsift;

namespace {

const char* kTwoImages = R"({
  "info": {"version": "1.0"},
  "images": [
    {"id": "a", "file_name": "loc1/a.jpg", "location": 1, "width": 100, "height": 80, "extra": true},
    {"id": "b", "file_name": "loc2/b.jpg", "location": "2", "season": "S3"}
  ],
  "annotations": [
    {"id": 1, "image_id": "a", "category_id": 5, "bbox": [10, 10, 20, 30]},
    {"id": 2, "image_id": "b", "category_id": 0}
  ],
  "categories": [{"id": 0, "name": "empty"}, {"id": 5, "name": "deer"}]
})";

std::string ten_images_with_dangling_box() {
    Json doc;
    doc["categories"] = Json::array({{{"id", 0}, {"name", "empty"}}, {{"id", 1}, {"name", "fox"}}});
    doc["images"] = Json::array();
    doc["annotations"] = Json::array();
    for (int i = 0; i < 10; ++i) {
        const std::string id = "img" + std::to_string(i);
        doc["images"].push_back({{"id", id}, {"file_name", id + ".jpg"}, {"location", i % 3}});
        doc["annotations"].push_back({{"image_id", id}, {"category_id", i % 2}});
    }
    doc["annotations"].push_back({{"image_id", "zz"}, {"category_id", 1}, {"bbox", {1, 1, 5, 5}}});
    return doc.dump();
}

Manifest three_images(bool box_on_deer) {
    Manifest m;
    m.categories = {"blank", "deer"};
    m.images = {{"i1", "i1.jpg", "L1", std::nullopt, "blank", std::nullopt, std::nullopt, std::nullopt},
                {"i2", "i2.jpg", "L1", std::nullopt, "deer", std::nullopt, std::nullopt, std::nullopt},
                {"i3", "i3.jpg", "L2", std::nullopt, "blank", std::nullopt, std::nullopt, std::nullopt}};
    m.locations = {"L1", "L2"};
    if (box_on_deer) m.boxes.push_back({"i2", 1, 1, 4, 4});
    return m;
}

} // namespace

TEST(ParseManifest, EmptyDocument) {
    const auto m = parse_manifest_text(R"({"images": [], "annotations": [], "categories": []})");
    EXPECT_TRUE(m.images.empty());
    EXPECT_TRUE(m.boxes.empty());
    EXPECT_TRUE(m.categories.empty());
}

TEST(ParseManifest, TwoImagesOneBox) {
    const auto m = parse_manifest_text(kTwoImages);
    ASSERT_EQ(m.images.size(), 2u);
    ASSERT_EQ(m.boxes.size(), 1u);
    EXPECT_EQ(m.boxes[0].image_id, "a");
    EXPECT_EQ(m.images[0].location_id, "1");
    EXPECT_EQ(m.images[0].category, "deer");
    EXPECT_EQ(m.images[0].width, 100);
    EXPECT_EQ(m.images[1].season, "S3");
    EXPECT_EQ(m.images[1].category, "empty");
    EXPECT_EQ(m.locations, (std::set<std::string>{"1", "2"}));
    EXPECT_EQ(m.categories, (std::set<std::string>{"empty", "deer"}));
}

TEST(ParseManifest, DanglingBoxNamesTheMissingId) {
    try {
        parse_manifest_text(ten_images_with_dangling_box());
        FAIL() << "expected IntegrityError";
    } catch (const IntegrityError& e) {
        EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
    }
}

TEST(ParseManifest, MalformedJsonReportsLineAndColumn) {
    try {
        parse_manifest_text("{\n  \"images\": [\n    {\"id\": \"a\",,}\n  ]\n}");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_GT(e.column(), 1u);
    }
}

TEST(ParseManifest, CorruptImagesAreDroppedAndCounted) {
    const auto m = parse_manifest_text(R"({
      "images": [{"id": "a", "location": "x"}, {"id": "b", "location": "x", "corrupt": true}],
      "annotations": [{"image_id": "a", "category_id": 0}, {"image_id": "b", "category_id": 0}],
      "categories": [{"id": 0, "name": "empty"}]})");
    EXPECT_EQ(m.images.size(), 1u);
    EXPECT_EQ(m.corrupt_count, 1u);
}

TEST(ParseManifest, InvalidBoxesAndDuplicates) {
    EXPECT_THROW(parse_manifest_text(R"({"images": [{"id": "a", "width": 10, "height": 10}],
      "annotations": [{"image_id": "a", "category_id": 0, "bbox": [5, 5, 10, 2]}],
      "categories": [{"id": 0, "name": "deer"}]})"),
                 ValidationError);
    EXPECT_THROW(parse_manifest_text(R"({"images": [{"id": "a"}],
      "annotations": [{"image_id": "a", "category_id": 0, "bbox": [0, 0, 0, 2]}],
      "categories": [{"id": 0, "name": "deer"}]})"),
                 ValidationError);
    EXPECT_THROW(parse_manifest_text(R"({"images": [{"id": "a"}, {"id": "a"}]})"), IntegrityError);
    EXPECT_THROW(parse_manifest_text(R"({"images": [{"id": "a", "width": 0}]})"), ValidationError);
    EXPECT_THROW(parse_manifest_text(R"({"images": [{"id": "a"}],
      "annotations": [{"image_id": "a", "category_id": 9}], "categories": []})"),
                 IntegrityError);
}

TEST(ParseManifest, SeasonMapFillsMissingSeasons) {
    const auto m = parse_manifest_text(kTwoImages, "m", {{"a", "S1"}, {"b", "S9"}});
    EXPECT_EQ(m.images[0].season, "S1");
    EXPECT_EQ(m.images[1].season, "S3"); // record field wins
}

TEST(ParseManifest, MissingFileIsConfigError) {
    EXPECT_THROW(parse_manifest("/nonexistent/manifest.json"), ConfigError);
}

TEST(ParseManifest, SerializeRoundTrip) {
    const auto m = parse_manifest_text(kTwoImages);
    const auto again = parse_manifest_text(serialize_manifest(m));
    EXPECT_EQ(again, m);
}

TEST(ParseManifest, SerializeRoundTripRandom) {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 20; ++round) {
        Manifest m;
        m.categories = {"empty", "deer", "fox", "blank"};
        const std::vector<std::string> cats(m.categories.begin(), m.categories.end());
        const int n = std::uniform_int_distribution<int>(0, 40)(rng);
        for (int i = 0; i < n; ++i) {
            ImageRecord r;
            r.image_id = "img" + std::to_string(i);
            r.file_name = "dir/" + r.image_id + ".jpg";
            r.location_id = "L" + std::to_string(rng() % 5);
            if (rng() % 2) r.season = "S" + std::to_string(1 + rng() % 6);
            r.category = (rng() % 10 == 0) ? "" : cats[rng() % cats.size()];
            if (rng() % 2) {
                r.width = 640;
                r.height = 480;
            }
            if (rng() % 3 == 0) r.byte_size = rng() % 100000;
            m.locations.insert(r.location_id);
            const int boxes = r.category.empty() ? 0 : static_cast<int>(rng() % 3);
            for (int b = 0; b < boxes; ++b) m.boxes.push_back({r.image_id, 1.5 * b, 2.0, 10.25, 20.0});
            m.images.push_back(std::move(r));
        }
        // Boxes are serialized before category-only annotations; keep that order here.
        EXPECT_EQ(parse_manifest_text(serialize_manifest(m)), m);
    }
}

TEST(ToLabeled, CategoryDecidesLabel) {
    LabelPolicy policy{{"blank"}, false};
    const auto r = to_labeled(three_images(false), policy);
    ASSERT_EQ(r.set.size(), 3u);
    EXPECT_EQ(r.set.items[0].label, Label::empty);
    EXPECT_EQ(r.set.items[1].label, Label::nonempty);
    EXPECT_EQ(r.set.items[2].label, Label::empty);
    EXPECT_EQ(r.excluded_count(), 0u);
}

TEST(ToLabeled, RequireBboxExcludesUnboxedNonempty) {
    LabelPolicy policy{{"blank"}, true};
    const auto r = to_labeled(three_images(false), policy);
    EXPECT_EQ(r.set.size(), 2u);
    EXPECT_EQ(r.excluded_count(), 1u);
    for (const auto& it : r.set.items) EXPECT_EQ(it.label, Label::empty);
    EXPECT_EQ(to_labeled(three_images(true), policy).set.size(), 3u);
}

TEST(ToLabeled, AllEmptyCategories) {
    LabelPolicy policy{{"blank", "deer"}, false};
    for (const auto& it : to_labeled(three_images(false), policy).set.items) EXPECT_EQ(it.label, Label::empty);
}

TEST(ToLabeled, DefaultPolicyCoversBothVocabularies) {
    LabelPolicy policy;
    EXPECT_EQ(policy.empty_categories, (std::set<std::string>{"empty", "blank"}));
    EXPECT_FALSE(policy.require_bbox_for_nonempty);
}

TEST(ToLabeled, BoxedEmptyCategoryStaysEmpty) {
    auto m = three_images(false);
    m.boxes.push_back({"i1", 0, 0, 5, 5});
    EXPECT_EQ(to_labeled(m, LabelPolicy{{"blank"}, true}).set.items[0].label, Label::empty);
}

TEST(ToLabeled, SizePlusExcludedEqualsImages) {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 50; ++round) {
        Manifest m;
        const int n = static_cast<int>(rng() % 60);
        for (int i = 0; i < n; ++i) {
            const char* cats[] = {"", "empty", "blank", "deer", "zebra"};
            m.images.push_back({std::to_string(i), "", "L", std::nullopt, cats[rng() % 5], std::nullopt, std::nullopt,
                                std::nullopt});
            if (rng() % 2) m.boxes.push_back({std::to_string(i), 0, 0, 1, 1});
        }
        LabelPolicy policy{{"empty", "blank"}, static_cast<bool>(rng() % 2)};
        const auto r = to_labeled(m, policy);
        EXPECT_EQ(r.set.size() + r.excluded_count(), m.images.size());
    }
}

TEST(Summarize, EmptySet) {
    const auto s = summarize({});
    EXPECT_EQ(s.overall.total(), 0u);
    EXPECT_TRUE(s.per_location.empty());
}

TEST(Summarize, ManualCount) {
    LabeledSet set;
    const Label E = Label::empty, N = Label::nonempty;
    const std::vector<std::pair<Label, std::string>> items{{E, "A"}, {E, "A"}, {N, "A"}, {E, "B"},
                                                           {E, "B"}, {E, "B"}, {N, "B"}, {N, "B"}};
    for (std::size_t i = 0; i < items.size(); ++i)
        set.items.push_back({std::to_string(i), items[i].first, items[i].second, std::nullopt});
    const auto s = summarize(set);
    EXPECT_EQ(s.overall.empty, 5u);
    EXPECT_EQ(s.overall.nonempty, 3u);
    EXPECT_EQ(s.per_location.at("A"), (ClassCounts{2, 1}));
    EXPECT_EQ(s.per_location.at("B"), (ClassCounts{3, 2}));

    std::mt19937_64 rng(5);
    for (int i = 0; i < 10; ++i) {
        auto shuffled = set;
        std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
        EXPECT_EQ(summarize(shuffled), s);
    }
}

TEST(LabeledCsv, RoundTripWithQuotingAndMissingSeason) {
    LabeledSet set;
    set.items.push_back({"a,1", Label::empty, "loc \"x\"", std::nullopt});
    set.items.push_back({"b", Label::nonempty, "L2", "S4"});
    EXPECT_EQ(labeled_from_csv(labeled_to_csv(set)), set);
    EXPECT_EQ(labeled_to_csv(set).substr(0, 31), "image_id,label,location,season\n");
}

TEST(LabeledCsv, RejectsBadInput) {
    EXPECT_THROW(labeled_from_csv("id,label\n"), ParseError);
    EXPECT_THROW(labeled_from_csv("image_id,label,location,season\na,maybe,L,\n"), ValidationError);
    EXPECT_THROW(labeled_from_csv("image_id,label,location,season\na,empty,L,\na,empty,L,\n"), IntegrityError);
}
