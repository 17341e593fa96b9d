#pragma once

// Camera-trap dataset manifests (COCO Camera Traps layout) and the binary
// empty/nonempty labeling derived from them.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "trapsift/csv.hpp"
#include "trapsift/error.hpp"
#include "trapsift/json_io.hpp"

namespace trapsift {

enum class Label { empty, nonempty };

inline const char* to_string(Label l) { return l == Label::empty ? "empty" : "nonempty"; }

inline Label parse_label(const std::string& s) {
    if (s == "empty") return Label::empty;
    if (s == "nonempty") return Label::nonempty;
    throw ValidationError("unknown label '" + s + "' (expected empty or nonempty)");
}

struct ImageRecord {
    std::string image_id;
    std::string file_name;
    std::string location_id;
    std::optional<std::string> season;
    /// Category of the first annotation referencing the image; empty string when unannotated.
    std::string category;
    std::optional<std::uint64_t> byte_size;
    std::optional<int> width;
    std::optional<int> height;

    bool operator==(const ImageRecord&) const = default;
};

struct BoundingBox {
    std::string image_id;
    double x = 0;
    double y = 0;
    double w = 0;
    double h = 0;

    bool operator==(const BoundingBox&) const = default;
};

struct Manifest {
    std::vector<ImageRecord> images;
    std::vector<BoundingBox> boxes;
    std::set<std::string> categories;
    std::set<std::string> locations;
    /// Records dropped at parse time because they carried a truthy "corrupt" field.
    std::size_t corrupt_count = 0;

    bool operator==(const Manifest&) const = default;
};

struct LabelPolicy {
    std::set<std::string> empty_categories{"empty", "blank"};
    bool require_bbox_for_nonempty = false;
};

struct LabeledItem {
    std::string image_id;
    Label label = Label::empty;
    std::string location_id;
    std::optional<std::string> season;

    bool operator==(const LabeledItem&) const = default;
};

struct LabeledSet {
    std::vector<LabeledItem> items;

    std::size_t size() const noexcept { return items.size(); }
    bool empty() const noexcept { return items.empty(); }
    bool operator==(const LabeledSet&) const = default;
};

struct LabelingResult {
    LabeledSet set;
    /// Nonempty images dropped because they have no box while the policy requires one.
    std::size_t excluded_without_bbox = 0;
    /// Images no annotation refers to; they carry no category and cannot be labeled.
    std::size_t excluded_unannotated = 0;

    std::size_t excluded_count() const noexcept { return excluded_without_bbox + excluded_unannotated; }
};

struct ClassCounts {
    std::size_t empty = 0;
    std::size_t nonempty = 0;

    std::size_t total() const noexcept { return empty + nonempty; }
    bool operator==(const ClassCounts&) const = default;
};

struct LabelSummary {
    ClassCounts overall;
    std::map<std::string, ClassCounts> per_location;

    bool operator==(const LabelSummary&) const = default;
};

namespace detail {

inline std::string id_string(const Json& v, const std::string& what) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    throw ValidationError(what + " must be a string or integer");
}

inline bool truthy(const Json& v) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number()) return v.get<double>() != 0.0;
    if (v.is_string()) return !v.get<std::string>().empty();
    return !v.is_null();
}

inline std::optional<int> positive_dim(const Json& obj, const char* key, const std::string& image_id) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw ValidationError("image '" + image_id + "': " + key + " must be a number");
    const double v = it->get<double>();
    if (!(v > 0)) throw ValidationError("image '" + image_id + "': " + key + " must be positive");
    return static_cast<int>(v);
}

inline std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 20) {
    std::string out;
    for (std::size_t i = 0; i < ids.size() && i < limit; ++i) out += (i ? ", " : "") + ids[i];
    if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
    return out;
}

} // namespace detail

/// Box invariants: positive extent, non-negative origin, inside the image when its size is known.
inline void validate_box(const BoundingBox& b, const ImageRecord& img) {
    if (!(b.w > 0) || !(b.h > 0))
        throw ValidationError("box on image '" + b.image_id + "' has non-positive width or height");
    if (b.x < 0 || b.y < 0) throw ValidationError("box on image '" + b.image_id + "' has negative origin");
    if (img.width && b.x + b.w > *img.width)
        throw ValidationError("box on image '" + b.image_id + "' extends past image width");
    if (img.height && b.y + b.h > *img.height)
        throw ValidationError("box on image '" + b.image_id + "' extends past image height");
}

/// `season_map` supplies seasons for images whose record has none (image_id -> season).
inline Manifest parse_manifest_text(const std::string& text, const std::string& origin = "manifest",
                                    const std::map<std::string, std::string>& season_map = {}) {
    const Json doc = parse_json(text, origin);
    if (!doc.is_object()) throw ParseError(origin + ": top level must be an object", 1, 1);

    auto array_of = [&](const char* key) -> const Json& {
        static const Json empty_array = Json::array();
        auto it = doc.find(key);
        if (it == doc.end() || it->is_null()) return empty_array;
        if (!it->is_array()) throw ParseError(origin + ": '" + key + "' must be an array");
        return *it;
    };

    Manifest m;
    std::unordered_map<std::string, std::string> category_names;
    for (const auto& c : array_of("categories")) {
        if (!c.contains("id") || !c.contains("name")) throw ValidationError(origin + ": category needs id and name");
        const std::string id = detail::id_string(c.at("id"), "category id");
        category_names[id] = c.at("name").get<std::string>();
        m.categories.insert(c.at("name").get<std::string>());
    }

    std::unordered_map<std::string, std::size_t> index;
    std::unordered_set<std::string> corrupt_ids;
    for (const auto& im : array_of("images")) {
        if (!im.is_object() || !im.contains("id")) throw ValidationError(origin + ": image entry without id");
        ImageRecord r;
        r.image_id = detail::id_string(im.at("id"), "image id");
        if (auto it = im.find("corrupt"); it != im.end() && detail::truthy(*it)) {
            corrupt_ids.insert(r.image_id);
            ++m.corrupt_count;
            continue;
        }
        if (index.count(r.image_id)) throw IntegrityError(origin + ": duplicate image id '" + r.image_id + "'");
        r.file_name = im.value("file_name", std::string{});
        if (auto it = im.find("location"); it != im.end() && !it->is_null())
            r.location_id = detail::id_string(*it, "location");
        if (auto it = im.find("season"); it != im.end() && !it->is_null()) {
            r.season = detail::id_string(*it, "season");
        } else if (auto s = season_map.find(r.image_id); s != season_map.end()) {
            r.season = s->second;
        }
        if (auto it = im.find("byte_size"); it != im.end() && !it->is_null()) {
            if (!it->is_number() || it->get<double>() < 0)
                throw ValidationError("image '" + r.image_id + "': byte_size must be non-negative");
            r.byte_size = it->get<std::uint64_t>();
        }
        r.width = detail::positive_dim(im, "width", r.image_id);
        r.height = detail::positive_dim(im, "height", r.image_id);
        index.emplace(r.image_id, m.images.size());
        m.locations.insert(r.location_id);
        m.images.push_back(std::move(r));
    }

    std::vector<std::string> dangling;
    std::vector<std::string> unknown_categories;
    for (const auto& a : array_of("annotations")) {
        if (!a.is_object() || !a.contains("image_id")) throw ValidationError(origin + ": annotation without image_id");
        const std::string image_id = detail::id_string(a.at("image_id"), "annotation image_id");
        auto it = index.find(image_id);
        if (it == index.end()) {
            if (!corrupt_ids.count(image_id)) dangling.push_back(image_id);
            continue;
        }
        ImageRecord& img = m.images[it->second];
        if (auto c = a.find("category_id"); c != a.end() && !c->is_null()) {
            const std::string cid = detail::id_string(*c, "category_id");
            auto name = category_names.find(cid);
            if (name == category_names.end()) {
                unknown_categories.push_back(cid);
                continue;
            }
            if (img.category.empty()) img.category = name->second;
        }
        if (auto bb = a.find("bbox"); bb != a.end() && !bb->is_null()) {
            if (!bb->is_array() || bb->size() != 4)
                throw ValidationError("annotation on image '" + image_id + "': bbox must be [x,y,w,h]");
            BoundingBox box{image_id, (*bb)[0].get<double>(), (*bb)[1].get<double>(), (*bb)[2].get<double>(),
                            (*bb)[3].get<double>()};
            validate_box(box, img);
            m.boxes.push_back(std::move(box));
        }
    }
    if (!dangling.empty())
        throw IntegrityError(origin + ": annotations reference missing images: " + detail::join_ids(dangling));
    if (!unknown_categories.empty())
        throw IntegrityError(origin + ": annotations reference undeclared categories: " +
                             detail::join_ids(unknown_categories));
    return m;
}

/// CSV image_id,season. Used to attach seasons to datasets whose metadata lacks them.
inline std::map<std::string, std::string> read_season_map(const std::filesystem::path& path) {
    std::map<std::string, std::string> out;
    for (auto& row : csv::expect_header(csv::read_file(path), {"image_id", "season"}, path.string()))
        out[row[0]] = row[1];
    return out;
}

inline Manifest parse_manifest(const std::filesystem::path& path,
                               const std::map<std::string, std::string>& season_map = {}) {
    if (!std::filesystem::exists(path)) throw ConfigError("manifest not found: " + path.string());
    return parse_manifest_text(csv::read_text(path), path.string(), season_map);
}

/// Writes the manifest back in COCO Camera Traps layout. Category ids are assigned in sorted-name order.
inline std::string serialize_manifest(const Manifest& m) {
    std::map<std::string, int> category_ids;
    Json cats = Json::array();
    for (const auto& name : m.categories) {
        const int id = static_cast<int>(category_ids.size());
        category_ids[name] = id;
        cats.push_back({{"id", id}, {"name", name}});
    }
    std::unordered_map<std::string, const ImageRecord*> by_id;
    Json images = Json::array();
    for (const auto& r : m.images) {
        by_id[r.image_id] = &r;
        Json j{{"id", r.image_id}, {"file_name", r.file_name}, {"location", r.location_id}};
        if (r.season) j["season"] = *r.season;
        if (r.width) j["width"] = *r.width;
        if (r.height) j["height"] = *r.height;
        if (r.byte_size) j["byte_size"] = *r.byte_size;
        images.push_back(std::move(j));
    }
    auto category_of = [&](const ImageRecord& r) -> Json {
        if (r.category.empty()) return nullptr;
        auto it = category_ids.find(r.category);
        if (it == category_ids.end()) throw IntegrityError("image '" + r.image_id + "' has undeclared category");
        return it->second;
    };
    Json anns = Json::array();
    std::unordered_set<std::string> boxed;
    for (const auto& b : m.boxes) {
        auto it = by_id.find(b.image_id);
        if (it == by_id.end()) throw IntegrityError("box references missing image '" + b.image_id + "'");
        boxed.insert(b.image_id);
        Json a{{"id", anns.size()}, {"image_id", b.image_id}};
        if (Json c = category_of(*it->second); !c.is_null()) a["category_id"] = c;
        a["bbox"] = {b.x, b.y, b.w, b.h};
        anns.push_back(std::move(a));
    }
    for (const auto& r : m.images) {
        if (boxed.count(r.image_id) || r.category.empty()) continue;
        anns.push_back({{"id", anns.size()}, {"image_id", r.image_id}, {"category_id", category_of(r)}});
    }
    Json doc;
    doc["images"] = std::move(images);
    doc["annotations"] = std::move(anns);
    doc["categories"] = std::move(cats);
    return doc.dump(2) + "\n";
}

/// Category decides the label; boxes only matter for the require-bbox exclusion of nonempty images.
inline LabelingResult to_labeled(const Manifest& m, const LabelPolicy& policy) {
    std::unordered_set<std::string> has_box;
    for (const auto& b : m.boxes) has_box.insert(b.image_id);

    LabelingResult out;
    out.set.items.reserve(m.images.size());
    for (const auto& r : m.images) {
        if (r.category.empty()) {
            ++out.excluded_unannotated;
            continue;
        }
        const Label label = policy.empty_categories.count(r.category) ? Label::empty : Label::nonempty;
        if (label == Label::nonempty && policy.require_bbox_for_nonempty && !has_box.count(r.image_id)) {
            ++out.excluded_without_bbox;
            continue;
        }
        out.set.items.push_back({r.image_id, label, r.location_id, r.season});
    }
    return out;
}

inline LabelSummary summarize(const LabeledSet& set) {
    LabelSummary s;
    for (const auto& it : set.items) {
        auto& loc = s.per_location[it.location_id];
        if (it.label == Label::empty) {
            ++s.overall.empty;
            ++loc.empty;
        } else {
            ++s.overall.nonempty;
            ++loc.nonempty;
        }
    }
    return s;
}

inline Json to_json(const LabelSummary& s) {
    Json per = Json::object();
    for (const auto& [loc, c] : s.per_location) per[loc] = {{"empty", c.empty}, {"nonempty", c.nonempty}};
    return {{"empty", s.overall.empty}, {"nonempty", s.overall.nonempty}, {"total", s.overall.total()},
            {"per_location", std::move(per)}};
}

inline const csv::Row& labeled_csv_header() {
    static const csv::Row header{"image_id", "label", "location", "season"};
    return header;
}

inline std::string labeled_to_csv(const LabeledSet& set) {
    std::string out = csv::format_row(labeled_csv_header());
    for (const auto& it : set.items)
        out += csv::format_row({it.image_id, to_string(it.label), it.location_id, it.season.value_or("")});
    return out;
}

/// An empty season field reads back as "no season".
inline LabeledSet labeled_from_csv(const std::string& text, const std::string& origin = "labels") {
    LabeledSet set;
    std::unordered_set<std::string> seen;
    for (auto& row : csv::expect_header(csv::parse(text), labeled_csv_header(), origin)) {
        if (!seen.insert(row[0]).second) throw IntegrityError(origin + ": duplicate image id '" + row[0] + "'");
        LabeledItem it{row[0], parse_label(row[1]), row[2], std::nullopt};
        if (!row[3].empty()) it.season = row[3];
        set.items.push_back(std::move(it));
    }
    return set;
}

inline void write_labeled(const std::filesystem::path& path, const LabeledSet& set) {
    csv::write_text(path, labeled_to_csv(set));
}

inline LabeledSet read_labeled(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("labels not found: " + path.string());
    return labeled_from_csv(csv::read_text(path), path.string());
}

} // namespace trapsift
