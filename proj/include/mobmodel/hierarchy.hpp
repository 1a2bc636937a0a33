#ifndef MOBMODEL_HIERARCHY_HPP
#define MOBMODEL_HIERARCHY_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobmodel/errors.hpp"
#include "mobmodel/sample.hpp"

namespace mobmodel {

/// Identifier of a region under study: <level, building, wing>.
/// Level 0 is the whole area, level 1 one building, level 2 one wing.
struct RegionId {
  int level = 0;
  std::optional<std::string> building;
  std::optional<std::string> wing;

  static RegionId area() { return {}; }
  static RegionId of_building(std::string b) { return {1, std::move(b), std::nullopt}; }
  static RegionId of_wing(std::string b, std::string w) {
    return {2, std::move(b), std::move(w)};
  }

  friend bool operator==(const RegionId& a, const RegionId& b) {
    return a.level == b.level && a.building == b.building && a.wing == b.wing;
  }
  friend bool operator<(const RegionId& a, const RegionId& b) {
    return std::tie(a.level, a.building, a.wing) < std::tie(b.level, b.building, b.wing);
  }

  std::string to_string() const {
    std::string out = "lv" + std::to_string(level);
    if (building) out += "/" + *building;
    if (wing) out += "/" + *wing;
    return out;
  }

  /// Filesystem-safe form, used for per-region artifact names.
  std::string file_stem() const {
    std::string out = to_string();
    for (char& c : out)
      if (c == '/') c = '_';
    return out;
  }

  void check() const {
    const bool ok = (level == 0 && !building && !wing) ||
                    (level == 1 && building && !wing) ||
                    (level == 2 && building && wing);
    if (!ok)
      throw ValidationError("region id " + to_string() + ": level " + std::to_string(level) +
                            " does not match the building/wing fields");
  }

  std::optional<RegionId> parent_id() const {
    if (level == 1) return area();
    if (level == 2) return of_building(*building);
    return std::nullopt;
  }

  /// Label of the parent zone this region refines.
  std::optional<std::string> refined_zone() const {
    if (level == 1) return building;
    if (level == 2) return wing;
    return std::nullopt;
  }
};

inline RegionId parse_region_id(const std::string& text) {
  // "lv0", "lv1/bldgAT", "lv2/bldgAT/0flE"
  if (text.rfind("lv", 0) != 0) throw UsageError("bad region id: " + text);
  RegionId id;
  std::size_t slash = text.find('/');
  try {
    id.level = std::stoi(text.substr(2, slash - 2));
  } catch (const std::exception&) {
    throw UsageError("bad region id: " + text);
  }
  if (slash != std::string::npos) {
    std::size_t slash2 = text.find('/', slash + 1);
    id.building = text.substr(slash + 1, slash2 - slash - 1);
    if (slash2 != std::string::npos) id.wing = text.substr(slash2 + 1);
  }
  id.check();
  return id;
}

/// A region and its division into zones. Zone order follows the defining
/// JSON document so matrix layouts are reproducible. Immutable once built;
/// safe to share across threads.
class RegionSpec {
public:
  RegionId id;

  RegionSpec() = default;
  RegionSpec(RegionId rid, std::vector<std::pair<std::string, std::set<std::string>>> zones)
      : id(std::move(rid)) {
    for (auto& [label, aps] : zones) add_zone(label, std::move(aps));
    validate();
  }

  void add_zone(const std::string& label, std::set<std::string> aps) {
    if (zone_index_.count(label))
      throw ValidationError("region " + id.to_string() + ": duplicate zone label '" + label +
                            "'");
    const std::size_t z = labels_.size();
    for (const auto& ap : aps) {
      auto [it, inserted] = ap_to_zone_.emplace(ap, z);
      if (!inserted)
        throw ValidationError("region " + id.to_string() + ": AP '" + ap +
                              "' appears in zones '" + labels_[it->second] + "' and '" + label +
                              "'");
    }
    zone_index_[label] = z;
    labels_.push_back(label);
    ap_sets_.push_back(std::move(aps));
  }

  void validate() const {
    id.check();
    if (labels_.empty()) throw ValidationError("region " + id.to_string() + " defines no zones");
    for (std::size_t z = 0; z < labels_.size(); ++z)
      if (ap_sets_[z].empty())
        throw ValidationError("region " + id.to_string() + ": zone '" + labels_[z] +
                              "' is empty");
  }

  const std::vector<std::string>& zone_labels() const { return labels_; }
  std::size_t zone_count() const { return labels_.size(); }

  const std::set<std::string>& zone_aps(std::size_t index) const { return ap_sets_[index]; }
  const std::set<std::string>& zone_aps(const std::string& label) const {
    return ap_sets_[zone_index_.at(label)];
  }
  bool has_zone(const std::string& label) const { return zone_index_.count(label) != 0; }

  std::set<std::string> ap_union() const {
    std::set<std::string> all;
    for (const auto& aps : ap_sets_) all.insert(aps.begin(), aps.end());
    return all;
  }

  /// The unique zone containing `ap`, or absent when the AP lies outside the
  /// region (which is what terminates sessions).
  std::optional<std::string> zone_of(const std::string& ap) const {
    auto it = ap_to_zone_.find(ap);
    if (it == ap_to_zone_.end()) return std::nullopt;
    return labels_[it->second];
  }

  std::optional<std::size_t> zone_index_of_ap(const std::string& ap) const {
    auto it = ap_to_zone_.find(ap);
    if (it == ap_to_zone_.end()) return std::nullopt;
    return it->second;
  }

  bool is_leaf() const {
    return std::all_of(ap_sets_.begin(), ap_sets_.end(),
                       [](const std::set<std::string>& s) { return s.size() == 1; });
  }

private:
  std::vector<std::string> labels_;
  std::vector<std::set<std::string>> ap_sets_;
  std::unordered_map<std::string, std::size_t> zone_index_;
  std::unordered_map<std::string, std::size_t> ap_to_zone_;
};

/// The loaded geospatial decomposition: every region keyed by id, with parent
/// coverage verified (a child's AP union equals the parent zone it refines).
struct HierarchyTree {
  std::map<RegionId, RegionSpec> regions;

  const RegionSpec& region(const RegionId& id) const {
    auto it = regions.find(id);
    if (it == regions.end())
      throw UsageError("region " + id.to_string() + " is not defined in the hierarchy");
    return it->second;
  }
  bool has_region(const RegionId& id) const { return regions.count(id) != 0; }

  int depth() const {
    int max_level = -1;
    for (const auto& [id, spec] : regions) max_level = std::max(max_level, id.level);
    return max_level + 1;
  }
};

namespace detail {

inline RegionSpec region_from_json(const nlohmann::ordered_json& doc, const std::string& where) {
  if (!doc.is_object() || !doc.contains("region") || !doc.contains("zones"))
    throw ParseError(where + ": hierarchy document needs 'region' and 'zones' keys");
  const auto& header = doc["region"];
  if (!header.is_object() || !header.contains("level") || !header["level"].is_number_integer())
    throw ParseError(where + ": 'region.level' must be an integer");

  RegionId id;
  id.level = header["level"].get<int>();
  if (header.contains("building") && !header["building"].is_null())
    id.building = header["building"].get<std::string>();
  if (header.contains("wing") && !header["wing"].is_null())
    id.wing = header["wing"].get<std::string>();
  id.check();

  if (!doc["zones"].is_object() || doc["zones"].empty())
    throw ParseError(where + ": 'zones' must be a non-empty object");

  RegionSpec spec;
  spec.id = id;
  for (const auto& [label, aps] : doc["zones"].items()) {
    if (!aps.is_array())
      throw ParseError(where + ": zone '" + label + "' must hold an array of AP ids");
    std::set<std::string> ap_set;
    for (const auto& ap : aps) {
      if (!ap.is_string())
        throw ParseError(where + ": zone '" + label + "' holds a non-string AP id");
      if (!ap_set.insert(ap.get<std::string>()).second)
        throw ValidationError("region " + id.to_string() + ": AP '" + ap.get<std::string>() +
                              "' listed twice in zone '" + label + "'");
    }
    spec.add_zone(label, std::move(ap_set));
  }
  spec.validate();
  return spec;
}

inline std::string join_aps(const std::vector<std::string>& aps) {
  std::string out;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    if (i) out += ", ";
    out += aps[i];
  }
  return out;
}

}  // namespace detail

/// Build and validate a HierarchyTree from parsed hierarchy documents.
/// Checks per region: disjoint non-empty zones. Checks across regions:
/// no duplicate ids, parents present, and exact coverage of the refined
/// parent zone (missing/extra APs are listed in the error).
inline HierarchyTree load_hierarchy(const std::vector<nlohmann::ordered_json>& documents) {
  HierarchyTree tree;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    RegionSpec spec = detail::region_from_json(documents[i], "document " + std::to_string(i));
    RegionId id = spec.id;
    if (!tree.regions.emplace(id, std::move(spec)).second)
      throw ValidationError("region " + id.to_string() + " is defined more than once");
  }

  for (const auto& [id, spec] : tree.regions) {
    const auto parent_id = id.parent_id();
    if (!parent_id) continue;
    auto parent_it = tree.regions.find(*parent_id);
    if (parent_it == tree.regions.end())
      throw ValidationError("region " + id.to_string() + " references missing parent " +
                            parent_id->to_string());
    const RegionSpec& parent = parent_it->second;
    const std::string zone = *id.refined_zone();
    if (!parent.has_zone(zone))
      throw ValidationError("region " + id.to_string() + " refines zone '" + zone +
                            "' which parent " + parent_id->to_string() + " does not define");

    const std::set<std::string>& want = parent.zone_aps(zone);
    const std::set<std::string> got = spec.ap_union();
    if (got != want) {
      std::vector<std::string> missing, extra;
      std::set_difference(want.begin(), want.end(), got.begin(), got.end(),
                          std::back_inserter(missing));
      std::set_difference(got.begin(), got.end(), want.begin(), want.end(),
                          std::back_inserter(extra));
      std::string msg =
          "region " + id.to_string() + " does not cover parent zone '" + zone + "' exactly";
      if (!missing.empty()) msg += "; missing: " + detail::join_aps(missing);
      if (!extra.empty()) msg += "; extra: " + detail::join_aps(extra);
      throw ValidationError(msg);
    }
  }
  return tree;
}

inline HierarchyTree load_hierarchy_from_strings(const std::vector<std::string>& texts) {
  std::vector<nlohmann::ordered_json> docs;
  docs.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto doc = nlohmann::ordered_json::parse(texts[i], nullptr, false);
    if (doc.is_discarded())
      throw ParseError("hierarchy document " + std::to_string(i) + " is not valid JSON");
    docs.push_back(std::move(doc));
  }
  return load_hierarchy(docs);
}

/// All regions in modeling order: breadth-first by level, lexicographic by
/// id within a level. Stable across runs on equal input.
inline std::vector<RegionSpec> enumerate_modeling_tasks(const HierarchyTree& tree) {
  std::vector<RegionSpec> tasks;
  tasks.reserve(tree.regions.size());
  for (const auto& [id, spec] : tree.regions) tasks.push_back(spec);
  return tasks;  // map order is already (level, building, wing)
}

/// APs observed in the store that no region of the hierarchy claims. Their
/// samples count as outside-region during sessionization; callers surface
/// them as warnings.
inline std::vector<std::string> unknown_aps(const SampleStore& store, const HierarchyTree& tree) {
  std::set<std::string> known;
  for (const auto& [id, spec] : tree.regions)
    for (const auto& ap : spec.ap_union()) known.insert(ap);
  std::vector<std::string> out;
  for (const auto& ap : store.ap_index)
    if (!known.count(ap)) out.push_back(ap);
  return out;
}

}  // namespace mobmodel

#endif  // MOBMODEL_HIERARCHY_HPP
