#ifndef MOBMODEL_TESTS_FIXTURES_HPP
#define MOBMODEL_TESTS_FIXTURES_HPP

// Shared fixtures: hierarchy documents, hand-transcribed reference models,
// and randomized stores for property tests.

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobmodel/mobmodel.hpp"

namespace fixtures {

using nlohmann::ordered_json;

// --- Hierarchy documents ----------------------------------------------------

inline ordered_json region_doc(int level, const char* building, const char* wing) {
  ordered_json j;
  j["region"]["level"] = level;
  j["region"]["building"] = building ? ordered_json(building) : nullptr;
  j["region"]["wing"] = wing ? ordered_json(wing) : nullptr;
  j["zones"] = ordered_json::object();
  return j;
}

inline std::vector<std::string> ap_names(const std::string& prefix, int count, int first = 1) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) {
    std::string n = std::to_string(first + i);
    if (n.size() < 2) n = "0" + n;
    out.push_back(prefix + n);
  }
  return out;
}

inline const std::vector<std::pair<std::string, int>>& campus_buildings() {
  // 18 buildings, 425 APs in total.
  static const std::vector<std::pair<std::string, int>> b = {
      {"bldg_AT", 36}, {"bldg_CEP", 14}, {"bldg_CJ", 7},  {"bldg_CL", 1},
      {"bldg_CTI", 9}, {"bldg_EIV", 11}, {"bldg_GC", 35}, {"bldg_IE", 7},
      {"bldg_ITD", 16}, {"bldg_JO", 63}, {"bldg_MA", 43}, {"bldg_MEN", 8},
      {"bldg_MO", 52}, {"bldg_RES", 18}, {"bldg_RL", 42}, {"bldg_SCT", 27},
      {"bldg_SE", 8},  {"bldg_SL", 28}};
  return b;
}

inline std::string wing_ap_prefix(const std::string& building) {
  return "AP-" + building.substr(5) + "-";
}

/// Three-document hierarchy: the campus at level 0, one building split into
/// six floor/wing zones, and one wing split into single-AP zones. The wing's
/// APs carry the AP-OO-03-* names used throughout the reference models.
inline std::vector<ordered_json> three_level_docs() {
  ordered_json lv0 = region_doc(0, nullptr, nullptr);
  for (const auto& [name, count] : campus_buildings()) {
    if (name == "bldg_AT") continue;  // added below with wing-consistent APs
    lv0["zones"][name] = ap_names(wing_ap_prefix(name), count);
  }

  ordered_json lv1 = region_doc(1, "bldg_AT", nullptr);
  lv1["zones"]["basement_fl"] = ap_names("AP-AT-B-", 3);
  lv1["zones"]["0_fl_North"] = ap_names("AP-AT-0N-", 7);
  lv1["zones"]["0_fl_East"] = ap_names("AP-OO-03-", 6);
  lv1["zones"]["1st_fl_East"] = ap_names("AP-AT-1E-", 6);
  lv1["zones"]["1st_fl_North"] = ap_names("AP-AT-1N-", 7);
  lv1["zones"]["2nd_fl"] = ap_names("AP-AT-2-", 3);

  std::vector<std::string> at_aps;
  for (const auto& [label, aps] : lv1["zones"].items())
    for (const auto& ap : aps) at_aps.push_back(ap.get<std::string>());
  lv0["zones"]["bldg_AT"] = at_aps;

  ordered_json lv2 = region_doc(2, "bldg_AT", "0_fl_East");
  for (const auto& ap : ap_names("AP-OO-03-", 6))
    lv2["zones"][ap] = std::vector<std::string>{ap};

  return {lv0, lv1, lv2};
}

/// Full campus-shaped tree: 1 level-0 region, 18 level-1 regions, 74 level-2
/// regions (the 1-AP building needs no wings).
inline std::vector<ordered_json> campus_docs() {
  static const std::vector<std::pair<std::string, int>> wings_per_building = {
      {"bldg_AT", 6},  {"bldg_CEP", 3}, {"bldg_CJ", 2},  {"bldg_CL", 0},
      {"bldg_CTI", 2}, {"bldg_EIV", 2}, {"bldg_GC", 6},  {"bldg_IE", 2},
      {"bldg_ITD", 3}, {"bldg_JO", 10}, {"bldg_MA", 7},  {"bldg_MEN", 2},
      {"bldg_MO", 8},  {"bldg_RES", 3}, {"bldg_RL", 7},  {"bldg_SCT", 4},
      {"bldg_SE", 2},  {"bldg_SL", 5}};

  std::vector<ordered_json> docs;
  ordered_json lv0 = region_doc(0, nullptr, nullptr);
  for (const auto& [name, count] : campus_buildings())
    lv0["zones"][name] = ap_names(wing_ap_prefix(name), count);
  docs.push_back(lv0);

  for (std::size_t b = 0; b < campus_buildings().size(); ++b) {
    const auto& [name, count] = campus_buildings()[b];
    const int wings = wings_per_building[b].second;
    const auto aps = ap_names(wing_ap_prefix(name), count);

    ordered_json lv1 = region_doc(1, name.c_str(), nullptr);
    if (wings == 0) {
      lv1["zones"]["wing_0"] = aps;
      docs.push_back(lv1);
      continue;
    }
    int next = 0;
    for (int w = 0; w < wings; ++w) {
      const int take = count / wings + (w < count % wings ? 1 : 0);
      std::vector<std::string> slice(aps.begin() + next, aps.begin() + next + take);
      next += take;
      const std::string wing_name = "wing_" + std::to_string(w);
      lv1["zones"][wing_name] = slice;

      ordered_json lv2 = region_doc(2, name.c_str(), wing_name.c_str());
      for (const auto& ap : slice) lv2["zones"][ap] = std::vector<std::string>{ap};
      docs.push_back(lv2);
    }
    docs.insert(docs.end() - wings, lv1);
  }
  return docs;
}

// --- Reference models -------------------------------------------------------
// Hand-transcribed from published figures; probabilities are rounded to a few
// significant digits, so rows only sum to 1 within ~1e-2 and must be loaded
// with the loose row-sum tolerance. Two entries in the source were missing
// their leading "0.00" and are restored here (0.0025, 0.0058) so the rows
// normalize.

inline ordered_json model_json(const char* region, const std::vector<std::string>& zones,
                               const std::vector<std::vector<double>>& matrix,
                               const std::vector<double>& time_minutes) {
  ordered_json j;
  j["region"]["level"] = region[2] - '0';
  j["region"]["building"] = nullptr;
  j["region"]["wing"] = nullptr;
  if (std::string(region) == "lv1") j["region"]["building"] = "bldg_AT";
  if (std::string(region) == "lv2") {
    j["region"]["building"] = "bldg_AT";
    j["region"]["wing"] = "0_fl_East";
  }
  j["zone_labels"] = zones;
  ordered_json cluster;
  cluster["popularity"] = 1.0;
  std::vector<std::string> states{"IN", "OUT"};
  states.insert(states.end(), zones.begin(), zones.end());
  cluster["state_labels"] = states;
  cluster["matrix"] = matrix;
  std::vector<double> seconds;
  for (double m : time_minutes) seconds.push_back(m * 60.0);
  cluster["time_vector_s"] = seconds;
  j["clusters"] = ordered_json::array({cluster});
  return j;
}

/// 13-building campus profile (the buildings this user type never touches are
/// not part of the layout).
inline ordered_json campus_profile_json() {
  const std::vector<std::string> zones = {
      "bldg_AT", "bldg_CEP", "bldg_CJ", "bldg_GC", "bldg_IE", "bldg_ITD", "bldg_JO",
      "bldg_MA", "bldg_MO", "bldg_RES", "bldg_RL", "bldg_SCT", "bldg_SL"};
  const std::vector<std::vector<double>> m = {
      // IN, OUT, AT, CEP, CJ, GC, IE, ITD, JO, MA, MO, RES, RL, SCT, SL
      {0, 0, 0.0033, 0, 0, 0.0033, 0.0042, 0, 0.0025, 0.0017, 0.0042, 0.9791, 0, 0, 0.0017},
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
      {0, 0.364, 0, 0, 0, 0, 0, 0.091, 0, 0.273, 0, 0.273, 0, 0, 0},
      {0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
      {0, 0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0.5, 0, 0, 0, 0},
      {0, 0.333, 0, 0, 0, 0, 0, 0, 0, 0, 0.0667, 0.4, 0.0667, 0.0667, 0.0667},
      {0, 0.2069, 0, 0, 0.0345, 0, 0, 0, 0.069, 0, 0, 0.69, 0, 0, 0},
      {0, 0.5, 0, 0, 0, 0.25, 0, 0, 0, 0, 0, 0.25, 0, 0, 0},
      {0, 0.364, 0, 0, 0, 0, 0, 0, 0, 0.0909, 0, 0.545, 0, 0, 0},
      {0, 0.182, 0.273, 0, 0, 0, 0.091, 0, 0.091, 0, 0, 0.364, 0, 0, 0},
      {0, 0.5, 0, 0, 0, 0.143, 0, 0, 0, 0, 0, 0.286, 0.0714, 0, 0},
      {0, 0.952, 0.0033, 0.0025, 0.0008, 0.0057, 0.019, 0.0025, 0.0041, 0.0041, 0.0041, 0,
       0.0025, 0, 0},
      {0, 0.2, 0, 0, 0, 0.2, 0, 0, 0, 0, 0.2, 0.4, 0, 0, 0},
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0},
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0}};
  const std::vector<double> minutes = {53.32, 40.48, 1.01, 27.46, 14.07, 5.62, 17.2,
                                       28.5, 19.89, 89.59, 77.22, 9.08, 9.17};
  return model_json("lv0", zones, m, minutes);
}

/// Floor/wing profile of one building.
inline ordered_json building_profile_json() {
  const std::vector<std::string> zones = {"1st_fl_East", "1st_fl_North", "0_fl_East",
                                          "0_fl_North", "2nd_fl"};
  const std::vector<std::vector<double>> m = {
      // IN, OUT, 1E, 1N, 0E, 0N, 2nd
      {0, 0, 0.0364, 0.0182, 0.0364, 0, 0.909},
      {0, 0, 0, 0, 0, 0, 0},
      {0, 0.4, 0, 0, 0, 0, 0.6},
      {0, 0.286, 0, 0, 0, 0, 0.714},
      {0, 0.25, 0, 0, 0, 0, 0.75},
      {0, 0.5, 0, 0, 0, 0, 0.5},
      {0, 0.568, 0.243, 0.081, 0.081, 0.027, 0}};
  const std::vector<double> minutes = {6.92, 15.03, 14.93, 6.23, 51.85};
  return model_json("lv1", zones, m, minutes);
}

/// Single-AP-zone profile of one wing; two APs are exit-only with zero stay.
inline ordered_json wing_profile_json() {
  const std::vector<std::string> zones = {"AP-OO-03-01", "AP-OO-03-02", "AP-OO-03-03",
                                          "AP-OO-03-04", "AP-OO-03-05", "AP-OO-03-06"};
  const std::vector<std::vector<double>> m = {
      // IN, OUT, 01, 02, 03, 04, 05, 06
      {0, 0, 0.0058, 0.953, 0.035, 0.0058, 0, 0},
      {0, 0, 0, 0, 0, 0, 0, 0},
      {0, 0.75, 0, 0, 0.25, 0, 0, 0},
      {0, 0.825, 0.0164, 0, 0.104, 0.027, 0.016, 0.011},
      {0, 0.333, 0, 0.667, 0, 0, 0, 0},
      {0, 0.5, 0, 0.333, 0.167, 0, 0, 0},
      {0, 1, 0, 0, 0, 0, 0, 0},
      {0, 1, 0, 0, 0, 0, 0, 0}};
  const std::vector<double> minutes = {4.6, 32.4, 6.35, 8.58, 0, 0};
  return model_json("lv2", zones, m, minutes);
}

inline mobmodel::MobilityModel campus_profile_model() {
  return mobmodel::deserialize(campus_profile_json(), 1e-2);
}
inline mobmodel::MobilityModel building_profile_model() {
  return mobmodel::deserialize(building_profile_json(), 1e-2);
}
inline mobmodel::MobilityModel wing_profile_model() {
  return mobmodel::deserialize(wing_profile_json(), 1e-2);
}

// --- Simple regions and randomized stores -----------------------------------

/// Region whose zones are single APs named after the zone.
inline mobmodel::RegionSpec simple_region(const std::vector<std::string>& zones,
                                          mobmodel::RegionId id = {}) {
  mobmodel::RegionSpec region;
  region.id = id;
  for (const auto& z : zones) region.add_zone(z, {z});
  region.validate();
  return region;
}

/// Randomized store over a region's APs plus out-of-region APs, with gaps of
/// all sizes; used by the property tests.
inline mobmodel::SampleStore random_store(mobmodel::Rng& rng, const mobmodel::RegionSpec& region,
                                          std::size_t n_users, std::size_t samples_per_user) {
  std::vector<std::string> aps;
  for (std::size_t z = 0; z < region.zone_count(); ++z)
    for (const auto& ap : region.zone_aps(z)) aps.push_back(ap);
  const std::size_t in_region = aps.size();
  aps.push_back("offsite-1");
  aps.push_back("offsite-2");

  std::vector<mobmodel::Sample> samples;
  for (std::size_t u = 0; u < n_users; ++u) {
    std::int64_t t = static_cast<std::int64_t>(rng.uniform_index(100000));
    for (std::size_t i = 0; i < samples_per_user; ++i) {
      // Mixture of small in-session gaps and occasional large ones.
      t += 30 + static_cast<std::int64_t>(rng.uniform_index(120));
      if (rng.uniform01() < 0.07) t += 1800 + static_cast<std::int64_t>(rng.uniform_index(7200));
      const std::size_t pick = rng.uniform01() < 0.85 ? rng.uniform_index(in_region)
                                                      : in_region + rng.uniform_index(2);
      samples.push_back({t, "user-" + std::to_string(u), aps[pick]});
    }
  }
  return mobmodel::make_store(std::move(samples));
}

}  // namespace fixtures

#endif  // MOBMODEL_TESTS_FIXTURES_HPP
