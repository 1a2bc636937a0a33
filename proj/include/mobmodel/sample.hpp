#ifndef MOBMODEL_SAMPLE_HPP
#define MOBMODEL_SAMPLE_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mobmodel/digest.hpp"

namespace mobmodel {

/// One observation: at `timestamp` (integer seconds since epoch) the device
/// `user_id` was associated with access point `ap_id`.
struct Sample {
  std::int64_t timestamp = 0;
  std::string user_id;
  std::string ap_id;

  friend bool operator==(const Sample& a, const Sample& b) {
    return a.timestamp == b.timestamp && a.user_id == b.user_id && a.ap_id == b.ap_id;
  }
};

inline bool sample_order(const Sample& a, const Sample& b) {
  return std::tie(a.user_id, a.timestamp, a.ap_id) <
         std::tie(b.user_id, b.timestamp, b.ap_id);
}

/// Immutable, normalized collection of samples.
/// Invariants: sorted by (user_id, timestamp, ap_id); exact duplicate tuples
/// collapsed; ap_index is exactly the set of ap_ids present.
struct SampleStore {
  std::vector<Sample> samples;
  std::set<std::string> ap_index;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  std::size_t user_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (i == 0 || samples[i].user_id != samples[i - 1].user_id) ++n;
    return n;
  }

  /// Half-open sample ranges, one per user, in user_id order.
  std::vector<std::pair<std::size_t, std::size_t>> user_ranges() const {
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= samples.size(); ++i) {
      if (i == samples.size() || samples[i].user_id != samples[begin].user_id) {
        ranges.emplace_back(begin, i);
        begin = i;
      }
    }
    return ranges;
  }

  /// Stable content fingerprint, recorded in model provenance.
  std::string digest() const {
    Fnv1a64 d;
    for (const auto& s : samples) {
      d.update(std::to_string(s.timestamp));
      d.update("\x1f");
      d.update(s.user_id);
      d.update("\x1f");
      d.update(s.ap_id);
      d.update("\n");
    }
    return d.hex();
  }
};

/// Normalize a batch of samples into a store: sort, drop exact duplicates,
/// rebuild the AP index.
inline SampleStore make_store(std::vector<Sample> samples) {
  std::sort(samples.begin(), samples.end(), sample_order);
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
  SampleStore store;
  for (const auto& s : samples) store.ap_index.insert(s.ap_id);
  store.samples = std::move(samples);
  return store;
}

struct CleaningConfig {
  bool drop_single_connection_users = false;
  std::set<std::string> excluded_ap_ids;
  std::set<std::string> excluded_user_ids;
  /// Inclusive [start, end]; samples inside the window are removed.
  std::optional<std::pair<std::int64_t, std::int64_t>> time_window;
};

/// Remove excluded APs/users/time-window samples, then drop users whose whole
/// remaining record is one sample (when the flag is set). Exclusions run
/// first so the result is a fixed point: cleaning it again changes nothing.
inline SampleStore clean(const SampleStore& store, const CleaningConfig& rules) {
  std::vector<Sample> kept;
  kept.reserve(store.samples.size());
  for (const auto& s : store.samples) {
    if (rules.excluded_ap_ids.count(s.ap_id)) continue;
    if (rules.excluded_user_ids.count(s.user_id)) continue;
    if (rules.time_window && s.timestamp >= rules.time_window->first &&
        s.timestamp <= rules.time_window->second)
      continue;
    kept.push_back(s);
  }
  if (rules.drop_single_connection_users) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& s : kept) ++counts[s.user_id];
    std::vector<Sample> multi;
    multi.reserve(kept.size());
    for (auto& s : kept)
      if (counts[s.user_id] > 1) multi.push_back(std::move(s));
    kept = std::move(multi);
  }
  return make_store(std::move(kept));
}

}  // namespace mobmodel

#endif  // MOBMODEL_SAMPLE_HPP
