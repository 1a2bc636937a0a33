#ifndef MOBMODEL_MODEL_HPP
#define MOBMODEL_MODEL_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobmodel/errors.hpp"
#include "mobmodel/hierarchy.hpp"
#include "mobmodel/profiling.hpp"
#include "mobmodel/sessions.hpp"

namespace mobmodel {

/// Row-stochastic matrix over a region's zones plus the virtual states IN
/// (session start) and OUT (session end). State order: IN, OUT, then the
/// region's zones in layout order.
class TransitionMatrix {
public:
  static constexpr std::size_t kIn = 0;
  static constexpr std::size_t kOut = 1;
  static constexpr std::size_t kZoneBase = 2;

  TransitionMatrix() = default;
  explicit TransitionMatrix(std::vector<std::string> zone_labels)
      : zones_(std::move(zone_labels)), cells_(size() * size(), 0.0) {}

  std::size_t n_zones() const { return zones_.size(); }
  std::size_t size() const { return zones_.size() + 2; }
  const std::vector<std::string>& zone_labels() const { return zones_; }

  std::vector<std::string> state_labels() const {
    std::vector<std::string> s{"IN", "OUT"};
    s.insert(s.end(), zones_.begin(), zones_.end());
    return s;
  }
  std::string state_label(std::size_t i) const {
    if (i == kIn) return "IN";
    if (i == kOut) return "OUT";
    return zones_[i - kZoneBase];
  }

  double at(std::size_t from, std::size_t to) const { return cells_[from * size() + to]; }
  double& at(std::size_t from, std::size_t to) { return cells_[from * size() + to]; }

  double row_sum(std::size_t from) const {
    double sum = 0;
    for (std::size_t j = 0; j < size(); ++j) sum += at(from, j);
    return sum;
  }

  /// Scale a row so it sums to 1. Rows with no mass are made absorbing
  /// (one-hot on OUT), keeping the chain well formed.
  void normalize_row(std::size_t from) {
    const double sum = row_sum(from);
    if (sum > 0) {
      for (std::size_t j = 0; j < size(); ++j) at(from, j) /= sum;
    } else if (from != kOut) {
      at(from, kOut) = 1.0;
    }
  }

  void validate(double row_sum_tol, const std::string& context = "") const {
    const std::string where = context.empty() ? "" : context + ": ";
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = 0; j < size(); ++j) {
        const double v = at(i, j);
        if (!(v >= 0.0 && v <= 1.0 + 1e-12) || !std::isfinite(v))
          throw ValidationError(where + "entry (" + state_label(i) + " -> " + state_label(j) +
                                ") = " + std::to_string(v) + " is outside [0, 1]");
      }
      if (at(i, kIn) != 0.0)
        throw ValidationError(where + "column IN must be zero, row '" + state_label(i) +
                              "' violates it");
    }
    if (at(kIn, kOut) != 0.0)
      throw ValidationError(where + "IN -> OUT must be zero (models exclude empty sessions)");
    for (std::size_t j = 0; j < size(); ++j)
      if (at(kOut, j) != 0.0)
        throw ValidationError(where + "OUT row must be all zeros");
    for (std::size_t i = 0; i < size(); ++i) {
      if (i == kOut) continue;
      const double sum = row_sum(i);
      if (std::abs(sum - 1.0) > row_sum_tol)
        throw ValidationError(where + "row '" + state_label(i) + "' sums to " +
                              std::to_string(sum) + ", expected 1 within " +
                              std::to_string(row_sum_tol));
    }
  }

private:
  std::vector<std::string> zones_;
  std::vector<double> cells_;
};

/// Average dwell per zone, seconds. Zones never visited hold 0.
struct TimeVector {
  std::vector<double> seconds;
};

/// One user type: how its sessions move between zones and how long they stay.
struct ClusterModel {
  TransitionMatrix matrix;
  TimeVector times;
  double popularity = 0;  // fraction of sessions of this type
};

struct Provenance {
  double threshold_minutes = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t restarts = 0;
  std::string dataset_digest;
  std::size_t n_sessions = 0;
  double mean_interarrival_s = 0;  // observation window / session count
};

struct MobilityModel {
  RegionId region;
  std::vector<std::string> zone_labels;
  std::vector<ClusterModel> clusters;
  Provenance provenance;

  std::size_t n_zones() const { return zone_labels.size(); }

  void validate(double row_sum_tol = 1e-6) const {
    if (clusters.empty()) throw ValidationError("model has no clusters");
    double pop = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const std::string ctx = "cluster " + std::to_string(c);
      if (clusters[c].matrix.zone_labels() != zone_labels)
        throw ValidationError(ctx + ": matrix states do not match the model's zone labels");
      clusters[c].matrix.validate(row_sum_tol, ctx);
      if (clusters[c].times.seconds.size() != zone_labels.size())
        throw ValidationError(ctx + ": time vector length " +
                              std::to_string(clusters[c].times.seconds.size()) +
                              " does not match " + std::to_string(zone_labels.size()) +
                              " zones");
      for (double t : clusters[c].times.seconds)
        if (!(t >= 0.0) || !std::isfinite(t))
          throw ValidationError(ctx + ": negative or non-finite stay time");
      if (!(clusters[c].popularity >= 0.0 && clusters[c].popularity <= 1.0))
        throw ValidationError(ctx + ": popularity outside [0, 1]");
      pop += clusters[c].popularity;
    }
    if (std::abs(pop - 1.0) > 1e-9)
      throw ValidationError("cluster popularities sum to " + std::to_string(pop) +
                            ", expected 1 within 1e-9");
  }
};

namespace detail {

struct SessionPath {
  std::vector<std::size_t> zones;        // visited zone indices, consecutive distinct
  std::vector<std::int64_t> enter_time;  // entry timestamp of each visit
  std::int64_t end = 0;                  // session end timestamp
};

// Collapse a session's entries into visits. The final entry only marks the
// session end when it repeats the zone it is in.
inline SessionPath session_path(const Session& session, const RegionSpec& region) {
  SessionPath path;
  for (const auto& e : session.entries) {
    const auto z = [&]() -> std::size_t {
      const auto& labels = region.zone_labels();
      const auto it = std::find(labels.begin(), labels.end(), e.zone);
      if (it == labels.end())
        throw ValidationError("session entry references unknown zone '" + e.zone + "'");
      return static_cast<std::size_t>(it - labels.begin());
    }();
    if (path.zones.empty() || path.zones.back() != z) {
      path.zones.push_back(z);
      path.enter_time.push_back(e.timestamp);
    }
  }
  path.end = session.end();
  return path;
}

}  // namespace detail

/// Count handoffs across one cluster's sessions into a transition matrix and
/// a stay-time vector. Row i is the distribution of where departures from i
/// go; the IN row is the distribution of entry zones; a_{i,OUT} is the share
/// of departures from i that end the session. Zones never visited become
/// absorbing (one-hot on OUT).
inline std::pair<TransitionMatrix, TimeVector> build_cluster_model(
    const std::vector<Session>& sessions, const RegionSpec& region) {
  if (sessions.empty()) throw DataError("cannot build a cluster model from zero sessions");
  const std::size_t n = region.zone_count();
  TransitionMatrix counts(region.zone_labels());
  std::vector<double> dwell(n, 0.0);
  std::vector<std::size_t> visits(n, 0);

  for (const auto& session : sessions) {
    const auto path = detail::session_path(session, region);
    if (path.zones.empty()) continue;
    counts.at(TransitionMatrix::kIn, TransitionMatrix::kZoneBase + path.zones.front()) += 1.0;
    for (std::size_t i = 0; i < path.zones.size(); ++i) {
      const std::size_t from = TransitionMatrix::kZoneBase + path.zones[i];
      const std::int64_t leave =
          i + 1 < path.zones.size() ? path.enter_time[i + 1] : path.end;
      dwell[path.zones[i]] += static_cast<double>(leave - path.enter_time[i]);
      ++visits[path.zones[i]];
      if (i + 1 < path.zones.size())
        counts.at(from, TransitionMatrix::kZoneBase + path.zones[i + 1]) += 1.0;
      else
        counts.at(from, TransitionMatrix::kOut) += 1.0;
    }
  }

  for (std::size_t i = 0; i < counts.size(); ++i)
    if (i != TransitionMatrix::kOut) counts.normalize_row(i);

  TimeVector times;
  times.seconds.resize(n, 0.0);
  for (std::size_t z = 0; z < n; ++z)
    if (visits[z] > 0) times.seconds[z] = dwell[z] / static_cast<double>(visits[z]);
  return {std::move(counts), std::move(times)};
}

struct BuildConfig {
  std::optional<double> threshold_minutes;  // fixed; otherwise swept over sweep_grid
  std::vector<double> sweep_grid = default_sweep_grid();
  std::optional<std::size_t> k;  // fixed; otherwise chosen by the elbow rule
  std::size_t elbow_k_max = 30;
  std::uint64_t seed = 1;
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
  double tol = 1e-9;
};

struct BuildResult {
  MobilityModel model;
  std::optional<ThresholdSweepResult> sweep;             // present when the threshold was swept
  std::vector<std::pair<std::size_t, double>> elbow_points;  // present when k was chosen
};

/// The full modeling pipeline for one region: sessionization (threshold fixed
/// or swept), handoff filtering, zone-probability profiling, k-means user
/// typing (k fixed or from the elbow), and per-cluster matrix/vector
/// construction. Zero-duration sessions cannot be profiled and are dropped.
inline BuildResult build_mobility_model(const SampleStore& store, const RegionSpec& region,
                                        const BuildConfig& config = {}) {
  BuildResult out;
  double threshold = 0;
  if (config.threshold_minutes) {
    threshold = *config.threshold_minutes;
  } else {
    out.sweep = sweep_threshold(store, region, config.sweep_grid);
    threshold = out.sweep->chosen_minutes;
  }

  std::vector<Session> sessions;
  for (auto& s : split_sessions(store, region, threshold)) {
    Session filtered = filter_handoffs(s);
    if (filtered.duration() > 0) sessions.push_back(std::move(filtered));
  }
  if (sessions.empty())
    throw DataError("region " + region.id.to_string() +
                    ": no usable sessions at threshold " + std::to_string(threshold) +
                    " minutes");

  std::vector<std::vector<double>> points;
  points.reserve(sessions.size());
  for (const auto& s : sessions) points.push_back(session_vector(s, region).probs);

  KmeansParams params{config.seed, config.restarts, config.max_iterations, config.tol};
  Clustering clustering;
  if (config.k) {
    clustering = kmeans(points, *config.k, params);
  } else {
    ElbowCurve curve = elbow(points, config.elbow_k_max, params);
    out.elbow_points = curve.points;
    clustering = std::move(curve.best);
  }

  std::vector<std::vector<Session>> grouped(clustering.k);
  for (std::size_t i = 0; i < sessions.size(); ++i)
    grouped[clustering.assignment[i]].push_back(sessions[i]);

  MobilityModel model;
  model.region = region.id;
  model.zone_labels = region.zone_labels();
  for (std::size_t c = 0; c < clustering.k; ++c) {
    ClusterModel cm;
    std::tie(cm.matrix, cm.times) = build_cluster_model(grouped[c], region);
    cm.popularity = static_cast<double>(grouped[c].size()) / static_cast<double>(sessions.size());
    model.clusters.push_back(std::move(cm));
  }

  std::int64_t first = sessions.front().start(), last = sessions.front().end();
  for (const auto& s : sessions) {
    first = std::min(first, s.start());
    last = std::max(last, s.end());
  }
  model.provenance.threshold_minutes = threshold;
  model.provenance.k = clustering.k;
  model.provenance.seed = config.seed;
  model.provenance.restarts = config.restarts;
  model.provenance.dataset_digest = store.digest();
  model.provenance.n_sessions = sessions.size();
  model.provenance.mean_interarrival_s =
      static_cast<double>(last - first) / static_cast<double>(sessions.size());

  model.validate(1e-6);
  out.model = std::move(model);
  return out;
}

// --- JSON round trip ------------------------------------------------------

inline nlohmann::ordered_json region_to_json(const RegionId& id) {
  nlohmann::ordered_json j;
  j["level"] = id.level;
  j["building"] = id.building ? nlohmann::ordered_json(*id.building) : nullptr;
  j["wing"] = id.wing ? nlohmann::ordered_json(*id.wing) : nullptr;
  return j;
}

inline RegionId region_from_json_id(const nlohmann::ordered_json& j) {
  RegionId id;
  if (!j.is_object() || !j.contains("level") || !j["level"].is_number_integer())
    throw ValidationError("model region: 'level' must be an integer");
  id.level = j["level"].get<int>();
  if (j.contains("building") && !j["building"].is_null())
    id.building = j["building"].get<std::string>();
  if (j.contains("wing") && !j["wing"].is_null()) id.wing = j["wing"].get<std::string>();
  id.check();
  return id;
}

inline nlohmann::ordered_json serialize(const MobilityModel& model) {
  nlohmann::ordered_json j;
  j["region"] = region_to_json(model.region);
  j["zone_labels"] = model.zone_labels;
  j["clusters"] = nlohmann::ordered_json::array();
  for (const auto& c : model.clusters) {
    nlohmann::ordered_json jc;
    jc["popularity"] = c.popularity;
    jc["state_labels"] = c.matrix.state_labels();
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < c.matrix.size(); ++i) {
      auto row = nlohmann::ordered_json::array();
      for (std::size_t jj = 0; jj < c.matrix.size(); ++jj) row.push_back(c.matrix.at(i, jj));
      rows.push_back(std::move(row));
    }
    jc["matrix"] = std::move(rows);
    jc["time_vector_s"] = c.times.seconds;
    j["clusters"].push_back(std::move(jc));
  }
  nlohmann::ordered_json prov;
  prov["threshold_minutes"] = model.provenance.threshold_minutes;
  prov["k"] = model.provenance.k;
  prov["seed"] = model.provenance.seed;
  prov["restarts"] = model.provenance.restarts;
  prov["dataset_digest"] = model.provenance.dataset_digest;
  prov["n_sessions"] = model.provenance.n_sessions;
  prov["mean_interarrival_s"] = model.provenance.mean_interarrival_s;
  j["provenance"] = std::move(prov);
  return j;
}

/// Rebuild a model from its JSON form, enforcing every invariant. The row-sum
/// tolerance is 1e-6 for machine-produced documents; hand-transcribed
/// reference fixtures round probabilities to a few digits and are accepted at
/// a looser tolerance chosen by the caller.
inline MobilityModel deserialize(const nlohmann::ordered_json& j, double row_sum_tol = 1e-6) {
  if (!j.is_object() || !j.contains("region") || !j.contains("zone_labels") ||
      !j.contains("clusters"))
    throw ValidationError("model document needs 'region', 'zone_labels' and 'clusters'");

  MobilityModel model;
  model.region = region_from_json_id(j["region"]);
  if (!j["zone_labels"].is_array() || j["zone_labels"].empty())
    throw ValidationError("model 'zone_labels' must be a non-empty array");
  for (const auto& z : j["zone_labels"]) model.zone_labels.push_back(z.get<std::string>());
  const std::size_t n_states = model.zone_labels.size() + 2;

  for (std::size_t c = 0; c < j["clusters"].size(); ++c) {
    const auto& jc = j["clusters"][c];
    const std::string ctx = "cluster " + std::to_string(c);
    if (!jc.contains("matrix") || !jc.contains("time_vector_s") || !jc.contains("popularity"))
      throw ValidationError(ctx + ": needs 'popularity', 'matrix' and 'time_vector_s'");

    ClusterModel cm;
    cm.popularity = jc["popularity"].get<double>();
    cm.matrix = TransitionMatrix(model.zone_labels);
    if (jc.contains("state_labels") &&
        jc["state_labels"].get<std::vector<std::string>>() != cm.matrix.state_labels())
      throw ValidationError(ctx + ": state_labels disagree with zone_labels");
    const auto& rows = jc["matrix"];
    if (!rows.is_array() || rows.size() != n_states)
      throw ValidationError(ctx + ": matrix must have " + std::to_string(n_states) + " rows");
    for (std::size_t i = 0; i < n_states; ++i) {
      if (!rows[i].is_array() || rows[i].size() != n_states)
        throw ValidationError(ctx + ": matrix row '" + cm.matrix.state_label(i) + "' must have " +
                              std::to_string(n_states) + " entries");
      for (std::size_t jj = 0; jj < n_states; ++jj)
        cm.matrix.at(i, jj) = rows[i][jj].get<double>();
    }
    if (!jc["time_vector_s"].is_array() || jc["time_vector_s"].size() != model.zone_labels.size())
      throw ValidationError(ctx + ": time_vector_s must have one entry per zone");
    for (const auto& t : jc["time_vector_s"]) cm.times.seconds.push_back(t.get<double>());
    model.clusters.push_back(std::move(cm));
  }

  if (j.contains("provenance")) {
    const auto& p = j["provenance"];
    auto get_or = [&](const char* key, auto fallback) {
      using T = decltype(fallback);
      return p.contains(key) ? p[key].get<T>() : fallback;
    };
    model.provenance.threshold_minutes = get_or("threshold_minutes", 0.0);
    model.provenance.k = get_or("k", std::size_t{0});
    model.provenance.seed = get_or("seed", std::uint64_t{0});
    model.provenance.restarts = get_or("restarts", std::size_t{0});
    model.provenance.dataset_digest = get_or("dataset_digest", std::string{});
    model.provenance.n_sessions = get_or("n_sessions", std::size_t{0});
    model.provenance.mean_interarrival_s = get_or("mean_interarrival_s", 0.0);
  }

  model.validate(row_sum_tol);
  return model;
}

// --- Chord flow export ----------------------------------------------------

struct ChordFlow {
  std::string from;
  std::string to;
  double probability = 0;
};

struct ChordOptions {
  bool include_in = true;    // IN -> zone entry flows
  bool include_out = false;  // zone -> OUT exit flows
};

/// Flatten a matrix into nonzero flow rows for external chord-diagram
/// renderers.
inline std::vector<ChordFlow> chord_export(const TransitionMatrix& m,
                                           const ChordOptions& options = {}) {
  std::vector<ChordFlow> flows;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i == TransitionMatrix::kOut) continue;
    if (i == TransitionMatrix::kIn && !options.include_in) continue;
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j == TransitionMatrix::kIn) continue;
      if (j == TransitionMatrix::kOut && (!options.include_out || i == TransitionMatrix::kIn))
        continue;
      if (m.at(i, j) > 0.0)
        flows.push_back({m.state_label(i), m.state_label(j), m.at(i, j)});
    }
  }
  return flows;
}

inline void write_chord_csv(std::ostream& out, const std::vector<ChordFlow>& flows) {
  out << "from,to,probability\n";
  char buf[64];
  for (const auto& f : flows) {
    out << f.from << ',' << f.to << ',';
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, f.probability);
    out.write(buf, ptr - buf);
    out << '\n';
  }
}

}  // namespace mobmodel

#endif  // MOBMODEL_MODEL_HPP
