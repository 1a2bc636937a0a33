#ifndef MOBMODEL_SYNTH_HPP
#define MOBMODEL_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mobmodel/errors.hpp"
#include "mobmodel/model.hpp"
#include "mobmodel/rng.hpp"
#include "mobmodel/sample.hpp"

namespace mobmodel {

struct GenerationConfig {
  std::size_t n_users = 0;
  /// Mean of the exponential inter-arrival time, seconds. Absent means "use
  /// the source dataset's mean", read from the model provenance.
  std::optional<double> mean_interarrival_s;
  /// Overrides the model's popularity weights when present.
  std::optional<std::vector<double>> type_weights;
  std::uint64_t seed = 1;
  std::int64_t start_time = 0;

  void check(const MobilityModel& model) const {
    if (type_weights) {
      if (type_weights->size() != model.clusters.size())
        throw UsageError("type_weights must have one entry per cluster");
      double sum = 0;
      for (double w : *type_weights) {
        if (w < 0) throw UsageError("type_weights must be non-negative");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw UsageError("type_weights must sum to 1 within 1e-9");
    }
    if (mean_interarrival_s && *mean_interarrival_s <= 0)
      throw UsageError("mean_interarrival_s must be positive");
  }
};

/// One generated user journey, in continuous time relative to arrival.
struct Track {
  std::size_t cluster = 0;
  struct Visit {
    std::size_t zone = 0;     // index into the model's zone_labels
    double enter_offset = 0;  // seconds after arrival
    double dwell = 0;         // seconds spent in the zone
  };
  std::vector<Visit> visits;
  double duration = 0;  // exit offset, seconds after arrival
};

namespace detail {

inline std::size_t sample_row(Rng& rng, const TransitionMatrix& m, std::size_t from,
                              bool allow_out) {
  const std::size_t lo = allow_out ? TransitionMatrix::kOut : TransitionMatrix::kZoneBase;
  double total = 0;
  for (std::size_t j = lo; j < m.size(); ++j) total += m.at(from, j);
  // Scaling by the actual row mass keeps sampling exact for normalized rows
  // and proportional for loosely transcribed ones.
  const double u = rng.uniform01() * total;
  double cum = 0;
  std::size_t last = m.size();
  for (std::size_t j = lo; j < m.size(); ++j) {
    const double w = m.at(from, j);
    if (w <= 0) continue;
    last = j;
    cum += w;
    if (u < cum) return j;
  }
  if (last == m.size())
    throw DataError("transition row '" + m.state_label(from) + "' has no outgoing mass");
  return last;
}

}  // namespace detail

/// Walk one user through the model: sample its type, the entry zone from the
/// IN row, an exponential dwell from the zone's mean stay, and the next zone
/// from the current row, until OUT. A cycle of zero-dwell zones that never
/// reaches OUT aborts the walk (no simulated time can pass there).
inline Track generate_user(const MobilityModel& model, Rng& rng,
                           const std::optional<std::vector<double>>& type_weights = {}) {
  std::vector<double> weights;
  if (type_weights) {
    weights = *type_weights;
  } else {
    weights.reserve(model.clusters.size());
    for (const auto& c : model.clusters) weights.push_back(c.popularity);
  }
  double total = 0;
  for (double w : weights) total += w;
  const std::size_t cluster = sample_weighted(rng, weights, total);
  if (cluster >= model.clusters.size())
    throw DataError("no cluster has positive weight to sample from");

  const ClusterModel& cm = model.clusters[cluster];
  Track track;
  track.cluster = cluster;

  const std::size_t zero_dwell_limit = 10 * cm.matrix.size() + 100;
  std::size_t zero_dwell_run = 0;
  double clock = 0;
  std::size_t state = detail::sample_row(rng, cm.matrix, TransitionMatrix::kIn, false);
  while (state != TransitionMatrix::kOut) {
    const std::size_t zone = state - TransitionMatrix::kZoneBase;
    const double dwell = rng.exponential(cm.times.seconds[zone]);
    track.visits.push_back({zone, clock, dwell});
    clock += dwell;
    zero_dwell_run = dwell > 0 ? 0 : zero_dwell_run + 1;
    if (zero_dwell_run > zero_dwell_limit)
      throw DataError("generation aborted: the model cycles through zero-stay zones "
                      "without reaching OUT (cluster " + std::to_string(cluster) + ")");
    state = detail::sample_row(rng, cm.matrix, state, true);
  }
  track.duration = clock;
  return track;
}

struct SyntheticTrace {
  std::vector<Sample> samples;
  std::size_t aborted_users = 0;  // walks cut short by the zero-dwell guard
  std::vector<std::string> diagnostics;
};

/// Generate a full trace log: user arrivals follow a Poisson process, each
/// user walks the model on its own RNG substream (reproducible regardless of
/// generation order), and each visit becomes a sample at its zone-entry
/// instant plus one final sample repeating the last zone at exit time.
/// Timestamps are whole seconds; consecutive samples of a user are kept at
/// least one second apart so per-user order is strict and the trace feeds
/// back through the ingest pipeline unchanged.
inline SyntheticTrace generate_trace(const MobilityModel& model, const GenerationConfig& config) {
  config.check(model);
  model.validate(1e-2);  // accepts loosely transcribed reference models
  double mean_arrival = config.mean_interarrival_s
                            ? *config.mean_interarrival_s
                            : model.provenance.mean_interarrival_s;
  if (config.n_users > 0 && mean_arrival <= 0)
    throw UsageError("no inter-arrival mean: pass one or use a model whose provenance has it");

  Rng master(config.seed);
  Rng arrival_rng = master.substream(0);

  SyntheticTrace trace;
  const int id_width = std::max<int>(6, static_cast<int>(std::to_string(config.n_users).size()));
  double arrival_clock = static_cast<double>(config.start_time);

  for (std::size_t u = 0; u < config.n_users; ++u) {
    arrival_clock += arrival_rng.exponential(mean_arrival);
    Rng user_rng = master.substream(u + 1);
    Track track;
    try {
      track = generate_user(model, user_rng, config.type_weights);
    } catch (const DataError& e) {
      ++trace.aborted_users;
      if (trace.diagnostics.size() < 16)
        trace.diagnostics.push_back("user " + std::to_string(u) + ": " + e.what());
      continue;
    }
    if (track.visits.empty()) continue;

    std::string user_id = std::to_string(u);
    user_id = "u" + std::string(static_cast<std::size_t>(id_width) - user_id.size(), '0') +
              user_id;

    std::int64_t prev_ts = std::numeric_limits<std::int64_t>::min();
    auto emit = [&](double at, const std::string& zone_label) {
      std::int64_t ts = std::llround(at);
      if (ts <= prev_ts) ts = prev_ts + 1;
      prev_ts = ts;
      trace.samples.push_back({ts, user_id, zone_label});
    };
    for (const auto& visit : track.visits)
      emit(arrival_clock + visit.enter_offset, model.zone_labels[visit.zone]);
    emit(arrival_clock + track.duration, model.zone_labels[track.visits.back().zone]);
  }

  std::sort(trace.samples.begin(), trace.samples.end(),
            [](const Sample& a, const Sample& b) {
              return std::tie(a.timestamp, a.user_id, a.ap_id) <
                     std::tie(b.timestamp, b.user_id, b.ap_id);
            });
  return trace;
}

/// Region lens for re-ingesting a synthetic trace: one zone per zone label,
/// the label doubling as the AP id (exactly what generate_trace emits).
inline RegionSpec trace_region(const MobilityModel& model) {
  RegionSpec region;
  region.id = model.region;
  for (const auto& label : model.zone_labels) region.add_zone(label, {label});
  region.validate();
  return region;
}

}  // namespace mobmodel

#endif  // MOBMODEL_SYNTH_HPP
