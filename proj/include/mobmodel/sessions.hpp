#ifndef MOBMODEL_SESSIONS_HPP
#define MOBMODEL_SESSIONS_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mobmodel/errors.hpp"
#include "mobmodel/hierarchy.hpp"
#include "mobmodel/sample.hpp"

namespace mobmodel {

/// One visit of one user to a region: in-region samples mapped to zones,
/// bounded by out-of-region samples or by inter-sample gaps reaching the
/// threshold.
struct Session {
  std::string user_id;
  RegionId region;

  struct Entry {
    std::int64_t timestamp = 0;
    std::string zone;
  };
  std::vector<Entry> entries;

  std::int64_t start() const { return entries.front().timestamp; }
  std::int64_t end() const { return entries.back().timestamp; }
  std::int64_t duration() const { return end() - start(); }
};

/// Cut a user's in-region sample stream into sessions.
///
/// Boundary rules: a sample outside the region closes the open session (a new
/// one opens only at the next in-region sample); a gap of `threshold` minutes
/// or more between consecutive samples closes it as well. When a user carries
/// two samples at the same timestamp, the first in (user, timestamp, ap) sort
/// order wins and the rest of that timestamp is ignored.
inline std::vector<Session> split_sessions(const SampleStore& store, const RegionSpec& region,
                                           double threshold_minutes) {
  if (threshold_minutes <= 0) throw UsageError("session threshold must be positive");
  const double gap_limit_s = threshold_minutes * 60.0;

  std::vector<Session> sessions;
  Session current;
  bool open = false;
  auto close = [&] {
    if (open && !current.entries.empty()) sessions.push_back(std::move(current));
    current = Session{};
    open = false;
  };

  for (const auto& [begin, end] : store.user_ranges()) {
    close();
    std::int64_t prev_ts = -1;
    for (std::size_t i = begin; i < end; ++i) {
      const Sample& s = store.samples[i];
      if (s.timestamp == prev_ts) continue;  // simultaneous probe, first one won
      prev_ts = s.timestamp;

      const auto zone = region.zone_of(s.ap_id);
      if (!zone) {
        close();
        continue;
      }
      if (open && static_cast<double>(s.timestamp - current.entries.back().timestamp) >=
                      gap_limit_s)
        close();
      if (!open) {
        current.user_id = s.user_id;
        current.region = region.id;
        open = true;
      }
      current.entries.push_back({s.timestamp, *zone});
    }
    close();
  }
  return sessions;
}

/// Keep the first sample, the first sample of each run of equal zones, and
/// the last sample. The result is the handoff trace: consecutive entries have
/// distinct zones, except that the final entry may repeat the previous zone
/// to mark the session end.
inline Session filter_handoffs(const Session& session) {
  if (session.entries.empty()) throw DataError("cannot filter an empty session");
  Session out;
  out.user_id = session.user_id;
  out.region = session.region;
  const auto& e = session.entries;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const bool run_start = i == 0 || e[i].zone != e[i - 1].zone;
    const bool last = i + 1 == e.size();
    if (run_start || last) out.entries.push_back(e[i]);
  }
  return out;
}

struct ThresholdSweepResult {
  struct Row {
    double threshold_minutes = 0;
    std::size_t n_sessions = 0;
    double avg_session_time_s = 0;
    double distance = 0;
  };
  std::vector<Row> rows;
  double chosen_minutes = 0;
  /// Set when the grid has one point or a metric is constant, making the
  /// min-max normalization degenerate (the affected metric contributes 0).
  bool degenerate_normalization = false;
};

inline std::vector<double> default_sweep_grid() {
  std::vector<double> grid;
  for (int m = 1; m <= 60; ++m) grid.push_back(m);
  return grid;
}

/// Normalize the two metric series of precomputed sweep rows to [0,1] and
/// choose the threshold whose point lies closest to the origin (ties go to
/// the smaller threshold). The normalization makes the choice invariant under
/// positive affine rescaling of either raw metric.
inline ThresholdSweepResult finalize_sweep(std::vector<ThresholdSweepResult::Row> rows) {
  if (rows.empty()) throw UsageError("threshold grid is empty");
  ThresholdSweepResult result;
  result.rows = std::move(rows);

  auto normalized = [&](auto metric) {
    double lo = metric(result.rows.front());
    double hi = lo;
    for (const auto& r : result.rows) {
      lo = std::min(lo, metric(r));
      hi = std::max(hi, metric(r));
    }
    std::vector<double> out(result.rows.size(), 0.0);
    if (hi - lo <= 0) {
      result.degenerate_normalization = true;
      return out;
    }
    for (std::size_t i = 0; i < result.rows.size(); ++i)
      out[i] = (metric(result.rows[i]) - lo) / (hi - lo);
    return out;
  };
  const auto n_hat =
      normalized([](const ThresholdSweepResult::Row& r) { return static_cast<double>(r.n_sessions); });
  const auto t_hat =
      normalized([](const ThresholdSweepResult::Row& r) { return r.avg_session_time_s; });

  std::size_t best = 0;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    result.rows[i].distance = std::sqrt(n_hat[i] * n_hat[i] + t_hat[i] * t_hat[i]);
    if (result.rows[i].distance < result.rows[best].distance) best = i;
  }
  result.chosen_minutes = result.rows[best].threshold_minutes;
  if (result.rows.size() == 1) result.degenerate_normalization = true;
  return result;
}

/// Evaluate session count and mean session length over a threshold grid and
/// pick the balance point (see finalize_sweep).
inline ThresholdSweepResult sweep_threshold(const SampleStore& store, const RegionSpec& region,
                                            const std::vector<double>& grid) {
  if (grid.empty()) throw UsageError("threshold grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1]) throw UsageError("threshold grid must be strictly increasing");

  std::vector<ThresholdSweepResult::Row> rows;
  rows.reserve(grid.size());
  for (double threshold : grid) {
    const auto sessions = split_sessions(store, region, threshold);
    double total = 0;
    for (const auto& s : sessions) total += static_cast<double>(s.duration());
    ThresholdSweepResult::Row row;
    row.threshold_minutes = threshold;
    row.n_sessions = sessions.size();
    row.avg_session_time_s = sessions.empty() ? 0.0 : total / static_cast<double>(sessions.size());
    rows.push_back(row);
  }
  return finalize_sweep(std::move(rows));
}

inline void write_sweep_csv(std::ostream& out, const ThresholdSweepResult& sweep) {
  out << "threshold,n_sessions,avg_time_s,distance\n";
  char buf[64];
  auto num = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
  };
  for (const auto& r : sweep.rows) {
    num(r.threshold_minutes);
    out << ',' << r.n_sessions << ',';
    num(r.avg_session_time_s);
    out << ',';
    num(r.distance);
    out << '\n';
  }
}

}  // namespace mobmodel

#endif  // MOBMODEL_SESSIONS_HPP
