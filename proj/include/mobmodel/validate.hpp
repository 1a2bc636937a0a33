#ifndef MOBMODEL_VALIDATE_HPP
#define MOBMODEL_VALIDATE_HPP

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobmodel/errors.hpp"
#include "mobmodel/model.hpp"
#include "mobmodel/synth.hpp"

namespace mobmodel {

namespace detail {

/// Minimum-cost assignment on a square cost matrix (Hungarian algorithm with
/// potentials, O(n^3)). Returns row -> column.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<std::size_t> row_to_col(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(p[j] - 1)] =
      static_cast<std::size_t>(j - 1);
  return row_to_col;
}

inline double frobenius_distance(const TransitionMatrix& a, const TransitionMatrix& b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a.at(i, j) - b.at(i, j);
      acc += d * d;
    }
  return std::sqrt(acc);
}

}  // namespace detail

/// Best bijection between the user types of two models with equal cluster
/// counts and identical zone layout: the assignment minimizing the total
/// Frobenius distance between paired transition matrices.
inline std::vector<std::size_t> map_clusters(const MobilityModel& a, const MobilityModel& b) {
  if (a.clusters.size() != b.clusters.size())
    throw UsageError("cluster mapping needs equal cluster counts (" +
                     std::to_string(a.clusters.size()) + " vs " +
                     std::to_string(b.clusters.size()) + "); force k when re-modeling");
  if (a.zone_labels != b.zone_labels)
    throw UsageError("cluster mapping needs identical zone layouts");

  const std::size_t k = a.clusters.size();
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      cost[i][j] = detail::frobenius_distance(a.clusters[i].matrix, b.clusters[j].matrix);
  return detail::hungarian(cost);
}

struct RmseOptions {
  /// Skip cells that are zero by construction (the IN column, the OUT row and
  /// IN->OUT) when averaging matrix differences.
  bool exclude_structural_zeros = false;
};

struct RmseReport {
  struct ClusterRow {
    std::size_t cluster_a = 0;
    std::size_t cluster_b = 0;
    double matrix_rmse = 0;
    double time_rmse_s = 0;
  };
  std::vector<ClusterRow> clusters;
  std::vector<std::size_t> mapping;

  double matrix_avg = 0, matrix_max = 0;
  double time_avg_s = 0, time_max_s = 0;
  // Percent forms: probabilities against their full range (1.0), stay times
  // against the mean nonzero stay time of the reference model.
  double matrix_avg_pct = 0, matrix_max_pct = 0;
  double time_avg_pct = 0, time_max_pct = 0;
  double time_base_s = 0;
  bool exclude_structural_zeros = false;
};

/// Cell-wise RMSE between mapped cluster pairs: matrices over all
/// (n+2)^2 cells (or the non-structural subset), stay-time vectors over the
/// n zones, in seconds.
inline RmseReport rmse(const MobilityModel& a, const MobilityModel& b,
                       const std::vector<std::size_t>& mapping,
                       const RmseOptions& options = {}) {
  if (mapping.size() != a.clusters.size())
    throw UsageError("mapping size does not match the cluster count");
  if (a.zone_labels != b.zone_labels)
    throw UsageError("rmse needs identical zone layouts");

  RmseReport report;
  report.mapping = mapping;
  report.exclude_structural_zeros = options.exclude_structural_zeros;

  double nonzero_sum = 0;
  std::size_t nonzero_count = 0;
  for (const auto& c : a.clusters)
    for (double t : c.times.seconds)
      if (t > 0) {
        nonzero_sum += t;
        ++nonzero_count;
      }
  report.time_base_s = nonzero_count ? nonzero_sum / static_cast<double>(nonzero_count) : 0;

  for (std::size_t i = 0; i < a.clusters.size(); ++i) {
    const std::size_t j = mapping[i];
    if (j >= b.clusters.size()) throw UsageError("mapping references a missing cluster");
    const auto& ma = a.clusters[i].matrix;
    const auto& mb = b.clusters[j].matrix;
    if (ma.size() != mb.size()) throw UsageError("matrix dimensions differ");

    double acc = 0;
    std::size_t cells = 0;
    for (std::size_t r = 0; r < ma.size(); ++r)
      for (std::size_t c = 0; c < ma.size(); ++c) {
        if (options.exclude_structural_zeros &&
            (c == TransitionMatrix::kIn || r == TransitionMatrix::kOut ||
             (r == TransitionMatrix::kIn && c == TransitionMatrix::kOut)))
          continue;
        const double d = ma.at(r, c) - mb.at(r, c);
        acc += d * d;
        ++cells;
      }
    RmseReport::ClusterRow row;
    row.cluster_a = i;
    row.cluster_b = j;
    row.matrix_rmse = std::sqrt(acc / static_cast<double>(cells));

    const auto& ta = a.clusters[i].times.seconds;
    const auto& tb = b.clusters[j].times.seconds;
    double tacc = 0;
    for (std::size_t z = 0; z < ta.size(); ++z) {
      const double d = ta[z] - tb[z];
      tacc += d * d;
    }
    row.time_rmse_s = std::sqrt(tacc / static_cast<double>(ta.size()));
    report.clusters.push_back(row);
  }

  for (const auto& row : report.clusters) {
    report.matrix_avg += row.matrix_rmse;
    report.time_avg_s += row.time_rmse_s;
    report.matrix_max = std::max(report.matrix_max, row.matrix_rmse);
    report.time_max_s = std::max(report.time_max_s, row.time_rmse_s);
  }
  report.matrix_avg /= static_cast<double>(report.clusters.size());
  report.time_avg_s /= static_cast<double>(report.clusters.size());
  report.matrix_avg_pct = report.matrix_avg * 100.0;
  report.matrix_max_pct = report.matrix_max * 100.0;
  if (report.time_base_s > 0) {
    report.time_avg_pct = report.time_avg_s / report.time_base_s * 100.0;
    report.time_max_pct = report.time_max_s / report.time_base_s * 100.0;
  }
  return report;
}

struct RoundTripOptions {
  std::optional<std::size_t> n_users;            // default: sessions behind the first model
  std::optional<double> mean_interarrival_s;     // default: from the first model's provenance
  std::optional<double> remodel_threshold_minutes;  // default: the first model's threshold
  std::uint64_t seed = 1;
  RmseOptions rmse_options;
};

struct RoundTripResult {
  MobilityModel original;
  MobilityModel remodeled;
  RmseReport report;
};

/// The model-quality loop: build a model from the store, generate a synthetic
/// trace of comparable size, re-model the trace with the same k, map user
/// types, and measure the RMSE between the two models.
inline RoundTripResult round_trip(const SampleStore& store, const RegionSpec& region,
                                  const BuildConfig& build_config = {},
                                  const RoundTripOptions& options = {}) {
  RoundTripResult result;
  result.original = build_mobility_model(store, region, build_config).model;
  const MobilityModel& m1 = result.original;

  GenerationConfig gen;
  gen.n_users = options.n_users ? *options.n_users : m1.provenance.n_sessions;
  gen.mean_interarrival_s = options.mean_interarrival_s;
  gen.seed = options.seed;
  SyntheticTrace trace = generate_trace(m1, gen);

  const SampleStore synth_store = make_store(trace.samples);
  const RegionSpec lens = trace_region(m1);

  BuildConfig rebuild = build_config;
  rebuild.threshold_minutes = options.remodel_threshold_minutes
                                  ? *options.remodel_threshold_minutes
                                  : m1.provenance.threshold_minutes;
  rebuild.k = m1.provenance.k;
  result.remodeled = build_mobility_model(synth_store, lens, rebuild).model;

  const auto mapping = map_clusters(m1, result.remodeled);
  result.report = rmse(m1, result.remodeled, mapping, options.rmse_options);
  return result;
}

// --- Report output ----------------------------------------------------------

inline nlohmann::ordered_json report_to_json(const RmseReport& report) {
  nlohmann::ordered_json j;
  j["mapping"] = report.mapping;
  j["clusters"] = nlohmann::ordered_json::array();
  for (const auto& row : report.clusters) {
    nlohmann::ordered_json r;
    r["cluster_a"] = row.cluster_a;
    r["cluster_b"] = row.cluster_b;
    r["matrix_rmse"] = row.matrix_rmse;
    r["time_rmse_s"] = row.time_rmse_s;
    j["clusters"].push_back(std::move(r));
  }
  j["matrix"] = {{"avg", report.matrix_avg},
                 {"max", report.matrix_max},
                 {"avg_pct", report.matrix_avg_pct},
                 {"max_pct", report.matrix_max_pct}};
  j["time_s"] = {{"avg", report.time_avg_s},
                 {"max", report.time_max_s},
                 {"avg_pct", report.time_avg_pct},
                 {"max_pct", report.time_max_pct},
                 {"pct_base_s", report.time_base_s}};
  j["exclude_structural_zeros"] = report.exclude_structural_zeros;
  return j;
}

inline void write_report_table(std::ostream& out, const std::string& label,
                               const RmseReport& report) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(3);
  out << "Region          | Transition matrix    | Time vector (s.)\n";
  out << "                | avg.      max.       | avg.          max.\n";
  out << label;
  if (label.size() < 16) out << std::string(16 - label.size(), ' ');
  out << "| " << report.matrix_avg << " (" << std::setprecision(1) << report.matrix_avg_pct
      << "%)" << std::setprecision(3) << " " << report.matrix_max << " ("
      << std::setprecision(1) << report.matrix_max_pct << "%)" << std::setprecision(3)
      << " | " << report.time_avg_s << " (" << std::setprecision(1) << report.time_avg_pct
      << "%)" << std::setprecision(3) << " " << report.time_max_s << " ("
      << std::setprecision(1) << report.time_max_pct << "%)\n";
  out.flags(flags);
}

}  // namespace mobmodel

#endif  // MOBMODEL_VALIDATE_HPP
