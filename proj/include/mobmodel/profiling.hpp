#ifndef MOBMODEL_PROFILING_HPP
#define MOBMODEL_PROFILING_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "mobmodel/errors.hpp"
#include "mobmodel/rng.hpp"
#include "mobmodel/sessions.hpp"

namespace mobmodel {

/// Fraction of a session spent in each zone of the region; entries sum to 1.
struct ZoneProbabilityVector {
  RegionId region;
  std::vector<double> probs;
};

/// Characterize a session by dwell fractions. Each entry's zone holds the
/// time until the next entry; the final entry (the exit marker) holds zero.
/// The session must be handoff-filtered and have positive duration.
inline ZoneProbabilityVector session_vector(const Session& session, const RegionSpec& region) {
  if (session.entries.empty()) throw DataError("session has no entries");
  const double duration = static_cast<double>(session.duration());
  if (duration <= 0)
    throw DataError("session of user '" + session.user_id +
                    "' has zero duration; clean such sessions out before profiling");

  ZoneProbabilityVector v;
  v.region = region.id;
  v.probs.assign(region.zone_count(), 0.0);
  const auto& labels = region.zone_labels();
  for (std::size_t i = 0; i + 1 < session.entries.size(); ++i) {
    const auto& e = session.entries[i];
    const auto it = std::find(labels.begin(), labels.end(), e.zone);
    if (it == labels.end())
      throw ValidationError("session entry references unknown zone '" + e.zone + "'");
    const double dwell =
        static_cast<double>(session.entries[i + 1].timestamp - e.timestamp);
    v.probs[static_cast<std::size_t>(it - labels.begin())] += dwell / duration;
  }
  return v;
}

struct Clustering {
  std::size_t k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;  // point index -> cluster index
  double distortion = 0;                // mean squared distance to assigned centroid
  /// Distortion after each Lloyd iteration of the winning restart.
  std::vector<double> iteration_distortions;
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline std::size_t nearest_centroid(const std::vector<double>& point,
                                    const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = sq_dist(point, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

inline std::vector<std::vector<double>> kmeanspp_seed(
    const std::vector<std::vector<double>>& points, std::size_t k, Rng& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.uniform_index(points.size())]);
  std::vector<double> d2(points.size());
  while (centroids.size() < k) {
    double total = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = sample_weighted(rng, d2, total);
    if (pick >= points.size()) pick = rng.uniform_index(points.size());  // all residuals zero
    centroids.push_back(points[pick]);
  }
  return centroids;
}

/// Lloyd iterations from given start centroids until the largest centroid
/// shift drops below `tol` or `max_iterations` is reached. Empty clusters are
/// reseeded to the point farthest from its assigned centroid, which keeps k
/// fixed for the elbow analysis.
inline Clustering lloyd(const std::vector<std::vector<double>>& points,
                        std::vector<std::vector<double>> centroids, std::size_t max_iterations,
                        double tol) {
  const std::size_t n = points.size();
  const std::size_t k = centroids.size();
  const std::size_t dim = points.front().size();

  Clustering result;
  result.k = k;
  result.assignment.assign(n, 0);

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    double total_d2 = 0;
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest_centroid(points[i], centroids);
      result.assignment[i] = c;
      ++counts[c];
      total_d2 += sq_dist(points[i], centroids[c]);
    }
    result.iteration_distortions.push_back(total_d2 / static_cast<double>(n));

    bool reseeded = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t farthest = n;
      double far_d = -1;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[result.assignment[i]] <= 1) continue;  // do not strand another cluster
        const double d = sq_dist(points[i], centroids[result.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          farthest = i;
        }
      }
      if (farthest == n) continue;
      --counts[result.assignment[farthest]];
      result.assignment[farthest] = c;
      counts[c] = 1;
      reseeded = true;
    }

    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dim; ++j) next[result.assignment[i]][j] += points[i][j];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        next[c] = centroids[c];
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) next[c][j] /= static_cast<double>(counts[c]);
    }

    double max_shift2 = 0;
    for (std::size_t c = 0; c < k; ++c) max_shift2 = std::max(max_shift2, sq_dist(next[c], centroids[c]));
    centroids = std::move(next);
    if (!reseeded && max_shift2 < tol * tol) break;
  }

  // Final assignment against the converged centroids.
  double total_d2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = nearest_centroid(points[i], centroids);
    result.assignment[i] = c;
    total_d2 += sq_dist(points[i], centroids[c]);
  }
  result.distortion = total_d2 / static_cast<double>(n);
  result.iteration_distortions.push_back(result.distortion);
  result.centroids = std::move(centroids);
  return result;
}

inline std::size_t count_distinct(std::vector<std::vector<double>> points) {
  std::sort(points.begin(), points.end());
  return static_cast<std::size_t>(std::unique(points.begin(), points.end()) - points.begin());
}

}  // namespace detail

struct KmeansParams {
  std::uint64_t seed = 1;
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
  double tol = 1e-9;
};

namespace detail {

// Restarted k-means without the distinct-count precondition check.
inline Clustering kmeans_seeded(const std::vector<std::vector<double>>& points, std::size_t k,
                                const KmeansParams& params) {
  Rng master(params.seed);
  Clustering best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(params.restarts, 1); ++r) {
    Rng rng = master.substream(r);
    auto start = kmeanspp_seed(points, k, rng);
    Clustering c = lloyd(points, std::move(start), params.max_iterations, params.tol);
    if (!have || c.distortion < best.distortion) {
      best = std::move(c);
      have = true;
    }
  }
  return best;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding, best distortion over `restarts`
/// independent starts. Deterministic for a fixed (seed, restarts).
inline Clustering kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                         const KmeansParams& params = {}) {
  if (k < 1) throw UsageError("k must be at least 1");
  if (points.empty()) throw DataError("no vectors to cluster");
  if (k > detail::count_distinct(points))
    throw UsageError("k = " + std::to_string(k) + " exceeds the number of distinct vectors");
  return detail::kmeans_seeded(points, k, params);
}

inline Clustering kmeans(const std::vector<ZoneProbabilityVector>& vectors, std::size_t k,
                         const KmeansParams& params = {}) {
  std::vector<std::vector<double>> points;
  points.reserve(vectors.size());
  for (const auto& v : vectors) points.push_back(v.probs);
  return kmeans(points, k, params);
}

struct ElbowCurve {
  std::vector<std::pair<std::size_t, double>> points;  // (k, distortion)
  std::size_t k_star = 1;
  /// Clustering at k_star, so callers do not have to re-run it.
  Clustering best;
};

/// Distortion for k = 1..k_max and the knee of the curve. Each k is given the
/// seeded restarts plus a warm start from the previous k's solution (the
/// previous centroids plus the point farthest from its centroid), which makes
/// the curve non-increasing in k. k_star is the point of the normalized curve
/// farthest from the chord joining its endpoints; the CLI accepts a manual
/// override for workflows that pick the knee by eye.
inline ElbowCurve elbow(const std::vector<std::vector<double>>& points, std::size_t k_max,
                        const KmeansParams& params = {}) {
  if (k_max < 1) throw UsageError("k_max must be at least 1");
  if (points.empty()) throw DataError("no vectors to cluster");
  const std::size_t distinct = detail::count_distinct(points);
  const std::size_t cap = std::min(k_max, distinct);

  ElbowCurve curve;
  std::vector<Clustering> solutions;
  solutions.reserve(cap);
  std::uint64_t seed_state = params.seed;
  for (std::size_t k = 1; k <= cap; ++k) {
    KmeansParams p = params;
    p.seed = splitmix64_next(seed_state);  // decorrelate k sweeps
    Clustering best = detail::kmeans_seeded(points, k, p);
    if (k > 1) {
      const Clustering& prev = solutions.back();
      auto warm = prev.centroids;
      std::size_t farthest = 0;
      double far_d = -1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = detail::sq_dist(points[i], prev.centroids[prev.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          farthest = i;
        }
      }
      warm.push_back(points[farthest]);
      Clustering warmed = detail::lloyd(points, std::move(warm), p.max_iterations, p.tol);
      if (warmed.distortion < best.distortion) best = std::move(warmed);
    }
    curve.points.emplace_back(k, best.distortion);
    solutions.push_back(std::move(best));
  }

  // Knee: farthest point below the chord of the min-max normalized curve.
  const double d_first = curve.points.front().second;
  const double d_last = curve.points.back().second;
  const double d_range = std::max(d_first - d_last, 0.0);
  const double k_range = static_cast<double>(cap - 1);
  std::size_t knee = 0;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const double x = k_range > 0 ? static_cast<double>(i) / k_range : 0.0;
    const double y = d_range > 0 ? (curve.points[i].second - d_last) / d_range : 0.0;
    const double gap = 1.0 - x - y;  // distance to the chord, up to a factor of sqrt(2)
    if (gap > best_gap + 1e-12) {
      best_gap = gap;
      knee = i;
    }
  }
  curve.k_star = curve.points[knee].first;
  curve.best = std::move(solutions[knee]);
  return curve;
}

inline void write_elbow_csv(std::ostream& out, const ElbowCurve& curve) {
  out << "k,distortion\n";
  char buf[64];
  for (const auto& [k, d] : curve.points) {
    out << k << ',';
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
    out.write(buf, ptr - buf);
    out << '\n';
  }
}

}  // namespace mobmodel

#endif  // MOBMODEL_PROFILING_HPP
