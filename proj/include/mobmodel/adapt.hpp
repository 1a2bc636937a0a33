#ifndef MOBMODEL_ADAPT_HPP
#define MOBMODEL_ADAPT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobmodel/errors.hpp"
#include "mobmodel/model.hpp"

namespace mobmodel {

namespace detail {

inline std::size_t zone_index_or_throw(const MobilityModel& model, const std::string& label) {
  const auto it = std::find(model.zone_labels.begin(), model.zone_labels.end(), label);
  if (it == model.zone_labels.end())
    throw UsageError("zone '" + label + "' does not exist in the model");
  return static_cast<std::size_t>(it - model.zone_labels.begin());
}

// State indices of zone a and b given zone indices.
inline std::size_t st(std::size_t zone) { return TransitionMatrix::kZoneBase + zone; }

// A twin is a zone whose transition behavior is indistinguishable from
// `zone`: equal incoming probability from every other state, identical
// outgoing row away from the pair, matching cross terms and stay time.
// duplicate_zone produces exactly this shape, so removing a twin merges its
// mass back instead of renormalizing, which makes duplicate -> remove an
// exact inverse.
inline std::optional<std::size_t> find_twin(const MobilityModel& model, std::size_t zone) {
  constexpr double eps = 1e-12;
  const std::size_t n = model.zone_labels.size();
  for (std::size_t cand = 0; cand < n; ++cand) {
    if (cand == zone) continue;
    bool twin = true;
    for (const auto& c : model.clusters) {
      const auto& m = c.matrix;
      if (std::abs(c.times.seconds[zone] - c.times.seconds[cand]) > eps) twin = false;
      if (std::abs(m.at(st(zone), st(cand)) - m.at(st(cand), st(zone))) > eps) twin = false;
      for (std::size_t i = 0; twin && i < m.size(); ++i) {
        if (i == st(zone) || i == st(cand)) continue;
        if (std::abs(m.at(i, st(zone)) - m.at(i, st(cand))) > eps) twin = false;
      }
      for (std::size_t j = 0; twin && j < m.size(); ++j) {
        if (j == st(zone) || j == st(cand)) continue;
        if (std::abs(m.at(st(zone), j) - m.at(st(cand), j)) > eps) twin = false;
      }
      if (!twin) break;
    }
    if (twin) return cand;
  }
  return std::nullopt;
}

inline TransitionMatrix drop_state(const TransitionMatrix& m,
                                   const std::vector<std::string>& new_zones,
                                   std::size_t zone) {
  TransitionMatrix out(new_zones);
  const std::size_t drop = st(zone);
  for (std::size_t i = 0, oi = 0; i < m.size(); ++i) {
    if (i == drop) continue;
    for (std::size_t j = 0, oj = 0; j < m.size(); ++j) {
      if (j == drop) continue;
      out.at(oi, oj) = m.at(i, j);
      ++oj;
    }
    ++oi;
  }
  return out;
}

}  // namespace detail

/// Delete a zone from every cluster. When the zone has a twin (see
/// detail::find_twin) its probability mass merges into the twin; otherwise
/// each remaining row is renormalized, spreading the lost mass
/// proportionally, and rows left without mass become absorbing into OUT.
/// Removing a cluster's only possible entry zone is an error, because the IN
/// row may not route to OUT.
inline MobilityModel remove_zone(const MobilityModel& model, const std::string& label) {
  if (model.zone_labels.size() < 2)
    throw UsageError("cannot remove zone '" + label + "': a model needs at least one zone");
  const std::size_t zone = detail::zone_index_or_throw(model, label);
  const auto twin = detail::find_twin(model, zone);

  std::vector<std::string> new_zones = model.zone_labels;
  new_zones.erase(new_zones.begin() + static_cast<std::ptrdiff_t>(zone));

  MobilityModel out;
  out.region = model.region;
  out.zone_labels = new_zones;
  out.provenance = model.provenance;

  for (std::size_t ci = 0; ci < model.clusters.size(); ++ci) {
    const ClusterModel& src = model.clusters[ci];
    ClusterModel dst;
    dst.popularity = src.popularity;

    TransitionMatrix merged = src.matrix;
    if (twin) {
      for (std::size_t i = 0; i < merged.size(); ++i)
        merged.at(i, detail::st(*twin)) += merged.at(i, detail::st(zone));
      for (std::size_t i = 0; i < merged.size(); ++i) merged.at(i, detail::st(zone)) = 0;
    }
    dst.matrix = detail::drop_state(merged, new_zones, zone);
    if (!twin) {
      for (std::size_t i = 0; i < dst.matrix.size(); ++i) {
        if (i == TransitionMatrix::kOut) continue;
        if (i == TransitionMatrix::kIn && dst.matrix.row_sum(i) <= 0)
          throw ValidationError("cluster " + std::to_string(ci) + ": removing zone '" + label +
                                "' leaves no entry zone; its sessions all started there");
        dst.matrix.normalize_row(i);
      }
    }

    dst.times.seconds = src.times.seconds;
    dst.times.seconds.erase(dst.times.seconds.begin() + static_cast<std::ptrdiff_t>(zone));
    out.clusters.push_back(std::move(dst));
  }
  return out;
}

/// Clone a zone under a new label, inserted right after the original. The
/// clone inherits the outgoing row and stay time; incoming probability is
/// split evenly between the pair; transitions within the pair are zeroed and
/// the pair's rows renormalized.
inline MobilityModel duplicate_zone(const MobilityModel& model, const std::string& label,
                                    const std::string& new_label) {
  const std::size_t zone = detail::zone_index_or_throw(model, label);
  if (std::find(model.zone_labels.begin(), model.zone_labels.end(), new_label) !=
      model.zone_labels.end())
    throw UsageError("zone '" + new_label + "' already exists in the model");
  if (new_label.empty() || new_label == "IN" || new_label == "OUT")
    throw UsageError("'" + new_label + "' is not a usable zone label");

  std::vector<std::string> new_zones = model.zone_labels;
  new_zones.insert(new_zones.begin() + static_cast<std::ptrdiff_t>(zone) + 1, new_label);

  MobilityModel out;
  out.region = model.region;
  out.zone_labels = new_zones;
  out.provenance = model.provenance;

  const std::size_t old_n = model.zone_labels.size() + 2;
  // Old state index -> new state index (states at or after the clone shift).
  auto remap = [&](std::size_t s) { return s > detail::st(zone) ? s + 1 : s; };
  const std::size_t s_orig = detail::st(zone);
  const std::size_t s_new = s_orig + 1;

  for (const auto& src : model.clusters) {
    ClusterModel dst;
    dst.popularity = src.popularity;
    dst.matrix = TransitionMatrix(new_zones);
    for (std::size_t i = 0; i < old_n; ++i)
      for (std::size_t j = 0; j < old_n; ++j)
        dst.matrix.at(remap(i), remap(j)) = src.matrix.at(i, j);
    // Clone the outgoing row, then split every incoming edge between the pair.
    for (std::size_t j = 0; j < dst.matrix.size(); ++j)
      dst.matrix.at(s_new, j) = dst.matrix.at(s_orig, j);
    for (std::size_t i = 0; i < dst.matrix.size(); ++i) {
      const double half = dst.matrix.at(i, s_orig) / 2.0;
      dst.matrix.at(i, s_orig) = half;
      dst.matrix.at(i, s_new) = i == s_new || i == s_orig ? dst.matrix.at(i, s_new) : half;
    }
    dst.matrix.at(s_orig, s_orig) = 0;
    dst.matrix.at(s_orig, s_new) = 0;
    dst.matrix.at(s_new, s_orig) = 0;
    dst.matrix.at(s_new, s_new) = 0;
    dst.matrix.normalize_row(s_orig);
    dst.matrix.normalize_row(s_new);

    dst.times.seconds = src.times.seconds;
    dst.times.seconds.insert(dst.times.seconds.begin() + static_cast<std::ptrdiff_t>(zone) + 1,
                             src.times.seconds[zone]);
    out.clusters.push_back(std::move(dst));
  }
  return out;
}

inline MobilityModel rename_zone(const MobilityModel& model, const std::string& old_label,
                                 const std::string& new_label) {
  const std::size_t zone = detail::zone_index_or_throw(model, old_label);
  if (std::find(model.zone_labels.begin(), model.zone_labels.end(), new_label) !=
      model.zone_labels.end())
    throw UsageError("zone '" + new_label + "' already exists in the model");
  if (new_label.empty() || new_label == "IN" || new_label == "OUT")
    throw UsageError("'" + new_label + "' is not a usable zone label");

  MobilityModel out = model;
  out.zone_labels[zone] = new_label;
  for (auto& c : out.clusters) {
    TransitionMatrix renamed(out.zone_labels);
    for (std::size_t i = 0; i < c.matrix.size(); ++i)
      for (std::size_t j = 0; j < c.matrix.size(); ++j) renamed.at(i, j) = c.matrix.at(i, j);
    c.matrix = std::move(renamed);
  }
  return out;
}

/// Scale one zone's mean stay time in every cluster.
inline MobilityModel scale_time(const MobilityModel& model, const std::string& label,
                                double factor) {
  if (!(factor >= 0) || !std::isfinite(factor))
    throw UsageError("scale_time factor must be a non-negative number");
  const std::size_t zone = detail::zone_index_or_throw(model, label);
  MobilityModel out = model;
  for (auto& c : out.clusters) c.times.seconds[zone] *= factor;
  return out;
}

/// Replace the cluster popularity weights.
inline MobilityModel set_weights(const MobilityModel& model, const std::vector<double>& weights) {
  if (weights.size() != model.clusters.size())
    throw UsageError("set_weights needs one weight per cluster (" +
                     std::to_string(model.clusters.size()) + ")");
  double sum = 0;
  for (double w : weights) {
    if (w < 0) throw UsageError("weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw UsageError("weights must sum to 1 within 1e-9");
  MobilityModel out = model;
  for (std::size_t c = 0; c < weights.size(); ++c) out.clusters[c].popularity = weights[c];
  return out;
}

// --- Scripts ----------------------------------------------------------------

struct Directive {
  enum class Op { remove_zone, duplicate_zone, rename_zone, scale_time, set_weights };
  Op op = Op::remove_zone;
  std::string label;      // remove/duplicate/scale: target; rename: old label
  std::string new_label;  // duplicate/rename
  double factor = 1.0;    // scale_time
  std::vector<double> weights;  // set_weights

  std::string describe() const {
    switch (op) {
      case Op::remove_zone: return "remove_zone '" + label + "'";
      case Op::duplicate_zone: return "duplicate_zone '" + label + "' -> '" + new_label + "'";
      case Op::rename_zone: return "rename_zone '" + label + "' -> '" + new_label + "'";
      case Op::scale_time: return "scale_time '" + label + "' x" + std::to_string(factor);
      case Op::set_weights: return "set_weights";
    }
    return "?";
  }
};

using AdaptationScript = std::vector<Directive>;

inline AdaptationScript parse_script(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ParseError("adaptation script must be a JSON array of directives");
  AdaptationScript script;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& d = doc[i];
    const std::string where = "directive " + std::to_string(i);
    if (!d.is_object() || !d.contains("op") || !d["op"].is_string())
      throw ParseError(where + ": needs a string 'op' field");
    const std::string op = d["op"].get<std::string>();
    auto str_field = [&](const char* key) {
      if (!d.contains(key) || !d[key].is_string())
        throw ParseError(where + " (" + op + "): needs string field '" + key + "'");
      return d[key].get<std::string>();
    };
    Directive dir;
    if (op == "remove_zone") {
      dir.op = Directive::Op::remove_zone;
      dir.label = str_field("label");
    } else if (op == "duplicate_zone") {
      dir.op = Directive::Op::duplicate_zone;
      dir.label = str_field("label");
      dir.new_label = str_field("new_label");
    } else if (op == "rename_zone") {
      dir.op = Directive::Op::rename_zone;
      dir.label = str_field("old");
      dir.new_label = str_field("new");
    } else if (op == "scale_time") {
      dir.op = Directive::Op::scale_time;
      dir.label = str_field("label");
      if (!d.contains("factor") || !d["factor"].is_number())
        throw ParseError(where + " (scale_time): needs numeric field 'factor'");
      dir.factor = d["factor"].get<double>();
    } else if (op == "set_weights") {
      dir.op = Directive::Op::set_weights;
      if (!d.contains("weights") || !d["weights"].is_array())
        throw ParseError(where + " (set_weights): needs array field 'weights'");
      for (const auto& w : d["weights"]) dir.weights.push_back(w.get<double>());
    } else {
      throw ParseError(where + ": unknown op '" + op + "'");
    }
    script.push_back(std::move(dir));
  }
  return script;
}

/// Apply directives in order, re-verifying every model invariant after each
/// step. The first failing directive aborts with its index and reason.
inline MobilityModel apply_script(const MobilityModel& model, const AdaptationScript& script,
                                  double row_sum_tol = 1e-6) {
  MobilityModel current = model;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const Directive& d = script[i];
    try {
      switch (d.op) {
        case Directive::Op::remove_zone: current = remove_zone(current, d.label); break;
        case Directive::Op::duplicate_zone:
          current = duplicate_zone(current, d.label, d.new_label);
          break;
        case Directive::Op::rename_zone:
          current = rename_zone(current, d.label, d.new_label);
          break;
        case Directive::Op::scale_time: current = scale_time(current, d.label, d.factor); break;
        case Directive::Op::set_weights: current = set_weights(current, d.weights); break;
      }
      current.validate(row_sum_tol);
    } catch (const std::exception& e) {
      throw ValidationError("script aborted at directive " + std::to_string(i) + " (" +
                            d.describe() + "): " + e.what());
    }
  }
  return current;
}

}  // namespace mobmodel

#endif  // MOBMODEL_ADAPT_HPP
