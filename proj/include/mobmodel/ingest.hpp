#ifndef MOBMODEL_INGEST_HPP
#define MOBMODEL_INGEST_HPP

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobmodel/errors.hpp"
#include "mobmodel/sample.hpp"

namespace mobmodel {

enum class LogFormat { csv, jsonl };

struct ParseResult {
  SampleStore store;
  std::size_t skipped = 0;  // malformed rows, never fatal
};

namespace detail {

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

// Strict non-negative integer; rejects sign, blanks, and fractions so that
// sub-second timestamps are dropped rather than truncated.
inline bool parse_timestamp(std::string_view text, std::int64_t& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && out >= 0;
}

inline bool json_timestamp(const nlohmann::json& v, std::int64_t& out) {
  if (v.is_number_unsigned()) {
    out = static_cast<std::int64_t>(v.get<std::uint64_t>());
    return out >= 0;
  }
  if (v.is_number_integer()) {
    out = v.get<std::int64_t>();
    return out >= 0;
  }
  return false;  // floats carry sub-second precision; reject
}

}  // namespace detail

/// Parse a wireless session access log. CSV requires the exact header
/// `time_stamp,user_id,ap_id`; JSONL is one object per line with those keys.
/// Malformed rows are skipped and counted. Throws ParseError only for
/// unreadable input or a bad/missing CSV header.
inline ParseResult parse_tuple_log(std::istream& in, LogFormat format) {
  if (!in) throw ParseError("tuple log: input stream is not readable");

  ParseResult result;
  std::vector<Sample> samples;
  std::string line;
  bool saw_header = false;
  bool first_line = true;

  while (std::getline(in, line)) {
    std::string_view row = detail::strip_cr(line);
    if (first_line) {
      first_line = false;
      if (row.size() >= 3 && static_cast<unsigned char>(row[0]) == 0xEF &&
          static_cast<unsigned char>(row[1]) == 0xBB &&
          static_cast<unsigned char>(row[2]) == 0xBF)
        row.remove_prefix(3);
      if (format == LogFormat::csv) {
        if (row != "time_stamp,user_id,ap_id")
          throw ParseError("tuple log: missing or wrong CSV header, expected "
                           "'time_stamp,user_id,ap_id'");
        saw_header = true;
        continue;
      }
    }
    if (row.empty()) continue;

    Sample s;
    if (format == LogFormat::csv) {
      const std::size_t c1 = row.find(',');
      const std::size_t c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
      if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
        ++result.skipped;
        continue;
      }
      const std::string_view ts = row.substr(0, c1);
      const std::string_view user = row.substr(c1 + 1, c2 - c1 - 1);
      const std::string_view ap = row.substr(c2 + 1);
      if (user.empty() || ap.empty() || !detail::parse_timestamp(ts, s.timestamp)) {
        ++result.skipped;
        continue;
      }
      s.user_id.assign(user);
      s.ap_id.assign(ap);
    } else {
      nlohmann::json obj = nlohmann::json::parse(row, nullptr, false);
      if (!obj.is_object() || !obj.contains("time_stamp") || !obj.contains("user_id") ||
          !obj.contains("ap_id") || !obj["user_id"].is_string() || !obj["ap_id"].is_string() ||
          !detail::json_timestamp(obj["time_stamp"], s.timestamp)) {
        ++result.skipped;
        continue;
      }
      s.user_id = obj["user_id"].get<std::string>();
      s.ap_id = obj["ap_id"].get<std::string>();
      if (s.user_id.empty() || s.ap_id.empty()) {
        ++result.skipped;
        continue;
      }
    }
    samples.push_back(std::move(s));
  }
  if (in.bad()) throw ParseError("tuple log: I/O error while reading");
  if (format == LogFormat::csv && !saw_header)
    throw ParseError("tuple log: empty input, expected CSV header");

  result.store = make_store(std::move(samples));
  return result;
}

struct ProximityResult {
  std::vector<Sample> samples;
  std::size_t skipped = 0;  // records missing one of the three fields
};

/// Parse a location-engine proximity export: a JSON document whose top-level
/// key `Proximity_result` holds an array of records carrying
/// `msg.hashed_sta_eth_mac` (user), `msg.radio_mac.addr` (AP) and `ts`.
inline ProximityResult parse_proximity_json(std::istream& in) {
  if (!in) throw ParseError("proximity json: input stream is not readable");
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError("proximity json: document is not valid JSON");
  if (!doc.is_object() || !doc.contains("Proximity_result") ||
      !doc["Proximity_result"].is_array())
    throw ParseError("proximity json: missing top-level 'Proximity_result' array");

  ProximityResult result;
  for (const auto& record : doc["Proximity_result"]) {
    Sample s;
    const auto* msg = record.is_object() && record.contains("msg") && record["msg"].is_object()
                          ? &record["msg"]
                          : nullptr;
    if (!msg || !record.contains("ts") || !detail::json_timestamp(record["ts"], s.timestamp) ||
        !msg->contains("hashed_sta_eth_mac") || !(*msg)["hashed_sta_eth_mac"].is_string() ||
        !msg->contains("radio_mac") || !(*msg)["radio_mac"].is_object() ||
        !(*msg)["radio_mac"].contains("addr") || !(*msg)["radio_mac"]["addr"].is_string()) {
      ++result.skipped;
      continue;
    }
    s.user_id = (*msg)["hashed_sta_eth_mac"].get<std::string>();
    s.ap_id = (*msg)["radio_mac"]["addr"].get<std::string>();
    if (s.user_id.empty() || s.ap_id.empty()) {
      ++result.skipped;
      continue;
    }
    result.samples.push_back(std::move(s));
  }
  return result;
}

/// Write samples in the canonical CSV form (the same format parse_tuple_log
/// reads back).
inline void write_samples_csv(std::ostream& out, const std::vector<Sample>& samples) {
  out << "time_stamp,user_id,ap_id\n";
  for (const auto& s : samples)
    out << s.timestamp << ',' << s.user_id << ',' << s.ap_id << '\n';
}

inline void write_samples_jsonl(std::ostream& out, const std::vector<Sample>& samples) {
  for (const auto& s : samples) {
    nlohmann::json obj{{"time_stamp", s.timestamp}, {"user_id", s.user_id}, {"ap_id", s.ap_id}};
    out << obj.dump() << '\n';
  }
}

}  // namespace mobmodel

#endif  // MOBMODEL_INGEST_HPP
