#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "mobmodel/ingest.hpp"
#include "support/fixtures.hpp"

using namespace mobmodel;

namespace {

ParseResult parse_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_tuple_log(in, LogFormat::csv);
}

ParseResult parse_jsonl(const std::string& text) {
  std::istringstream in(text);
  return parse_tuple_log(in, LogFormat::jsonl);
}

}  // namespace

TEST_CASE("csv rows come out sorted by user and time") {
  const auto r = parse_csv(
      "time_stamp,user_id,ap_id\n"
      "1521133688,U1,AP-A\n"
      "1521133600,U1,AP-B\n");
  REQUIRE(r.store.size() == 2);
  CHECK(r.skipped == 0);
  CHECK(r.store.samples[0].ap_id == "AP-B");
  CHECK(r.store.samples[0].timestamp == 1521133600);
  CHECK(r.store.samples[1].ap_id == "AP-A");
  CHECK(r.store.ap_index == std::set<std::string>{"AP-A", "AP-B"});
}

TEST_CASE("empty csv with header parses to an empty store") {
  const auto r = parse_csv("time_stamp,user_id,ap_id\n");
  CHECK(r.store.empty());
  CHECK(r.skipped == 0);
}

TEST_CASE("malformed rows are skipped and counted") {
  std::string text = "time_stamp,user_id,ap_id\n";
  for (int i = 0; i < 8; ++i)
    text += std::to_string(1000 + i) + ",U" + std::to_string(i) + ",AP-" + std::to_string(i) + "\n";
  text += "2000,U9,\n";   // missing ap_id
  text += "2001,U10,\n";  // missing ap_id
  const auto r = parse_csv(text);
  CHECK(r.store.size() == 8);
  CHECK(r.skipped == 2);
}

TEST_CASE("csv header is mandatory") {
  CHECK_THROWS_AS(parse_csv("1521133688,U1,AP-A\n"), ParseError);
  CHECK_THROWS_AS(parse_csv(""), ParseError);
}

TEST_CASE("timestamps must be plain non-negative integers") {
  const auto r = parse_csv(
      "time_stamp,user_id,ap_id\n"
      "123.5,U1,AP-A\n"
      "-7,U1,AP-A\n"
      "12e3,U1,AP-A\n"
      "60,U1,AP-A\n");
  CHECK(r.store.size() == 1);
  CHECK(r.skipped == 3);

  const auto j = parse_jsonl(
      "{\"time_stamp\": 123.5, \"user_id\": \"U1\", \"ap_id\": \"AP-A\"}\n"
      "{\"time_stamp\": 60, \"user_id\": \"U1\", \"ap_id\": \"AP-A\"}\n");
  CHECK(j.store.size() == 1);
  CHECK(j.skipped == 1);
}

TEST_CASE("exact duplicate tuples collapse to one") {
  const auto r = parse_csv(
      "time_stamp,user_id,ap_id\n"
      "60,U1,AP-A\n"
      "60,U1,AP-A\n"
      "60,U1,AP-B\n");
  CHECK(r.store.size() == 2);  // same user+time under two APs is kept
}

TEST_CASE("jsonl parses and sorts like csv") {
  const auto r = parse_jsonl(
      "{\"time_stamp\": 1521133688, \"user_id\": \"U1\", \"ap_id\": \"AP-A\"}\n"
      "not json at all\n"
      "{\"time_stamp\": 1521133600, \"user_id\": \"U1\", \"ap_id\": \"AP-B\"}\n");
  REQUIRE(r.store.size() == 2);
  CHECK(r.skipped == 1);
  CHECK(r.store.samples[0].ap_id == "AP-B");
}

TEST_CASE("parsing is deterministic") {
  std::string text = "time_stamp,user_id,ap_id\n";
  Rng rng(7);
  for (int i = 0; i < 200; ++i)
    text += std::to_string(rng.uniform_index(5000)) + ",U" +
            std::to_string(rng.uniform_index(9)) + ",AP-" + std::to_string(rng.uniform_index(17)) +
            "\n";
  const auto a = parse_csv(text);
  const auto b = parse_csv(text);
  REQUIRE(a.store.size() == b.store.size());
  for (std::size_t i = 0; i < a.store.size(); ++i) CHECK(a.store.samples[i] == b.store.samples[i]);
  CHECK(a.store.digest() == b.store.digest());
}

TEST_CASE("proximity export: one record becomes one sample") {
  std::istringstream in(R"({"Proximity_result": [{
    "msg": {
      "sta_eth_mac": {"addr": "FCF8AEEC8E20"},
      "associated": true,
      "hashed_sta_eth_mac": "DBB3D96B0AA540A2839B39071C3154760775AD50",
      "ap_name": "9c:1c:12:c0:19:5a",
      "radio_mac": {"addr": "B45D50F94E30"},
      "target_type": "TARGET_TYPE_STATION"
    },
    "ts": 1521133688
  }]})");
  const auto r = parse_proximity_json(in);
  REQUIRE(r.samples.size() == 1);
  CHECK(r.skipped == 0);
  CHECK(r.samples[0].timestamp == 1521133688);
  CHECK(r.samples[0].user_id == "DBB3D96B0AA540A2839B39071C3154760775AD50");
  CHECK(r.samples[0].ap_id == "B45D50F94E30");
}

TEST_CASE("proximity export: empty array and missing fields") {
  {
    std::istringstream in(R"({"Proximity_result": []})");
    CHECK(parse_proximity_json(in).samples.empty());
  }
  {
    std::istringstream in(R"({"Proximity_result": [
      {"msg": {"hashed_sta_eth_mac": "A", "radio_mac": {"addr": "X"}}, "ts": 10},
      {"msg": {"hashed_sta_eth_mac": "B", "radio_mac": {"addr": "Y"}}},
      {"msg": {"hashed_sta_eth_mac": "C", "radio_mac": {"addr": "Z"}}, "ts": 30}
    ]})");
    const auto r = parse_proximity_json(in);
    CHECK(r.samples.size() == 2);
    CHECK(r.skipped == 1);
  }
  {
    std::istringstream in(R"({"something_else": []})");
    CHECK_THROWS_AS(parse_proximity_json(in), ParseError);
  }
}

TEST_CASE("clean drops whole single-sample users when asked") {
  std::vector<Sample> samples{
      {100, "single", "AP-A"},
      {100, "pair", "AP-A"}, {200, "pair", "AP-B"},
      {100, "busy", "AP-A"}, {160, "busy", "AP-A"}, {220, "busy", "AP-B"},
      {280, "busy", "AP-C"}, {340, "busy", "AP-A"}};
  const auto store = make_store(samples);

  CleaningConfig rules;
  rules.drop_single_connection_users = true;
  const auto cleaned = clean(store, rules);
  CHECK(cleaned.size() == 7);
  CHECK(cleaned.user_count() == 2);
  for (const auto& s : cleaned.samples) CHECK(s.user_id != "single");

  CleaningConfig none;
  const auto same = clean(store, none);
  CHECK(same.samples == store.samples);
}

TEST_CASE("clean exclusion rules") {
  std::vector<Sample> samples{{100, "u1", "AP-A"}, {200, "u1", "AP-B"}, {300, "u1", "AP-A"},
                              {100, "u2", "AP-A"}, {250, "u2", "AP-A"}};
  const auto store = make_store(samples);

  CleaningConfig by_ap;
  by_ap.excluded_ap_ids = {"AP-B"};
  CHECK(clean(store, by_ap).size() == 4);

  CleaningConfig by_user;
  by_user.excluded_user_ids = {"u2"};
  CHECK(clean(store, by_user).size() == 3);

  CleaningConfig by_window;
  by_window.time_window = {{150, 260}};
  const auto windowed = clean(store, by_window);
  CHECK(windowed.size() == 3);  // 200 and 250 fall inside the window
  for (const auto& s : windowed.samples) CHECK((s.timestamp < 150 || s.timestamp > 260));
}

TEST_CASE("clean is idempotent and never adds samples") {
  Rng rng(21);
  const auto region = fixtures::simple_region({"A", "B", "C"});
  for (int trial = 0; trial < 25; ++trial) {
    auto store = fixtures::random_store(rng, region, 6, 8);
    // Make some users single-sample.
    store.samples.resize(store.samples.size() - rng.uniform_index(5));
    store = make_store(store.samples);

    CleaningConfig rules;
    rules.drop_single_connection_users = true;
    rules.excluded_ap_ids = {"offsite-1"};
    rules.time_window = {{10000, 20000}};

    const auto once = clean(store, rules);
    const auto twice = clean(once, rules);
    CHECK(once.samples == twice.samples);

    // Output is a sub-multiset of the input.
    for (const auto& s : once.samples) {
      const bool found = std::find(store.samples.begin(), store.samples.end(), s) !=
                         store.samples.end();
      CHECK(found);
    }
    // Sort invariant holds.
    CHECK(std::is_sorted(once.samples.begin(), once.samples.end(), sample_order));
  }
}

TEST_CASE("csv and jsonl writers round-trip through the parser") {
  Rng rng(5);
  const auto region = fixtures::simple_region({"A", "B"});
  const auto store = fixtures::random_store(rng, region, 4, 6);

  std::ostringstream csv;
  write_samples_csv(csv, store.samples);
  const auto back = parse_csv(csv.str());
  CHECK(back.store.samples == store.samples);

  std::ostringstream jsonl;
  write_samples_jsonl(jsonl, store.samples);
  const auto back2 = parse_jsonl(jsonl.str());
  CHECK(back2.store.samples == store.samples);
}
