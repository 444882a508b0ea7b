#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "loganvil/predetect.hpp"
#include "test_util.hpp"

using namespace loganvil;
using namespace loganvil::predetect;
using testutil::at_seconds;

namespace {

LogGroup group_of(std::vector<EventRecord> records) {
  LogGroup g;
  g.group_id = 0;
  std::sort(records.begin(), records.end(),
            [](const EventRecord& a, const EventRecord& b) {
              return a.timestamp < b.timestamp;
            });
  g.records = std::move(records);
  g.basis = g.records.size() == 1 ? GroupBasis::singleton
                                  : GroupBasis::shared_source_window;
  return g;
}

}  // namespace

TEST_CASE("default rules cover all five categories with unique ids") {
  auto rules = default_rules();
  REQUIRE(rules.size() == 5);
  std::set<DetectionCategory> categories;
  std::set<std::string> ids;
  for (const auto& r : rules) {
    CHECK_NOTHROW(validate(r));
    categories.insert(r.category);
    ids.insert(r.rule_id);
  }
  CHECK(categories.size() == 5);
  CHECK(ids.size() == 5);
}

TEST_CASE("brute force fires at five failed logons within a minute") {
  std::vector<EventRecord> records;
  for (int i = 0; i < 5; ++i)
    records.push_back(
        at_seconds(i * 10, "4625", "Security", "An account failed logon"));
  auto detections = scan(group_of(records), default_rules());
  REQUIRE(detections.size() == 1);
  CHECK(detections[0].category == DetectionCategory::brute_force);
  CHECK(detections[0].triggering_indices.size() == 5);
}

TEST_CASE("four failed logons stay quiet") {
  std::vector<EventRecord> records;
  for (int i = 0; i < 4; ++i)
    records.push_back(
        at_seconds(i * 10, "4625", "Security", "An account failed logon"));
  CHECK(scan(group_of(records), default_rules()).empty());
}

TEST_CASE("five failed logons spread past the window stay quiet") {
  std::vector<EventRecord> records;
  for (int i = 0; i < 5; ++i)
    records.push_back(
        at_seconds(i * 40, "4625", "Security", "failed logon"));  // 160 s span
  // Any 60-second span holds only 2 of them.
  auto detections = scan(group_of(records), default_rules());
  CHECK(detections.empty());
}

TEST_CASE("empty group yields no detections") {
  LogGroup g;  // deliberately unvalidated empty group for the scan path
  CHECK(scan(g, default_rules()).empty());
}

TEST_CASE("privilege escalation fires on a single special-privilege event") {
  auto detections = scan(
      group_of({at_seconds(0, "4672", "Security",
                           "Special privileges assigned to new logon")}),
      default_rules());
  REQUIRE(detections.size() == 1);
  CHECK(detections[0].category == DetectionCategory::privilege_escalation);
}

TEST_CASE("text matching is case-insensitive") {
  auto detections =
      scan(group_of({at_seconds(0, "1", "App", "FATAL: disk controller")}),
           default_rules());
  REQUIRE(detections.size() == 1);
  CHECK(detections[0].category == DetectionCategory::software_failure);
}

TEST_CASE("repetition flood needs identical id and description") {
  std::vector<EventRecord> same, varied;
  for (int i = 0; i < 20; ++i) {
    same.push_back(at_seconds(i, "7", "Svc", "connection dropped"));
    varied.push_back(
        at_seconds(i, "7", "Svc", "connection " + std::to_string(i)));
  }
  auto hits = scan(group_of(same), default_rules());
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].category == DetectionCategory::repetition_flood);
  CHECK(hits[0].triggering_indices.size() == 20);

  CHECK(scan(group_of(varied), default_rules()).empty());
}

TEST_CASE("scan output is invariant under rule permutation") {
  std::vector<EventRecord> records;
  for (int i = 0; i < 5; ++i)
    records.push_back(at_seconds(i, "4625", "Security", "failed logon error"));
  auto g = group_of(records);

  auto rules = default_rules();
  auto baseline = scan(g, rules);
  std::mt19937 rng(5);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(rules.begin(), rules.end(), rng);
    CHECK(scan(g, rules) == baseline);
  }
}

TEST_CASE("removing records never creates a detection") {
  std::mt19937 rng(23);
  const std::vector<std::string> descs = {"failed logon", "ok", "error x",
                                          "files encrypted", "ransom note"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EventRecord> records;
    const size_t n = 2 + rng() % 20;
    for (size_t i = 0; i < n; ++i)
      records.push_back(at_seconds(rng() % 400, std::to_string(rng() % 3),
                                   "S", descs[rng() % descs.size()]));
    auto g = group_of(records);
    auto full = scan(g, default_rules());
    std::set<std::string> full_rules;
    for (const auto& d : full) full_rules.insert(d.rule_id);

    // Drop one record; no new rule may fire.
    LogGroup smaller = g;
    smaller.records.erase(smaller.records.begin() + (rng() % smaller.records.size()));
    if (smaller.records.size() == 1) smaller.basis = GroupBasis::singleton;
    for (const auto& d : scan(smaller, default_rules()))
      CHECK(full_rules.count(d.rule_id) == 1);
  }
}

TEST_CASE("scan equals the quadratic window oracle on random groups") {
  std::mt19937 rng(99);
  const std::vector<std::string> descs = {
      "failed logon",       "authentication failure", "ok heartbeat",
      "error writing file", "files encrypted",        "ransom demand",
      ".locked extension",  "special privileges",     "crash dump"};
  const std::vector<std::string> ids = {"4625", "4672", "4673", "7", "62"};

  for (int trial = 0; trial < 500; ++trial) {
    std::vector<EventRecord> records;
    const size_t n = rng() % 41;
    for (size_t i = 0; i < n; ++i)
      records.push_back(at_seconds(rng() % 500, ids[rng() % ids.size()], "S",
                                   descs[rng() % descs.size()]));
    if (records.empty()) continue;
    auto g = group_of(records);
    CHECK(scan(g, default_rules()) ==
          testutil::scan_oracle(g, default_rules()));
  }
}

TEST_CASE("rules load from JSON with the Rule field names") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.file("rules.json"), R"([
    {"rule_id": "custom-bf", "category": "brute_force",
     "id_patterns": ["4625"], "text_patterns": ["failed logon"],
     "min_count": 3, "window_seconds": 30}
  ])");
  auto rules = load_rules(tmp.file("rules.json"));
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].rule_id == "custom-bf");
  CHECK(rules[0].min_count == 3);

  testutil::write_file(tmp.file("bad.json"), R"([{"rule_id": "x"}])");
  CHECK_THROWS(load_rules(tmp.file("bad.json")));
  CHECK_THROWS_AS(load_rules(tmp.file("missing.json")), IoError);
}

TEST_CASE("rule invariant requires a pattern") {
  Rule r;
  r.rule_id = "r";
  CHECK_THROWS_AS(validate(r), FormatError);
  r.text_patterns = {"x"};
  CHECK_NOTHROW(validate(r));
}
