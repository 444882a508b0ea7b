#include "loganvil/predetect.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace loganvil::predetect {
namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
  return lower(haystack).find(lower(needle)) != std::string::npos;
}

// Marks every index participating in a window of >= min_count matches.
// `indices` are positions into the group, with chronological timestamps.
std::set<size_t> qualifying_indices(const std::vector<size_t>& indices,
                                    const std::vector<int64_t>& times,
                                    int min_count, int window_seconds) {
  std::set<size_t> out;
  const size_t k = indices.size();
  size_t hi = 0;
  for (size_t lo = 0; lo < k; ++lo) {
    if (hi < lo) hi = lo;
    while (hi + 1 < k && times[hi + 1] - times[lo] <= window_seconds) ++hi;
    if (static_cast<int>(hi - lo + 1) >= min_count)
      for (size_t x = lo; x <= hi; ++x) out.insert(indices[x]);
  }
  return out;
}

}  // namespace

void validate(const Rule& r) {
  if (r.rule_id.empty()) throw FormatError("rule_id must be non-empty");
  if (r.id_patterns.empty() && r.text_patterns.empty())
    throw FormatError("rule needs at least one pattern");
  if (r.min_count < 1) throw FormatError("min_count must be positive");
  if (r.window_seconds < 1) throw FormatError("window_seconds must be positive");
}

std::vector<Rule> default_rules() {
  std::vector<Rule> rules = {
      {"brute-force-logon",
       DetectionCategory::brute_force,
       {"4625"},
       {"failed logon", "authentication failure"},
       5,
       60},
      {"privilege-escalation",
       DetectionCategory::privilege_escalation,
       {"4672", "4673", "4674"},
       {"special privileges"},
       1,
       60},
      {"ransomware-indicators",
       DetectionCategory::ransomware,
       {},
       {"encrypted", "ransom", ".locked"},
       3,
       300},
      {"repetition-flood",
       DetectionCategory::repetition_flood,
       {"*"},
       {},
       20,
       60},
      {"software-failure",
       DetectionCategory::software_failure,
       {},
       {"error", "crash", "fatal"},
       1,
       60},
  };
  for (const auto& r : rules) validate(r);
  return rules;
}

std::vector<Rule> load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (!doc.is_array()) throw FormatError(path + ": rules file must be an array");

  std::vector<Rule> rules;
  for (const auto& j : doc) {
    Rule r;
    r.rule_id = j.at("rule_id").get<std::string>();
    r.category = detection_category_from_string(j.at("category").get<std::string>());
    if (j.contains("id_patterns"))
      r.id_patterns = j["id_patterns"].get<std::vector<std::string>>();
    if (j.contains("text_patterns"))
      r.text_patterns = j["text_patterns"].get<std::vector<std::string>>();
    if (j.contains("min_count")) r.min_count = j["min_count"].get<int>();
    if (j.contains("window_seconds"))
      r.window_seconds = j["window_seconds"].get<int>();
    validate(r);
    rules.push_back(std::move(r));
  }
  return rules;
}

bool rule_matches(const Rule& rule, const EventRecord& record) {
  for (const auto& p : rule.id_patterns)
    if (p == "*" || p == record.event_id) return true;
  for (const auto& p : rule.text_patterns)
    if (contains_ci(record.description, p)) return true;
  return false;
}

std::vector<Detection> scan(const LogGroup& group,
                            const std::vector<Rule>& rules) {
  std::vector<Detection> detections;
  for (const auto& rule : rules) {
    validate(rule);
    std::set<size_t> fired;

    if (rule.category == DetectionCategory::repetition_flood) {
      // Count per identical (event_id, description) pair.
      std::map<std::pair<std::string, std::string>, std::vector<size_t>> keyed;
      for (size_t i = 0; i < group.records.size(); ++i)
        if (rule_matches(rule, group.records[i]))
          keyed[{group.records[i].event_id, group.records[i].description}]
              .push_back(i);
      for (const auto& [key, idxs] : keyed) {
        std::vector<int64_t> times;
        for (size_t i : idxs)
          times.push_back(group.records[i].timestamp.seconds());
        auto q = qualifying_indices(idxs, times, rule.min_count,
                                    rule.window_seconds);
        fired.insert(q.begin(), q.end());
      }
    } else {
      std::vector<size_t> idxs;
      std::vector<int64_t> times;
      for (size_t i = 0; i < group.records.size(); ++i) {
        if (rule_matches(rule, group.records[i])) {
          idxs.push_back(i);
          times.push_back(group.records[i].timestamp.seconds());
        }
      }
      fired = qualifying_indices(idxs, times, rule.min_count,
                                 rule.window_seconds);
    }

    if (!fired.empty()) {
      Detection d;
      d.category = rule.category;
      d.rule_id = rule.rule_id;
      d.triggering_indices.assign(fired.begin(), fired.end());
      validate(d, group.records.size());
      detections.push_back(std::move(d));
    }
  }
  std::sort(detections.begin(), detections.end(),
            [](const Detection& a, const Detection& b) {
              return a.rule_id < b.rule_id;
            });
  return detections;
}

}  // namespace loganvil::predetect
