#ifndef LOGANVIL_PREDETECT_HPP
#define LOGANVIL_PREDETECT_HPP

#include <string>
#include <vector>

#include "loganvil/core.hpp"

namespace loganvil::predetect {

/// A rule matches records by event id or case-insensitive description
/// substring, and fires when min_count matches fall within a
/// window_seconds span. The id pattern "*" matches any record; for the
/// repetition_flood category, counting is per identical
/// (event_id, description) pair.
struct Rule {
  std::string rule_id;
  DetectionCategory category = DetectionCategory::software_failure;
  std::vector<std::string> id_patterns;
  std::vector<std::string> text_patterns;
  int min_count = 1;
  int window_seconds = 60;
};

void validate(const Rule& r);

/// Built-in rules, one per detection category.
std::vector<Rule> default_rules();

/// Loads rules from a JSON array with the same field names as Rule.
std::vector<Rule> load_rules(const std::string& path);

bool rule_matches(const Rule& rule, const EventRecord& record);

/// Per rule: if min_count or more matching records fall within some
/// window_seconds span, emits one Detection carrying the indices of every
/// matching record that is part of a qualifying span. Output sorted by
/// rule_id.
std::vector<Detection> scan(const LogGroup& group,
                            const std::vector<Rule>& rules);

}  // namespace loganvil::predetect

#endif
