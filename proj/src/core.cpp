#include "loganvil/core.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace loganvil {
namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                  31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

// Howard Hinnant's days-from-civil, shifted to the 1970 epoch.
int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int yr = static_cast<int>(yoe + era * 400);
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = yr + (m <= 2);
}

bool all_digits(const std::string& s, size_t pos, size_t len) {
  if (pos + len > s.size()) return false;
  for (size_t i = pos; i < pos + len; ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

}  // namespace

Timestamp canonical_timestamp(const std::string& text) {
  // Exactly "YYYY-MM-DD HH:MM:SS".
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' ||
      text[10] != ' ' || text[13] != ':' || text[16] != ':' ||
      !all_digits(text, 0, 4) || !all_digits(text, 5, 2) ||
      !all_digits(text, 8, 2) || !all_digits(text, 11, 2) ||
      !all_digits(text, 14, 2) || !all_digits(text, 17, 2)) {
    throw FormatError("invalid timestamp: \"" + text + "\"");
  }
  const int y = std::stoi(text.substr(0, 4));
  const int mo = std::stoi(text.substr(5, 2));
  const int d = std::stoi(text.substr(8, 2));
  const int h = std::stoi(text.substr(11, 2));
  const int mi = std::stoi(text.substr(14, 2));
  const int s = std::stoi(text.substr(17, 2));
  if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h > 23 ||
      mi > 59 || s > 59) {
    throw FormatError("invalid timestamp: \"" + text + "\"");
  }
  return Timestamp::from_epoch_seconds(days_from_civil(y, mo, d) * 86400 +
                                       h * 3600 + mi * 60 + s);
}

std::string Timestamp::to_string() const {
  int64_t days = seconds_ / 86400;
  int64_t rem = seconds_ % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y, mo, d;
  civil_from_days(days, y, mo, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d", y, mo, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

void validate(const EventRecord& r) {
  if (r.event_id.empty()) throw FormatError("event_id must be non-empty");
  if (r.source.empty()) throw FormatError("source must be non-empty");
}

std::string to_string(GroupBasis b) {
  switch (b) {
    case GroupBasis::singleton: return "singleton";
    case GroupBasis::shared_source_window: return "shared-source-window";
    case GroupBasis::shared_machine_window: return "shared-machine-window";
    case GroupBasis::repetition: return "repetition";
  }
  return "singleton";
}

void validate(const LogGroup& g) {
  if (g.records.empty()) throw FormatError("LogGroup must be non-empty");
  for (size_t i = 1; i < g.records.size(); ++i) {
    if (g.records[i].timestamp < g.records[i - 1].timestamp)
      throw FormatError("LogGroup records not chronological");
  }
  if (g.records.size() == 1 && g.basis != GroupBasis::singleton)
    throw FormatError("size-1 LogGroup must have basis singleton");
}

std::string to_string(DetectionCategory c) {
  switch (c) {
    case DetectionCategory::brute_force: return "brute_force";
    case DetectionCategory::privilege_escalation:
      return "privilege_escalation";
    case DetectionCategory::ransomware: return "ransomware";
    case DetectionCategory::repetition_flood: return "repetition_flood";
    case DetectionCategory::software_failure: return "software_failure";
  }
  return "software_failure";
}

DetectionCategory detection_category_from_string(const std::string& s) {
  if (s == "brute_force") return DetectionCategory::brute_force;
  if (s == "privilege_escalation") return DetectionCategory::privilege_escalation;
  if (s == "ransomware") return DetectionCategory::ransomware;
  if (s == "repetition_flood") return DetectionCategory::repetition_flood;
  if (s == "software_failure") return DetectionCategory::software_failure;
  throw FormatError("unknown detection category: " + s);
}

void validate(const Detection& d, size_t group_size) {
  if (d.triggering_indices.empty())
    throw FormatError("Detection must have triggering indices");
  for (size_t i : d.triggering_indices) {
    if (i >= group_size)
      throw FormatError("Detection index out of bounds");
  }
}

AnalysisReport::AnalysisReport(bool problem_identified, std::string problem,
                               std::vector<std::string> remediation,
                               int chunks_used,
                               std::vector<Detection> detections,
                               std::string raw_final_response)
    : problem_identified_(problem_identified),
      problem_(std::move(problem)),
      remediation_(std::move(remediation)),
      chunks_used_(chunks_used),
      detections_(std::move(detections)),
      raw_final_response_(std::move(raw_final_response)) {
  if (!problem_identified_ && (!problem_.empty() || !remediation_.empty()))
    throw FormatError("no-problem report must have empty problem/remediation");
  if (problem_identified_ && (problem_.empty() || remediation_.empty()))
    throw FormatError("problem report must carry problem text and steps");
  if (chunks_used_ < 1) throw FormatError("chunks_used must be positive");
}

std::string to_string(ModelClass c) {
  return c == ModelClass::slm ? "slm" : "llm";
}

ModelClass model_class_from_string(const std::string& s) {
  if (s == "slm") return ModelClass::slm;
  if (s == "llm") return ModelClass::llm;
  throw FormatError("unknown model class: " + s);
}

void validate(const TrainingConfig& c) {
  if (c.epochs != 3) throw FormatError("epochs must be 3");
  if (c.batch_size != 16 && c.batch_size != 4 && c.batch_size != 2)
    throw FormatError("batch_size must be one of 16, 4, 2");
  if (c.max_token_length < 1)
    throw FormatError("max_token_length must be positive");
}

std::string to_string(ChoiceAnswer a) {
  switch (a) {
    case ChoiceAnswer::yes: return "yes";
    case ChoiceAnswer::somewhat: return "somewhat";
    case ChoiceAnswer::no: return "no";
  }
  return "no";
}

ChoiceAnswer choice_answer_from_string(const std::string& s) {
  if (s == "yes") return ChoiceAnswer::yes;
  if (s == "somewhat") return ChoiceAnswer::somewhat;
  if (s == "no") return ChoiceAnswer::no;
  throw FormatError("unknown choice answer: " + s);
}

std::string render_csv_line(const EventRecord& r) {
  return r.timestamp.to_string() + ", " + r.event_id + ", " + r.source +
         ", " + r.description;
}

std::string render_pipe_line(const EventRecord& r) {
  std::string out = r.timestamp.to_string();
  if (r.machine) out += " | Machine=" + *r.machine;
  out += " | ID=" + r.event_id + " | " + r.description;
  return out;
}

std::string canonical_render(const EventRecord& r) {
  return r.machine ? render_pipe_line(r) : render_csv_line(r);
}

}  // namespace loganvil
