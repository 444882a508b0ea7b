#include "loganvil/analyze.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace loganvil::analyze {

const char kDefaultSystemPrompt[] =
    "You are a Windows event log analyser. Analyse the following event "
    "logs. Reply with whether a problem was identified. If a problem is "
    "identified, reply in the format: Problem Identified: ..., How to "
    "resolve: .... If not, reply: No problem identified.";

const char kContinuationPrefix[] = "Previous response: ";
const char kContinuationSuffix[] =
    ". Update your response if there is any additional information; "
    "otherwise keep it the same.";

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (auto& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool starts_with_ci(const std::string& text, const std::string& prefix) {
  return lower(text).rfind(lower(prefix), 0) == 0;
}

size_t find_ci(const std::string& haystack, const std::string& needle) {
  return lower(haystack).find(lower(needle));
}

// Skips separators after a grammar keyword: whitespace, ':', '.', '-',
// and the UTF-8 em dash / ellipsis.
size_t skip_separators(const std::string& s, size_t pos) {
  while (pos < s.size()) {
    const char c = s[pos];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ':' ||
        c == '.' || c == ',' || c == '-') {
      ++pos;
    } else if (s.compare(pos, 3, "\xE2\x80\x94") == 0 ||  // em dash
               s.compare(pos, 3, "\xE2\x80\xA6") == 0) {  // ellipsis
      pos += 3;
    } else {
      break;
    }
  }
  return pos;
}

bool only_punctuation(const std::string& s) {
  for (char c : s)
    if (c != '.' && c != '!' && c != ',' && c != ';' && c != ' ' &&
        c != '\t' && c != '\r' && c != '\n')
      return false;
  return true;
}

// "1) text", "2. text", "3: text" or a bullet line starts a new step.
bool is_step_marker(const std::string& line, std::string& content) {
  size_t i = line.find_first_not_of(" \t");
  if (i == std::string::npos) return false;
  if (line[i] == '-' || line[i] == '*' ||
      line.compare(i, 3, "\xE2\x80\xA2") == 0) {
    size_t skip = line[i] == '-' || line[i] == '*' ? 1 : 3;
    // Require a space so hyphenated prose is not mistaken for a bullet.
    if (i + skip < line.size() && line[i + skip] == ' ') {
      content = trim(line.substr(i + skip));
      return true;
    }
    return false;
  }
  size_t d = i;
  while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d])))
    ++d;
  if (d == i || d >= line.size()) return false;
  if (line[d] != ')' && line[d] != '.' && line[d] != ':') return false;
  content = trim(line.substr(d + 1));
  return true;
}

std::vector<std::string> split_steps(const std::string& section) {
  std::vector<std::string> steps;
  std::istringstream in(section);
  std::string line;
  bool any_marker = false;
  while (std::getline(in, line)) {
    std::string content;
    if (is_step_marker(line, content)) {
      any_marker = true;
      steps.push_back(content);
    } else {
      std::string t = trim(line);
      if (t.empty()) continue;
      if (steps.empty())
        steps.push_back(t);
      else
        steps.back() += " " + t;
    }
  }
  if (!any_marker) {
    // Unnumbered text is a single step.
    std::string whole = trim(section);
    steps.clear();
    if (!whole.empty()) steps.push_back(whole);
  }
  steps.erase(std::remove_if(steps.begin(), steps.end(),
                             [](const std::string& s) { return s.empty(); }),
              steps.end());
  return steps;
}

}  // namespace

void validate(const AnalysisConfig& cfg) {
  if (cfg.chunk_size < 1) throw FormatError("chunk_size must be >= 1");
  if (cfg.max_new_tokens < 1) throw FormatError("max_new_tokens must be >= 1");
}

void validate(const CostModel& m) {
  if (m.seconds_per_request <= 0)
    throw FormatError("seconds_per_request must be > 0");
  if (m.dollars_per_request < 0)
    throw FormatError("dollars_per_request must be >= 0");
}

backend::ChatRequest build_prompt(std::span<const EventRecord> group_slice,
                                  const std::vector<Detection>& detections,
                                  const std::optional<std::string>& prior,
                                  const AnalysisConfig& cfg) {
  if (group_slice.empty()) throw FormatError("group slice must be non-empty");
  validate(cfg);

  std::string content;
  if (cfg.include_detections && !detections.empty()) {
    content += "Pre-detection flags: ";
    for (size_t i = 0; i < detections.size(); ++i) {
      if (i) content += ", ";
      content += to_string(detections[i].category);
    }
    content += "\n";
  }
  for (size_t i = 0; i < group_slice.size(); ++i) {
    if (i) content += "\n";
    content += canonical_render(group_slice[i]);
  }
  if (prior)
    content += std::string("\n") + kContinuationPrefix + *prior +
               kContinuationSuffix;

  backend::ChatRequest req;
  req.system_prompt = cfg.system_prompt;
  req.user_content = std::move(content);
  req.prior_response = prior;
  req.max_new_tokens = cfg.max_new_tokens;
  req.temperature = cfg.temperature;
  return req;
}

AnalysisReport analyze_group(const LogGroup& group, backend::Backend& backend,
                             const std::vector<predetect::Rule>& rules,
                             const AnalysisConfig& cfg) {
  validate(group);
  validate(cfg);

  const auto detections = predetect::scan(group, rules);

  const size_t n = group.records.size();
  const size_t chunk = static_cast<size_t>(cfg.chunk_size);
  const int chunks_used = static_cast<int>((n + chunk - 1) / chunk);

  std::optional<std::string> prior;
  std::string final_text;
  for (size_t off = 0; off < n; off += chunk) {
    const size_t len = std::min(chunk, n - off);
    auto req = build_prompt(
        std::span<const EventRecord>(group.records.data() + off, len),
        detections, prior, cfg);
    final_text = backend.complete(req).text;
    prior = final_text;
  }

  auto parsed = parse_model_output(final_text);
  return AnalysisReport(parsed.problem_identified, std::move(parsed.problem),
                        std::move(parsed.remediation), chunks_used,
                        detections, final_text);
}

ParsedOutput parse_model_output(const std::string& text) {
  const std::string t = trim(text);

  if (starts_with_ci(t, "no problem identified")) {
    const std::string rest = t.substr(std::string("no problem identified").size());
    if (only_punctuation(rest)) return {};
    throw UnparseableOutput("trailing content after no-problem marker");
  }

  if (!starts_with_ci(t, "problem identified"))
    throw UnparseableOutput("output matches neither grammar form");

  size_t pos = skip_separators(t, std::string("problem identified").size());

  // The resolve section header: "How to resolve" per the output grammar;
  // "Recommended Actions" also appears in labeled outputs in the wild.
  size_t header_pos = find_ci(t.substr(pos), "how to resolve");
  size_t header_len = std::string("how to resolve").size();
  size_t alt = find_ci(t.substr(pos), "recommended actions");
  if (alt != std::string::npos &&
      (header_pos == std::string::npos || alt < header_pos)) {
    header_pos = alt;
    header_len = std::string("recommended actions").size();
  }
  if (header_pos == std::string::npos)
    throw UnparseableOutput("missing resolve section");
  header_pos += pos;

  std::string problem = trim(t.substr(pos, header_pos - pos));
  if (problem.empty()) throw UnparseableOutput("empty problem text");

  size_t body = skip_separators(t, header_pos + header_len);
  auto steps = split_steps(t.substr(body));
  if (steps.empty()) throw UnparseableOutput("no remediation steps");

  ParsedOutput out;
  out.problem_identified = true;
  out.problem = std::move(problem);
  out.remediation = std::move(steps);
  return out;
}

Estimate estimate_cost(long long n_items, const CostModel& model) {
  validate(model);
  if (n_items < 0) throw FormatError("n_items must be non-negative");
  return {static_cast<double>(n_items) * model.seconds_per_request,
          static_cast<double>(n_items) * model.dollars_per_request};
}

}  // namespace loganvil::analyze
