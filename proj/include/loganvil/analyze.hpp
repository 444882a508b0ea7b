#ifndef LOGANVIL_ANALYZE_HPP
#define LOGANVIL_ANALYZE_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loganvil/backend.hpp"
#include "loganvil/core.hpp"
#include "loganvil/predetect.hpp"

namespace loganvil::analyze {

extern const char kDefaultSystemPrompt[];
extern const char kContinuationPrefix[];   // "Previous response: "
extern const char kContinuationSuffix[];

struct AnalysisConfig {
  int chunk_size = 7;
  std::string system_prompt = kDefaultSystemPrompt;
  bool include_detections = true;
  int max_new_tokens = 1024;
  double temperature = 0.0;
};

void validate(const AnalysisConfig& cfg);

struct CostModel {
  double seconds_per_request = 1.0;
  double dollars_per_request = 0.0;
};

void validate(const CostModel& m);

/// Assembles one chat request: optional pre-detection preamble, the
/// canonical log lines, and (when continuing a chunked group) the
/// continuation instruction carrying the previous response.
backend::ChatRequest build_prompt(std::span<const EventRecord> group_slice,
                                  const std::vector<Detection>& detections,
                                  const std::optional<std::string>& prior,
                                  const AnalysisConfig& cfg);

/// Runs pre-detection, then either a single completion or the sequential
/// chunked protocol for groups larger than chunk_size. Only the final
/// response is parsed into the report.
AnalysisReport analyze_group(const LogGroup& group, backend::Backend& backend,
                             const std::vector<predetect::Rule>& rules,
                             const AnalysisConfig& cfg);

struct ParsedOutput {
  bool problem_identified = false;
  std::string problem;
  std::vector<std::string> remediation;
};

/// Parses the "Problem Identified ... How to resolve ..." grammar, or the
/// no-problem marker. Steps are renumbered sequentially; throws
/// UnparseableOutput when neither form matches.
ParsedOutput parse_model_output(const std::string& text);

struct Estimate {
  double seconds = 0.0;
  double dollars = 0.0;
};

Estimate estimate_cost(long long n_items, const CostModel& model);

}  // namespace loganvil::analyze

#endif
