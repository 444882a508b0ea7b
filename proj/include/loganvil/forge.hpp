#ifndef LOGANVIL_FORGE_HPP
#define LOGANVIL_FORGE_HPP

#include <map>
#include <string>
#include <vector>

#include "loganvil/backend.hpp"
#include "loganvil/core.hpp"

namespace loganvil::forge {

extern const char kDefaultInstruction[];
extern const char kNoProblemOutput[];  // "No problem identified."
extern const char kLabelSystemPrompt[];

/// The stage-1 generation system prompt with the per-batch count filled in.
std::string generation_prompt(int count);

struct ForgeConfig {
  int target_count = 10000;
  int generation_batch = 50;
  std::string instruction_text = kDefaultInstruction;
  std::vector<EventRecord> example_logs;
  int correlated_tail_groups = 4;
};

void validate(const ForgeConfig& cfg);

/// Stage 1: batched synthetic log generation. Each batch sends the
/// generation prompt with the batch count and the example logs as user
/// content, and parses the reply as JSON log objects. Exact duplicate
/// (timestamp, event_id, description) triples are dropped. Throws
/// GenerationExhausted after 10 consecutive unparseable batches.
std::vector<EventRecord> stage1_generate(backend::Backend& backend,
                                         const ForgeConfig& cfg);

/// Stage 2: labels one log line or newline-joined group. The reply must
/// satisfy the output grammar; up to 2 relabel attempts before
/// UnparseableOutput. No-problem replies normalize to kNoProblemOutput.
std::string stage2_label(backend::Backend& backend,
                         const std::string& input_text);

/// One example per record, then exactly correlated_tail_groups group
/// examples at the end. Throws MissingLabel for any unlabeled input.
std::vector<FineTuneExample> assemble_dataset(
    const std::vector<EventRecord>& records,
    const std::vector<LogGroup>& groups,
    const std::map<std::string, std::string>& outputs, const ForgeConfig& cfg);

/// One JSON object per line with exactly the keys "instruction", "input",
/// "output" in that order, UTF-8, LF endings, no trailing blank line.
size_t write_jsonl(const std::vector<FineTuneExample>& examples,
                   const std::string& path);

std::vector<FineTuneExample> read_jsonl(const std::string& path);

struct Violation {
  size_t line = 0;  // 0 for file-level findings
  std::string check;
  std::string detail;
};

struct ValidationReport {
  size_t example_count = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks line-level JSON validity, key-set exactness, instruction
/// uniformity, output-grammar conformance, the size floor, the comma rule
/// on single-log inputs, and that group inputs form a contiguous tail.
ValidationReport validate_dataset(const std::string& path,
                                  size_t min_count = 5000);

/// batch_size 16 for SLMs, 4 for LLMs, 2 for bloom-7b; epochs always 3.
TrainingConfig emit_training_config(const std::string& model_name,
                                    ModelClass model_class,
                                    int max_token_length);

}  // namespace loganvil::forge

#endif
