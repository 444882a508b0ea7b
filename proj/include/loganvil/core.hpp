#ifndef LOGANVIL_CORE_HPP
#define LOGANVIL_CORE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loganvil {

// Error taxonomy shared across the pipeline.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TimeoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnparseableOutput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GenerationExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingLabel : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct KindMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Naive local date-time with seconds precision. No timezone; comparisons
/// are on the raw calendar value.
class Timestamp {
 public:
  Timestamp() = default;

  int64_t seconds() const { return seconds_; }
  std::string to_string() const;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

  static Timestamp from_epoch_seconds(int64_t s) {
    Timestamp t;
    t.seconds_ = s;
    return t;
  }

 private:
  int64_t seconds_ = 0;  // seconds since 1970-01-01 00:00:00, no zone
};

/// Parses exactly "YYYY-MM-DD HH:MM:SS". Throws FormatError on any other
/// shape, including calendar-invalid dates.
Timestamp canonical_timestamp(const std::string& text);

struct EventRecord {
  Timestamp timestamp;
  std::string event_id;
  std::string source;
  std::optional<std::string> machine;
  std::string description;

  bool operator==(const EventRecord&) const = default;
};

// event_id and source must be non-empty; description may be empty.
void validate(const EventRecord& r);

enum class GroupBasis {
  singleton,
  shared_source_window,
  shared_machine_window,
  repetition,
};

std::string to_string(GroupBasis b);

struct LogGroup {
  int group_id = 0;
  std::vector<EventRecord> records;  // chronological
  GroupBasis basis = GroupBasis::singleton;

  bool operator==(const LogGroup&) const = default;
};

// records non-empty, sorted non-decreasing; size-1 groups are singleton.
void validate(const LogGroup& g);

enum class DetectionCategory {
  brute_force,
  privilege_escalation,
  ransomware,
  repetition_flood,
  software_failure,
};

std::string to_string(DetectionCategory c);
DetectionCategory detection_category_from_string(const std::string& s);

struct Detection {
  DetectionCategory category = DetectionCategory::software_failure;
  std::vector<size_t> triggering_indices;
  std::string rule_id;

  bool operator==(const Detection&) const = default;
};

void validate(const Detection& d, size_t group_size);

class AnalysisReport {
 public:
  AnalysisReport(bool problem_identified, std::string problem,
                 std::vector<std::string> remediation, int chunks_used,
                 std::vector<Detection> detections,
                 std::string raw_final_response);

  bool problem_identified() const { return problem_identified_; }
  const std::string& problem() const { return problem_; }
  const std::vector<std::string>& remediation() const { return remediation_; }
  int chunks_used() const { return chunks_used_; }
  const std::vector<Detection>& detections() const { return detections_; }
  const std::string& raw_final_response() const { return raw_final_response_; }

 private:
  bool problem_identified_;
  std::string problem_;
  std::vector<std::string> remediation_;
  int chunks_used_;
  std::vector<Detection> detections_;
  std::string raw_final_response_;
};

struct FineTuneExample {
  std::string instruction;
  std::string input;
  std::string output;

  bool operator==(const FineTuneExample&) const = default;
};

enum class ModelClass { slm, llm };

std::string to_string(ModelClass c);
ModelClass model_class_from_string(const std::string& s);

struct TrainingConfig {
  std::string model_name;
  ModelClass model_class = ModelClass::slm;
  int batch_size = 16;
  int epochs = 3;
  std::string method = "lora";
  int max_token_length = 4096;
};

// epochs = 3 and batch_size in {16, 4, 2}.
void validate(const TrainingConfig& c);

enum class ChoiceAnswer { yes, somewhat, no };

std::string to_string(ChoiceAnswer a);
ChoiceAnswer choice_answer_from_string(const std::string& s);

struct ChoiceKey {
  std::string question_id;               // "Q1".."Q16"
  std::optional<std::string> model_name; // required for Q9..Q16

  friend auto operator<=>(const ChoiceKey&, const ChoiceKey&) = default;
};

struct RatingKey {
  std::string question_id;
  std::string model_name;

  friend auto operator<=>(const RatingKey&, const RatingKey&) = default;
};

struct QuestionnaireResponse {
  std::string expert_id;
  std::vector<std::pair<ChoiceKey, ChoiceAnswer>> choice_answers;
  std::vector<std::pair<RatingKey, int>> rating_answers;  // scores 1..5
};

/// Canonical single-line rendering: pipe style when a machine is present,
/// csv style otherwise (the two shapes the pipeline ingests).
std::string canonical_render(const EventRecord& r);

std::string render_csv_line(const EventRecord& r);
std::string render_pipe_line(const EventRecord& r);

}  // namespace loganvil

#endif
