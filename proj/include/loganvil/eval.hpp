#ifndef LOGANVIL_EVAL_HPP
#define LOGANVIL_EVAL_HPP

#include <optional>
#include <string>
#include <vector>

#include "loganvil/core.hpp"

namespace loganvil::eval {

enum class QuestionKind { choice, rating };

/// The fixed Q1..Q16 questionnaire shape: Q9 and Q13 are 1-5 ratings,
/// everything else is yes/somewhat/no; Q1-Q8 are dataset questions,
/// Q9-Q16 are asked once per model.
struct Questionnaire {
  static const std::vector<std::string>& question_ids();
  static QuestionKind kind(const std::string& question_id);
  static bool per_model(const std::string& question_id);
  static bool is_valid_id(const std::string& question_id);
};

struct ChoiceAggregate {
  double yes_pct = 0.0;
  double somewhat_pct = 0.0;
  double no_pct = 0.0;
  size_t n = 0;
};

struct RatingAggregate {
  double mean = 0.0;
  size_t n = 0;
};

/// Half-up rounding at the final digit; the only rule that reproduces
/// ninths like 44.4/55.6 and 66.7/11.1/22.2.
double round_half_up(double value, int decimals);

std::vector<QuestionnaireResponse> load_responses(const std::string& path);

ChoiceAggregate aggregate_choice(
    const std::vector<QuestionnaireResponse>& responses,
    const std::string& question_id,
    const std::optional<std::string>& model_name = std::nullopt);

RatingAggregate aggregate_rating(
    const std::vector<QuestionnaireResponse>& responses,
    const std::string& question_id, const std::string& model_name);

/// Three plain-text tables: dataset questions, per-model choice
/// questions, per-model rating questions.
std::string render_report(const std::vector<QuestionnaireResponse>& responses,
                          const std::vector<std::string>& models);

/// CSV form of the same three tables, one string per table.
std::vector<std::string> render_csv(
    const std::vector<QuestionnaireResponse>& responses,
    const std::vector<std::string>& models);

/// Percentage cell in the tables' style: one decimal, integral values
/// printed without the decimal ("100", "0", "44.4").
std::string format_pct(double pct);

}  // namespace loganvil::eval

#endif
