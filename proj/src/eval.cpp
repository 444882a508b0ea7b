#include "loganvil/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace loganvil::eval {
namespace {

const std::vector<std::string> kChoicePerModel = {"Q10", "Q11", "Q12",
                                                  "Q14", "Q15", "Q16"};
const std::vector<std::string> kRatingPerModel = {"Q9", "Q13"};

std::string cell(const std::string& s, size_t width) {
  std::string out = s;
  while (out.size() < width) out += ' ';
  return out;
}

}  // namespace

const std::vector<std::string>& Questionnaire::question_ids() {
  static const std::vector<std::string> ids = {
      "Q1", "Q2",  "Q3",  "Q4",  "Q5",  "Q6",  "Q7",  "Q8",
      "Q9", "Q10", "Q11", "Q12", "Q13", "Q14", "Q15", "Q16"};
  return ids;
}

bool Questionnaire::is_valid_id(const std::string& question_id) {
  for (const auto& q : question_ids())
    if (q == question_id) return true;
  return false;
}

QuestionKind Questionnaire::kind(const std::string& question_id) {
  if (!is_valid_id(question_id))
    throw SchemaError("unknown question id: " + question_id);
  return (question_id == "Q9" || question_id == "Q13") ? QuestionKind::rating
                                                       : QuestionKind::choice;
}

bool Questionnaire::per_model(const std::string& question_id) {
  if (!is_valid_id(question_id))
    throw SchemaError("unknown question id: " + question_id);
  return std::stoi(question_id.substr(1)) >= 9;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5) / scale;
}

std::vector<QuestionnaireResponse> load_responses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
  if (!doc.is_array()) throw SchemaError(path + ": expected a JSON array");

  std::vector<QuestionnaireResponse> responses;
  for (const auto& j : doc) {
    QuestionnaireResponse r;
    r.expert_id = j.value("expert_id", "");
    if (r.expert_id.empty())
      throw SchemaError("response missing expert_id");

    for (const auto& a : j.value("choice_answers", nlohmann::json::array())) {
      ChoiceKey key;
      key.question_id = a.at("question").get<std::string>();
      if (a.contains("model") && !a["model"].is_null())
        key.model_name = a["model"].get<std::string>();
      if (Questionnaire::kind(key.question_id) != QuestionKind::choice)
        throw SchemaError(r.expert_id + ": " + key.question_id +
                          " is not a choice question");
      if (Questionnaire::per_model(key.question_id) != key.model_name.has_value())
        throw SchemaError(r.expert_id + ": " + key.question_id +
                          ": model name presence mismatch");
      r.choice_answers.emplace_back(
          key, choice_answer_from_string(a.at("answer").get<std::string>()));
    }

    for (const auto& a : j.value("rating_answers", nlohmann::json::array())) {
      RatingKey key;
      key.question_id = a.at("question").get<std::string>();
      key.model_name = a.at("model").get<std::string>();
      if (Questionnaire::kind(key.question_id) != QuestionKind::rating)
        throw SchemaError(r.expert_id + ": " + key.question_id +
                          " is not a rating question");
      const int score = a.at("score").get<int>();
      if (score < 1 || score > 5)
        throw SchemaError(r.expert_id + ": " + key.question_id +
                          ": score out of 1..5");
      r.rating_answers.emplace_back(key, score);
    }
    responses.push_back(std::move(r));
  }
  return responses;
}

ChoiceAggregate aggregate_choice(
    const std::vector<QuestionnaireResponse>& responses,
    const std::string& question_id,
    const std::optional<std::string>& model_name) {
  if (Questionnaire::kind(question_id) != QuestionKind::choice)
    throw KindMismatch(question_id + " is not a choice question");
  if (Questionnaire::per_model(question_id) && !model_name)
    throw MissingModel(question_id + " requires a model name");

  size_t yes = 0, somewhat = 0, no = 0;
  for (const auto& r : responses) {
    for (const auto& [key, answer] : r.choice_answers) {
      if (key.question_id != question_id || key.model_name != model_name)
        continue;
      switch (answer) {
        case ChoiceAnswer::yes: ++yes; break;
        case ChoiceAnswer::somewhat: ++somewhat; break;
        case ChoiceAnswer::no: ++no; break;
      }
    }
  }
  ChoiceAggregate agg;
  agg.n = yes + somewhat + no;
  if (agg.n > 0) {
    agg.yes_pct = round_half_up(yes * 100.0 / agg.n, 1);
    agg.somewhat_pct = round_half_up(somewhat * 100.0 / agg.n, 1);
    agg.no_pct = round_half_up(no * 100.0 / agg.n, 1);
  }
  return agg;
}

RatingAggregate aggregate_rating(
    const std::vector<QuestionnaireResponse>& responses,
    const std::string& question_id, const std::string& model_name) {
  if (Questionnaire::kind(question_id) != QuestionKind::rating)
    throw KindMismatch(question_id + " is not a rating question");

  long long sum = 0;
  size_t n = 0;
  for (const auto& r : responses) {
    for (const auto& [key, score] : r.rating_answers) {
      if (key.question_id != question_id || key.model_name != model_name)
        continue;
      sum += score;
      ++n;
    }
  }
  RatingAggregate agg;
  agg.n = n;
  if (n > 0) agg.mean = round_half_up(static_cast<double>(sum) / n, 2);
  return agg;
}

std::string format_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", pct);
  std::string s = buf;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, ".0") == 0)
    s.erase(s.size() - 2);
  return s;
}

namespace {

std::string format_mean(double mean) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", mean);
  return buf;
}

}  // namespace

std::string render_report(const std::vector<QuestionnaireResponse>& responses,
                          const std::vector<std::string>& models) {
  std::ostringstream out;
  const size_t w = 12;

  out << "Dataset questions\n";
  out << cell("Question", w) << cell("Yes(%)", w) << cell("Somewhat(%)", w)
      << cell("No(%)", w) << "\n";
  for (int q = 1; q <= 8; ++q) {
    const std::string qid = "Q" + std::to_string(q);
    auto agg = aggregate_choice(responses, qid);
    out << cell(qid, w);
    if (agg.n == 0) {
      out << cell("n/a", w) << cell("n/a", w) << cell("n/a", w);
    } else {
      out << cell(format_pct(agg.yes_pct), w)
          << cell(format_pct(agg.somewhat_pct), w)
          << cell(format_pct(agg.no_pct), w);
    }
    out << "\n";
  }

  out << "\nPer-model choice questions\n";
  for (const auto& model : models) {
    out << "[" << model << "]\n";
    out << cell("Question", w) << cell("Yes(%)", w) << cell("Somewhat(%)", w)
        << cell("No(%)", w) << "\n";
    for (const auto& qid : kChoicePerModel) {
      auto agg = aggregate_choice(responses, qid, model);
      out << cell(qid, w);
      if (agg.n == 0) {
        out << cell("n/a", w) << cell("n/a", w) << cell("n/a", w);
      } else {
        out << cell(format_pct(agg.yes_pct), w)
            << cell(format_pct(agg.somewhat_pct), w)
            << cell(format_pct(agg.no_pct), w);
      }
      out << "\n";
    }
  }

  out << "\nPer-model rating questions (mean of 1-5)\n";
  out << cell("Question", w);
  for (const auto& model : models) out << cell(model, w);
  out << "\n";
  for (const auto& qid : kRatingPerModel) {
    out << cell(qid, w);
    for (const auto& model : models) {
      auto agg = aggregate_rating(responses, qid, model);
      out << cell(agg.n == 0 ? "n/a" : format_mean(agg.mean), w);
    }
    out << "\n";
  }
  return out.str();
}

std::vector<std::string> render_csv(
    const std::vector<QuestionnaireResponse>& responses,
    const std::vector<std::string>& models) {
  std::ostringstream t1, t2, t3;

  t1 << "question,yes_pct,somewhat_pct,no_pct\n";
  for (int q = 1; q <= 8; ++q) {
    const std::string qid = "Q" + std::to_string(q);
    auto agg = aggregate_choice(responses, qid);
    t1 << qid << "," << format_pct(agg.yes_pct) << ","
       << format_pct(agg.somewhat_pct) << "," << format_pct(agg.no_pct)
       << "\n";
  }

  t2 << "question,model,yes_pct,somewhat_pct,no_pct\n";
  for (const auto& qid : kChoicePerModel) {
    for (const auto& model : models) {
      auto agg = aggregate_choice(responses, qid, model);
      t2 << qid << "," << model << "," << format_pct(agg.yes_pct) << ","
         << format_pct(agg.somewhat_pct) << "," << format_pct(agg.no_pct)
         << "\n";
    }
  }

  t3 << "question,model,mean,n\n";
  for (const auto& qid : kRatingPerModel) {
    for (const auto& model : models) {
      auto agg = aggregate_rating(responses, qid, model);
      t3 << qid << "," << model << "," << format_mean(agg.mean) << ","
         << agg.n << "\n";
    }
  }
  return {t1.str(), t2.str(), t3.str()};
}

}  // namespace loganvil::eval
