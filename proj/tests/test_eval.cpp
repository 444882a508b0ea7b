#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "eval_fixture.hpp"
#include "loganvil/eval.hpp"
#include "test_util.hpp"

using namespace loganvil;
using namespace loganvil::eval;

TEST_CASE("questionnaire shape") {
  CHECK(Questionnaire::kind("Q9") == QuestionKind::rating);
  CHECK(Questionnaire::kind("Q13") == QuestionKind::rating);
  CHECK(Questionnaire::kind("Q1") == QuestionKind::choice);
  CHECK(Questionnaire::kind("Q15") == QuestionKind::choice);
  CHECK_FALSE(Questionnaire::per_model("Q8"));
  CHECK(Questionnaire::per_model("Q9"));
  CHECK_THROWS_AS(Questionnaire::kind("Q17"), SchemaError);
}

TEST_CASE("published dataset cells reproduce from 9-expert counts") {
  auto responses = evalfixture::nine_expert_fixture();

  auto q2 = aggregate_choice(responses, "Q2");
  CHECK(q2.yes_pct == 44.4);
  CHECK(q2.somewhat_pct == 55.6);
  CHECK(q2.no_pct == 0.0);

  auto q1 = aggregate_choice(responses, "Q1");
  CHECK(q1.yes_pct == 100.0);
  CHECK(q1.somewhat_pct == 0.0);
  CHECK(q1.no_pct == 0.0);
}

TEST_CASE("per-model choice cell from the published table") {
  auto responses = evalfixture::nine_expert_fixture();
  auto agg = aggregate_choice(responses, "Q15", std::string("bloom-4b"));
  CHECK(agg.yes_pct == 66.7);
  CHECK(agg.somewhat_pct == 11.1);
  CHECK(agg.no_pct == 22.2);
}

TEST_CASE("rating aggregation half-up to two decimals") {
  QuestionnaireResponse r;
  r.expert_id = "e";
  std::vector<QuestionnaireResponse> responses;
  for (int score : {5, 5, 5, 5, 4, 4, 4, 3, 3}) {  // sum 38
    QuestionnaireResponse resp;
    resp.expert_id = "e";
    resp.rating_answers.push_back({{"Q9", "gemma-4b"}, score});
    responses.push_back(resp);
  }
  CHECK(aggregate_rating(responses, "Q9", "gemma-4b").mean == 4.22);

  responses.clear();
  for (int score : {2, 2, 2, 2, 2, 2, 2, 1, 1}) {  // sum 16
    QuestionnaireResponse resp;
    resp.expert_id = "e";
    resp.rating_answers.push_back({{"Q9", "bloom-7b"}, score});
    responses.push_back(resp);
  }
  CHECK(aggregate_rating(responses, "Q9", "bloom-7b").mean == 1.78);

  responses.clear();
  for (int i = 0; i < 4; ++i) {
    QuestionnaireResponse resp;
    resp.expert_id = "e";
    resp.rating_answers.push_back({{"Q13", "m"}, 1});
    responses.push_back(resp);
  }
  CHECK(aggregate_rating(responses, "Q13", "m").mean == 1.00);
}

TEST_CASE("kind and model mismatches") {
  auto responses = evalfixture::nine_expert_fixture();
  CHECK_THROWS_AS(aggregate_choice(responses, "Q9", std::string("gemma-4b")),
                  KindMismatch);
  CHECK_THROWS_AS(aggregate_choice(responses, "Q10"), MissingModel);
  CHECK_THROWS_AS(aggregate_rating(responses, "Q10", "gemma-4b"), KindMismatch);
}

TEST_CASE("choice percentages are ninths and sum to ~100") {
  auto responses = evalfixture::nine_expert_fixture();
  for (const auto& [qid, per_model] : evalfixture::per_model_counts()) {
    for (const auto& model : evalfixture::models()) {
      auto agg = aggregate_choice(responses, qid, model);
      for (double pct : {agg.yes_pct, agg.somewhat_pct, agg.no_pct}) {
        bool is_ninth = false;
        for (int k = 0; k <= 9; ++k)
          if (std::abs(pct - round_half_up(k * 100.0 / 9.0, 1)) < 0.05)
            is_ninth = true;
        CHECK(is_ninth);
      }
      CHECK(std::abs(agg.yes_pct + agg.somewhat_pct + agg.no_pct - 100.0) <=
            0.2);
    }
  }
}

TEST_CASE("aggregate_choice is permutation invariant") {
  auto responses = evalfixture::nine_expert_fixture();
  auto baseline = aggregate_choice(responses, "Q12", std::string("gemma-7b"));
  std::mt19937 rng(2);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(responses.begin(), responses.end(), rng);
    auto agg = aggregate_choice(responses, "Q12", std::string("gemma-7b"));
    CHECK(agg.yes_pct == baseline.yes_pct);
    CHECK(agg.somewhat_pct == baseline.somewhat_pct);
    CHECK(agg.no_pct == baseline.no_pct);
  }
}

TEST_CASE("reverse-engineering closure on every published cell") {
  auto responses = evalfixture::nine_expert_fixture();
  for (const auto& [qid, rows] : evalfixture::per_model_published()) {
    for (size_t m = 0; m < evalfixture::models().size(); ++m) {
      auto agg = aggregate_choice(responses, qid, evalfixture::models()[m]);
      CHECK(agg.yes_pct == rows[m][0]);
      CHECK(agg.somewhat_pct == rows[m][1]);
      CHECK(agg.no_pct == rows[m][2]);
    }
  }
  for (const auto& [qid, means] : evalfixture::rating_published()) {
    for (size_t m = 0; m < evalfixture::models().size(); ++m) {
      auto agg = aggregate_rating(responses, qid, evalfixture::models()[m]);
      CHECK(agg.mean == means[m]);
      CHECK(agg.n == 9);
    }
  }
}

TEST_CASE("load_responses round trip and schema errors") {
  testutil::TempDir tmp;

  testutil::write_file(tmp.file("ok.json"), R"([
    {"expert_id": "e1",
     "choice_answers": [
       {"question": "Q1", "answer": "yes"},
       {"question": "Q10", "model": "gemma-4b", "answer": "somewhat"}],
     "rating_answers": [
       {"question": "Q9", "model": "gemma-4b", "score": 4}]}
  ])");
  auto responses = load_responses(tmp.file("ok.json"));
  REQUIRE(responses.size() == 1);
  CHECK(responses[0].choice_answers.size() == 2);
  CHECK(responses[0].rating_answers.size() == 1);

  testutil::write_file(tmp.file("empty.json"), "[]");
  CHECK(load_responses(tmp.file("empty.json")).empty());

  testutil::write_file(tmp.file("score6.json"), R"([
    {"expert_id": "e1", "rating_answers":
      [{"question": "Q9", "model": "m", "score": 6}]}
  ])");
  CHECK_THROWS_AS(load_responses(tmp.file("score6.json")), SchemaError);

  testutil::write_file(tmp.file("modelless.json"), R"([
    {"expert_id": "e1", "choice_answers":
      [{"question": "Q10", "answer": "yes"}]}
  ])");
  CHECK_THROWS_AS(load_responses(tmp.file("modelless.json")), SchemaError);

  CHECK_THROWS_AS(load_responses(tmp.file("gone.json")), IoError);
}

TEST_CASE("render_report carries the published cell strings") {
  auto responses = evalfixture::nine_expert_fixture();
  auto text = render_report(responses, evalfixture::models());

  CHECK(text.find("Q2") != std::string::npos);
  CHECK(text.find("44.4") != std::string::npos);
  CHECK(text.find("55.6") != std::string::npos);
  CHECK(text.find("100") != std::string::npos);
  CHECK(text.find("4.22") != std::string::npos);
  CHECK(text.find("1.78") != std::string::npos);
  // integral percentages print without a trailing ".0"
  CHECK(text.find("100.0") == std::string::npos);
}

TEST_CASE("render_report with no responses uses n/a") {
  auto text = render_report({}, {"gemma-4b"});
  CHECK(text.find("n/a") != std::string::npos);
}

TEST_CASE("render_report single model keeps the rating table narrow") {
  auto responses = evalfixture::nine_expert_fixture();
  auto text = render_report(responses, {"gemma-4b"});
  CHECK(text.find("gemma-4b") != std::string::npos);
  CHECK(text.find("bloom-7b") == std::string::npos);
}

TEST_CASE("csv rendering produces three tables") {
  auto responses = evalfixture::nine_expert_fixture();
  auto tables = render_csv(responses, evalfixture::models());
  REQUIRE(tables.size() == 3);
  CHECK(tables[0].rfind("question,", 0) == 0);
  CHECK(tables[1].find("Q15,bloom-4b,66.7,11.1,22.2") != std::string::npos);
  CHECK(tables[2].find("Q9,gemma-4b,4.22,9") != std::string::npos);
}
