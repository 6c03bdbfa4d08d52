#include <doctest.h>

#include <random>

#include "mmad/codec.hpp"
#include "mmad/error.hpp"
#include "support/fixtures.hpp"

using namespace mmad;
using namespace mmad::test;

TEST_CASE("decode the accuracy few-shot payload") {
  const auto d = decode_annotation_payload(
      R"({"annotations":[{"error_span": "Factory direct production", "category": "accuracy/mistranslation", "severity": "major"}, {"error_span": "agent wholesale", "category": "accuracy/mistranslation", "severity": "major"}]})");
  REQUIRE(d.annotations.size() == 2);
  for (const auto& a : d.annotations) {
    CHECK(a.category.str() == "accuracy/mistranslation");
    CHECK(a.severity == Severity::major);
  }
  CHECK(d.annotations[1].span.text == "agent wholesale");
}

TEST_CASE("empty payload") {
  CHECK(decode_annotation_payload(R"({"annotations": []})").annotations.empty());
}

TEST_CASE("non-translation spans the whole segment") {
  const auto d = decode_annotation_payload(
      R"({"annotations": [{"error_span": "all", "category": "non-translation", "severity": "major", "is_source_error": "no"}]})");
  REQUIRE(d.annotations.size() == 1);
  CHECK(d.annotations[0].span.all);
  CHECK(d.annotations[0].is_non_translation());
}

TEST_CASE("non-translation evicts its neighbours") {
  const auto d = decode_annotation_payload(
      R"({"annotations": [{"error_span": "x", "category": "fluency/grammar", "severity": "minor"}, {"error_span": "all", "category": "non-translation", "severity": "major"}]})");
  REQUIRE(d.annotations.size() == 1);
  CHECK(d.annotations[0].is_non_translation());
  CHECK_FALSE(d.warnings.empty());
}

TEST_CASE("payload located in prose and code fences") {
  const auto fenced = decode_annotation_payload(
      "Here is my answer.\n```json\n{\"annotations\": [{\"error_span\": \"a\", \"category\": \"style/awkward\", "
      "\"severity\": \"minor\"}]}\n```\nThanks.");
  CHECK(fenced.annotations.size() == 1);
  const auto prose = decode_annotation_payload(
      "I considered {\"annotations\": []} first, but the final answer is {\"annotations\": [{\"error_span\": \"b\", "
      "\"category\": \"fluency/spelling\", \"severity\": \"minor\"}]}");
  REQUIRE(prose.annotations.size() == 1);
  CHECK(prose.annotations[0].span.text == "b");
}

TEST_CASE("the bracketless schema printed in the prompts is accepted") {
  const auto d = decode_annotation_payload(
      R"({"annotations":{"error_span": "a", "category": "accuracy/addition", "severity": "major"},{"error_span": "b", "category": "accuracy/omission", "severity": "minor"}})");
  CHECK(d.annotations.size() == 2);
}

TEST_CASE("judge analysis is kept verbatim") {
  const auto d = decode_annotation_payload(R"({"analysis": "both are minor", "annotations": []})");
  REQUIRE(d.analysis.has_value());
  CHECK(*d.analysis == "both are minor");
}

TEST_CASE("undecodable text throws ParseError with the raw text") {
  try {
    decode_annotation_payload("I think the translation is fine.");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.raw() == "I think the translation is fine.");
  }
  CHECK_THROWS_AS(decode_annotation_payload("{\"annotations\": 5}"), ParseError);
}

TEST_CASE("score tag") {
  CHECK(extract_score_tag("…The final score for this translation is -5-5-1-1-1-1-1=-15. <score>-15</score>") == -15);
  CHECK(extract_score_tag("<score>0</score>") == 0);
  CHECK(extract_score_tag("<score>-3</score> then <score> -7 </score>") == -7);
  CHECK_THROWS_AS(extract_score_tag("no tag here"), ParseError);
  CHECK_THROWS_AS(extract_score_tag("<score>-1.5</score>"), ParseError);
  CHECK_THROWS_AS(extract_score_tag("<score></score>"), ParseError);
}

TEST_CASE("yes/no verdicts") {
  CHECK(extract_yes_no("yes"));
  CHECK(extract_yes_no("Yes, they agree."));
  CHECK_FALSE(extract_yes_no("No."));
  CHECK_FALSE(extract_yes_no("I cannot decide"));
  CHECK_FALSE(extract_yes_no("yes or no"));
  CHECK_FALSE(extract_yes_no("eyes nothing"));
}

TEST_CASE("GEMBA sections") {
  const auto a = parse_gemba_sections(
      "Critical:\nno-error\nMajor:\naccuracy/mistranslation - \"involvement\"\naccuracy/omission - \"the account "
      "holder\"\nMinor:\nfluency/grammar - \"wäre\"\nfluency/register - \"dir\"");
  REQUIRE(a.annotations.size() == 4);
  CHECK(a.annotations[0].severity == Severity::major);
  CHECK(a.annotations[1].span.text == "the account holder");
  CHECK(a.annotations[3].severity == Severity::minor);
  CHECK(mqm_score(a) == -12.0);

  CHECK(parse_gemba_sections("Critical:\nno-error\nMajor:\nno-error\nMinor:\nno-error").annotations.empty());

  const auto c = parse_gemba_sections(
      "Critical:\naccuracy/addition - \"of high-speed rail\"\nMajor:\naccuracy/mistranslation - \"go to the "
      "reviews\"\nMinor:\nstyle/awkward - \"etc.,\"");
  REQUIRE(c.annotations.size() == 3);
  CHECK(c.annotations[0].severity == Severity::major);
  CHECK(c.annotations[1].severity == Severity::major);
  CHECK(c.annotations[2].severity == Severity::minor);
  CHECK(c.annotations[2].span.text == "etc.,");

  CHECK_THROWS_AS(parse_gemba_sections("looks good to me"), ParseError);
}

TEST_CASE("GEMBA non-translation line") {
  const auto s = parse_gemba_sections("Critical:\nnon-translation\nMajor:\nno-error\nMinor:\nno-error");
  REQUIRE(s.annotations.size() == 1);
  CHECK(s.annotations[0].is_non_translation());
  CHECK(mqm_score(s) == -25.0);
}

TEST_CASE("EAPrompt lists") {
  const auto l = parse_eaprompt_lists(case_study::eaprompt_output());
  CHECK(l.found);
  REQUIRE(l.annotations.size() == 5);
  CHECK(l.annotations[0].span.text == "the 12 number");
  CHECK(l.annotations[1].category.top == TopCategory::terminology);
  CHECK(l.annotations[4].category.str() == "style/awkward");
  CHECK(mqm_score(l.annotations) == -13.0);

  const auto none = parse_eaprompt_lists("Major errors:\nNone\nMinor errors:\nNone\n<score>0</score>");
  CHECK(none.found);
  CHECK(none.annotations.empty());
  CHECK_FALSE(parse_eaprompt_lists("fine").found);
}

TEST_CASE("payload round trip on random sets") {
  std::mt19937 rng(11);
  const char* cats[] = {"accuracy/mistranslation", "accuracy/omission", "fluency/grammar", "fluency/spelling",
                        "terminology/inappropriate-for-context", "style/awkward", "locale-convention/date-format",
                        "other"};
  const char* words[] = {"the", "watch", "12", "dial", "Preis", "钻石", "é", "a b"};
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<ErrorAnnotation> anns;
    if (rng() % 20 == 0) {
      anns.push_back(major("all", "non-translation"));
    } else {
      const int n = static_cast<int>(rng() % 6);
      for (int i = 0; i < n; ++i) {
        std::string span = words[rng() % 8];
        span += std::string(" ") + words[rng() % 8];
        auto a = ann(span, cats[rng() % 8], rng() % 2 ? Severity::major : Severity::minor);
        a.is_source_error = rng() % 4 == 0;
        anns.push_back(a);
      }
    }
    const auto text = encode_annotation_payload(anns);
    const auto back = decode_annotation_payload(text);
    REQUIRE(back.annotations.size() == anns.size());
    for (std::size_t i = 0; i < anns.size(); ++i) CHECK(back.annotations[i] == anns[i]);
    CHECK(back.warnings.empty());
  }
}
