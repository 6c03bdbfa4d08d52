#include <doctest.h>

#include <random>

#include "mmad/error.hpp"
#include "mmad/mqm.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace mmad;
using namespace mmad::test;

namespace {

std::vector<ErrorAnnotation> counts(int n_major, int n_minor) {
  std::vector<ErrorAnnotation> out;
  for (int i = 0; i < n_major; ++i) out.push_back(major("m" + std::to_string(i), "accuracy/mistranslation"));
  for (int i = 0; i < n_minor; ++i) out.push_back(minor("n" + std::to_string(i), "fluency/grammar"));
  return out;
}

}  // namespace

TEST_CASE("mqm_score worked values") {
  CHECK(mqm_score(counts(2, 3)) == -13.0);
  CHECK(mqm_score(std::vector<ErrorAnnotation>{}) == 0.0);
  CHECK(mqm_score(counts(0, 4)) == -4.0);
  CHECK(mqm_score(counts(6, 0)) == -25.0);
  CHECK(mqm_score(counts(5, 0)) == -25.0);
  CHECK(mqm_score(counts(4, 6)) == -25.0);
}

TEST_CASE("mqm_score special categories") {
  auto nt = ann("all", "non-translation", Severity::major);
  CHECK(mqm_score(std::vector{nt}) == -25.0);
  auto ne = ann("x", "no-error", std::nullopt);
  CHECK(mqm_score(std::vector{ne, ne}) == 0.0);
  auto unsev = ann("x", "fluency/grammar", std::nullopt);
  CHECK(mqm_score(std::vector{unsev}) == -1.0);
}

TEST_CASE("custom weights") {
  ScoreWeights w{10, 2, -50};
  CHECK(mqm_score(counts(2, 3), w) == -26.0);
  CHECK_THROWS_AS((ScoreWeights{1, 2, -25}).validate(), InvalidInput);
  CHECK_THROWS_AS((ScoreWeights{5, 1, 1}).validate(), InvalidInput);
  CHECK_THROWS_AS((ScoreWeights{5, -1, -25}).validate(), InvalidInput);
}

TEST_CASE("quality buckets") {
  CHECK(classify_quality_bucket(0) == QualityBucket::HQ);
  CHECK(classify_quality_bucket(-3) == QualityBucket::MQ);
  CHECK(classify_quality_bucket(-4.999) == QualityBucket::MQ);
  CHECK(classify_quality_bucket(-5) == QualityBucket::LQ);
  CHECK(classify_quality_bucket(-25) == QualityBucket::LQ);
  CHECK(classify_quality_bucket(-0.0) == QualityBucket::HQ);
  CHECK_THROWS_AS(classify_quality_bucket(1), InvalidInput);
}

TEST_CASE("category parsing") {
  CHECK(CategoryPath::parse("terminology/inappropriate for context").str() ==
        "terminology/inappropriate-for-context");
  CHECK(CategoryPath::parse("style/unnatural or awkward").str() == "style/awkward");
  CHECK(CategoryPath::parse("Non-translation").top == TopCategory::non_translation);
  CHECK(CategoryPath::parse("Accuracy/Mistranslation").str() == "accuracy/mistranslation");
  std::vector<std::string> w;
  CHECK(CategoryPath::parse("weirdness", &w).top == TopCategory::other);
  CHECK(w.size() == 1);
  CHECK(CategoryPath::parse("accuracy/awkward").is_legal() == false);
  CHECK(CategoryPath::parse("accuracy/omission").is_legal());
}

TEST_CASE("dimensions map to their top categories") {
  CHECK(top_category_of(Dimension::accuracy) == TopCategory::accuracy);
  CHECK(top_category_of(Dimension::style) == TopCategory::style);
  CHECK(parse_dimension("terminology") == Dimension::terminology);
  CHECK_FALSE(parse_dimension("locale_convention").has_value());
}

TEST_CASE("validate_annotation") {
  const auto u = case_study::unit();
  CHECK(validate_annotation(minor("the 12 number", "fluency/grammar"), u).empty());
  CHECK(validate_annotation(minor("zzz", "fluency/grammar"), u).size() == 1);
  CHECK(validate_annotation(minor("the 12 number", "accuracy/awkward"), u).size() == 1);
  CHECK(validate_annotation(ann("the 12 number", "fluency/grammar", std::nullopt), u).size() == 1);
  CHECK(validate_annotation(minor("真钻石", "accuracy/mistranslation"), u).empty());
  CHECK(validate_annotation(ann("all", "fluency/grammar", Severity::minor), u).size() == 1);
}

TEST_CASE("set invariants") {
  auto nt = ann("all", "non-translation", Severity::major);
  CHECK(set_of({nt}).invariant_violations().empty());
  CHECK_FALSE(set_of({nt, minor("x", "fluency/grammar")}).invariant_violations().empty());
  CHECK_FALSE(set_of({nt, nt}).invariant_violations().empty());
}

TEST_CASE("same_annotations is order-insensitive multiset equality") {
  auto a = minor("a", "fluency/grammar");
  auto b = major("b", "accuracy/omission");
  CHECK(same_annotations(std::vector{a, b}, std::vector{b, a}));
  CHECK_FALSE(same_annotations(std::vector{a, a, b}, std::vector{a, b, b}));
  CHECK_FALSE(same_annotations(std::vector{a}, std::vector{a, a}));
  ErrorAnnotation tagged = a;
  tagged.dimension_origin = Dimension::fluency;
  CHECK(same_annotations(std::vector{a}, std::vector{tagged}));
}

TEST_CASE("normalize_span") {
  CHECK(normalize_span("  The Watch \t") == "the watch");
  CHECK(normalize_span("ÄBC") == "Äbc");  // ASCII-only fold
}

TEST_CASE("scoring properties hold on random lists") {
  std::mt19937 rng(7);
  const char* cats[] = {"accuracy/mistranslation", "fluency/grammar", "style/awkward", "terminology",
                        "no-error", "other"};
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<ErrorAnnotation> list;
    const int n = static_cast<int>(rng() % 9);
    for (int i = 0; i < n; ++i) {
      list.push_back(ann("s" + std::to_string(rng() % 5), cats[rng() % 6],
                         rng() % 2 ? Severity::major : Severity::minor));
    }
    const double s = mqm_score(list);
    CHECK(s == oracle::mqm_score(list));
    CHECK(s <= 0.0);
    CHECK(s >= -25.0);
    auto shuffled = list;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(mqm_score(shuffled) == s);
    auto more = list;
    more.push_back(ann("extra", cats[rng() % 6], rng() % 2 ? Severity::major : Severity::minor));
    CHECK(mqm_score(more) <= s);
  }
}
