#pragma once

// MQM domain model: translation units, error annotations, the category
// hierarchy and the deterministic scoring rules shared by every stage.

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmad {

/// Identity of one translated segment within a dataset.
struct UnitKey {
  std::string language_pair;
  std::string system_id;
  std::string doc_id;
  std::string seg_id;

  auto operator<=>(const UnitKey&) const = default;
  bool operator==(const UnitKey&) const = default;

  /// "lp/system/doc/seg", used in tags and messages.
  std::string str() const;
};

struct TranslationUnit {
  std::string language_pair;
  std::string doc_id;
  std::string seg_id;
  std::string system_id;
  std::string source_text;
  std::string hypothesis_text;
  std::optional<std::string> reference_text;

  UnitKey key() const { return {language_pair, system_id, doc_id, seg_id}; }
};

enum class Severity { minor, major };

std::string_view to_string(Severity s);
/// Accepts minor/major and folds GEMBA's "critical" into major.
std::optional<Severity> parse_severity(std::string_view text);

enum class TopCategory {
  accuracy,
  fluency,
  terminology,
  style,
  locale_convention,
  other,
  source_error,
  non_translation,
  no_error,
};

std::string_view to_string(TopCategory c);
std::optional<TopCategory> parse_top_category(std::string_view text);

/// Legal subcategories of `top`; empty for categories that take none.
std::span<const std::string_view> legal_subcategories(TopCategory top);

struct CategoryPath {
  TopCategory top = TopCategory::other;
  std::string sub;  // empty when absent

  bool is_legal() const;
  /// "top" or "top/sub".
  std::string str() const;

  /// Normalizes free-form model text ("terminology/inappropriate for context",
  /// "style/unnatural or awkward", "Non-translation", ...). Unknown top-level
  /// text maps to `other` and appends a warning. Known top with an unknown
  /// sub keeps the (normalized) sub so validation can flag it.
  static CategoryPath parse(std::string_view text, std::vector<std::string>* warnings = nullptr);

  bool operator==(const CategoryPath&) const = default;
  auto operator<=>(const CategoryPath&) const = default;
};

/// The four evaluation dimensions; locale convention and non-translation
/// are never dimensions.
enum class Dimension { accuracy, fluency, terminology, style };

inline constexpr Dimension kAllDimensions[] = {Dimension::accuracy, Dimension::fluency,
                                               Dimension::terminology, Dimension::style};

std::string_view to_string(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view text);
TopCategory top_category_of(Dimension d);

/// Error span text, or the whole-segment sentinel used by non-translation.
struct ErrorSpan {
  std::string text;
  bool all = false;

  static ErrorSpan whole_segment() { return {"", true}; }
  static ErrorSpan of(std::string text) { return {std::move(text), false}; }

  bool operator==(const ErrorSpan&) const = default;
  auto operator<=>(const ErrorSpan&) const = default;
};

struct ErrorAnnotation {
  ErrorSpan span;
  CategoryPath category;
  std::optional<Severity> severity;
  bool is_source_error = false;
  std::optional<Dimension> dimension_origin;  // provenance only

  bool is_non_translation() const { return category.top == TopCategory::non_translation; }
  bool is_no_error() const { return category.top == TopCategory::no_error; }

  /// Equality ignores dimension_origin.
  bool operator==(const ErrorAnnotation& o) const {
    return span == o.span && category == o.category && severity == o.severity &&
           is_source_error == o.is_source_error;
  }
};

enum class Provenance { stage1, debate, judge, gemba, eaprompt, gold };

std::string_view to_string(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view text);

struct AnnotationSet {
  UnitKey unit_key;
  std::vector<ErrorAnnotation> annotations;
  Provenance provenance = Provenance::stage1;

  bool empty() const { return annotations.empty(); }
  std::size_t size() const { return annotations.size(); }
  bool has_non_translation() const;
  /// Human-readable list of violated set invariants (empty when valid).
  std::vector<std::string> invariant_violations() const;
};

/// Order-insensitive equality of the annotation multisets.
bool same_annotations(std::span<const ErrorAnnotation> a, std::span<const ErrorAnnotation> b);

struct ScoreWeights {
  double w_major = 5.0;
  double w_minor = 1.0;
  double floor = -25.0;

  /// Throws InvalidInput unless w_major >= w_minor >= 0 and floor <= 0.
  void validate() const;
};

/// Negative-oriented MQM score. Non-translation scores the floor; otherwise
/// -w_major*n_major - w_minor*n_minor clamped at the floor. no-error
/// annotations never count; an annotation without severity counts as minor.
double mqm_score(std::span<const ErrorAnnotation> annotations, const ScoreWeights& w = {});
inline double mqm_score(const AnnotationSet& set, const ScoreWeights& w = {}) {
  return mqm_score(set.annotations, w);
}

enum class QualityBucket { HQ, MQ, LQ };

std::string_view to_string(QualityBucket b);
/// HQ iff score == 0, MQ iff -5 < score < 0, LQ iff score <= -5.
/// Positive scores throw InvalidInput.
QualityBucket classify_quality_bucket(double score);

/// Soft checks: span containment, category legality, severity presence,
/// and the ALL/non-translation pairing. Never throws.
std::vector<std::string> validate_annotation(const ErrorAnnotation& ann, const TranslationUnit& unit);

/// Whitespace trim plus ASCII casefold; the span identity used for
/// deduplication and span matching.
std::string normalize_span(std::string_view span);

}  // namespace mmad
