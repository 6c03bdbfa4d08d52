#include "mmad/mqm.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include "mmad/error.hpp"

namespace mmad {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 128) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Lowercase, trim, and join internal runs of spaces/underscores with '-'.
std::string slug(std::string_view s) {
  std::string low = lower_ascii(trim(s));
  std::string out;
  bool pending_dash = false;
  for (char c : low) {
    if (c == ' ' || c == '_' || c == '\t' || c == '-') {
      pending_dash = !out.empty();
      continue;
    }
    if (pending_dash) out.push_back('-');
    pending_dash = false;
    out.push_back(c);
  }
  return out;
}

constexpr std::string_view kAccuracySubs[] = {"addition", "omission", "mistranslation", "untranslated-text"};
constexpr std::string_view kFluencySubs[] = {"punctuation", "spelling",      "grammar",
                                             "register",    "inconsistency", "character-encoding"};
constexpr std::string_view kTerminologySubs[] = {"inappropriate-for-context", "inconsistent-use"};
constexpr std::string_view kStyleSubs[] = {"awkward"};
constexpr std::string_view kLocaleSubs[] = {"address-format", "currency-format",  "date-format",
                                            "name-format",    "telephone-format", "time-format"};

// Spellings seen in model output and in the printed case studies.
std::string canonical_sub(TopCategory top, const std::string& sub) {
  static const std::array<std::pair<std::string_view, std::string_view>, 12> aliases{{
      {"omission-translation", "omission"},
      {"accuracy-addition", "addition"},
      {"untranslated", "untranslated-text"},
      {"untranslated-text", "untranslated-text"},
      {"encoding", "character-encoding"},
      {"inappropriate", "inappropriate-for-context"},
      {"inappropriate-for-the-context", "inappropriate-for-context"},
      {"inconsistent", "inconsistent-use"},
      {"unnatural-or-awkward", "awkward"},
      {"unnatural", "awkward"},
      {"awkward-style", "awkward"},
      {"wrong-register", "register"},
  }};
  for (const auto& [from, to] : aliases) {
    if (sub == from) {
      for (std::string_view legal : legal_subcategories(top)) {
        if (legal == to) return std::string(to);
      }
    }
  }
  return sub;
}

}  // namespace

std::string UnitKey::str() const { return language_pair + "/" + system_id + "/" + doc_id + "/" + seg_id; }

std::string_view to_string(Severity s) { return s == Severity::major ? "major" : "minor"; }

std::optional<Severity> parse_severity(std::string_view text) {
  const std::string s = slug(text);
  if (s == "major" || s == "critical") return Severity::major;
  if (s == "minor") return Severity::minor;
  return std::nullopt;
}

std::string_view to_string(TopCategory c) {
  switch (c) {
    case TopCategory::accuracy: return "accuracy";
    case TopCategory::fluency: return "fluency";
    case TopCategory::terminology: return "terminology";
    case TopCategory::style: return "style";
    case TopCategory::locale_convention: return "locale-convention";
    case TopCategory::other: return "other";
    case TopCategory::source_error: return "source-error";
    case TopCategory::non_translation: return "non-translation";
    case TopCategory::no_error: return "no-error";
  }
  return "other";
}

std::optional<TopCategory> parse_top_category(std::string_view text) {
  const std::string s = slug(text);
  if (s == "accuracy") return TopCategory::accuracy;
  if (s == "fluency") return TopCategory::fluency;
  if (s == "terminology") return TopCategory::terminology;
  if (s == "style") return TopCategory::style;
  if (s == "locale-convention" || s == "locale") return TopCategory::locale_convention;
  if (s == "other") return TopCategory::other;
  if (s == "source-error") return TopCategory::source_error;
  if (s == "non-translation" || s == "nontranslation") return TopCategory::non_translation;
  if (s == "no-error" || s == "no-errors" || s == "noerror") return TopCategory::no_error;
  return std::nullopt;
}

std::span<const std::string_view> legal_subcategories(TopCategory top) {
  switch (top) {
    case TopCategory::accuracy: return kAccuracySubs;
    case TopCategory::fluency: return kFluencySubs;
    case TopCategory::terminology: return kTerminologySubs;
    case TopCategory::style: return kStyleSubs;
    case TopCategory::locale_convention: return kLocaleSubs;
    default: return {};
  }
}

bool CategoryPath::is_legal() const {
  if (sub.empty()) return true;
  const auto subs = legal_subcategories(top);
  return std::find(subs.begin(), subs.end(), sub) != subs.end();
}

std::string CategoryPath::str() const {
  std::string out(to_string(top));
  if (!sub.empty()) out += "/" + sub;
  return out;
}

CategoryPath CategoryPath::parse(std::string_view text, std::vector<std::string>* warnings) {
  const std::string_view trimmed = trim(text);
  const auto slash = trimmed.find('/');
  const std::string_view top_text = slash == std::string_view::npos ? trimmed : trimmed.substr(0, slash);
  const std::string_view sub_text = slash == std::string_view::npos ? std::string_view{} : trimmed.substr(slash + 1);

  CategoryPath out;
  if (auto top = parse_top_category(top_text)) {
    out.top = *top;
  } else {
    if (warnings) warnings->push_back("unknown category '" + std::string(trimmed) + "' mapped to other");
    return out;
  }
  out.sub = canonical_sub(out.top, slug(sub_text));
  return out;
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::accuracy: return "accuracy";
    case Dimension::fluency: return "fluency";
    case Dimension::terminology: return "terminology";
    case Dimension::style: return "style";
  }
  return "accuracy";
}

std::optional<Dimension> parse_dimension(std::string_view text) {
  const std::string s = slug(text);
  for (Dimension d : kAllDimensions) {
    if (s == to_string(d)) return d;
  }
  return std::nullopt;
}

TopCategory top_category_of(Dimension d) {
  switch (d) {
    case Dimension::accuracy: return TopCategory::accuracy;
    case Dimension::fluency: return TopCategory::fluency;
    case Dimension::terminology: return TopCategory::terminology;
    case Dimension::style: return TopCategory::style;
  }
  return TopCategory::other;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::stage1: return "stage1";
    case Provenance::debate: return "debate";
    case Provenance::judge: return "judge";
    case Provenance::gemba: return "gemba";
    case Provenance::eaprompt: return "eaprompt";
    case Provenance::gold: return "gold";
  }
  return "stage1";
}

std::optional<Provenance> parse_provenance(std::string_view text) {
  for (Provenance p : {Provenance::stage1, Provenance::debate, Provenance::judge, Provenance::gemba,
                       Provenance::eaprompt, Provenance::gold}) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

bool AnnotationSet::has_non_translation() const {
  return std::any_of(annotations.begin(), annotations.end(),
                     [](const ErrorAnnotation& a) { return a.is_non_translation(); });
}

std::vector<std::string> AnnotationSet::invariant_violations() const {
  std::vector<std::string> out;
  const auto nt = std::count_if(annotations.begin(), annotations.end(),
                                [](const ErrorAnnotation& a) { return a.is_non_translation(); });
  if (nt > 1) out.push_back("more than one non-translation annotation");
  if (nt >= 1 && annotations.size() > 1) out.push_back("non-translation must be the only annotation");
  for (const auto& a : annotations) {
    if (a.span.all != a.is_non_translation()) out.push_back("span ALL must pair with non-translation");
  }
  return out;
}

namespace {
auto annotation_tuple(const ErrorAnnotation& a) {
  return std::tie(a.span, a.category, a.severity, a.is_source_error);
}
}  // namespace

bool same_annotations(std::span<const ErrorAnnotation> a, std::span<const ErrorAnnotation> b) {
  if (a.size() != b.size()) return false;
  std::vector<const ErrorAnnotation*> pa, pb;
  for (const auto& x : a) pa.push_back(&x);
  for (const auto& x : b) pb.push_back(&x);
  const auto less = [](const ErrorAnnotation* l, const ErrorAnnotation* r) {
    return annotation_tuple(*l) < annotation_tuple(*r);
  };
  std::sort(pa.begin(), pa.end(), less);
  std::sort(pb.begin(), pb.end(), less);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!(*pa[i] == *pb[i])) return false;
  }
  return true;
}

void ScoreWeights::validate() const {
  if (!(w_minor >= 0.0 && w_major >= w_minor)) throw InvalidInput("score weights require w_major >= w_minor >= 0");
  if (!(floor <= 0.0)) throw InvalidInput("score floor must be <= 0");
}

double mqm_score(std::span<const ErrorAnnotation> annotations, const ScoreWeights& w) {
  std::size_t n_major = 0;
  std::size_t n_minor = 0;
  for (const auto& a : annotations) {
    if (a.is_non_translation()) return w.floor;
    if (a.is_no_error()) continue;
    if (a.severity == Severity::major) {
      ++n_major;
    } else {
      ++n_minor;
    }
  }
  const double raw = -w.w_major * static_cast<double>(n_major) - w.w_minor * static_cast<double>(n_minor);
  // Adding 0.0 turns a -0.0 from zero counts into +0.0.
  return std::max(w.floor, raw) + 0.0;
}

std::string_view to_string(QualityBucket b) {
  switch (b) {
    case QualityBucket::HQ: return "HQ";
    case QualityBucket::MQ: return "MQ";
    case QualityBucket::LQ: return "LQ";
  }
  return "LQ";
}

QualityBucket classify_quality_bucket(double score) {
  if (score > 0.0) throw InvalidInput("MQM scores are non-positive; got " + std::to_string(score));
  if (score == 0.0) return QualityBucket::HQ;
  if (score > -5.0) return QualityBucket::MQ;
  return QualityBucket::LQ;
}

std::vector<std::string> validate_annotation(const ErrorAnnotation& ann, const TranslationUnit& unit) {
  std::vector<std::string> out;
  const std::string where = unit.key().str();
  if (!ann.span.all) {
    const bool in_hyp = unit.hypothesis_text.find(ann.span.text) != std::string::npos;
    const bool in_src = unit.source_text.find(ann.span.text) != std::string::npos;
    if (ann.is_source_error ? !in_src : !(in_hyp || in_src)) {
      out.push_back(where + ": span \"" + ann.span.text + "\" not found in " +
                    (ann.is_source_error ? "source" : "source or hypothesis"));
    }
  }
  if (ann.span.all != ann.is_non_translation()) {
    out.push_back(where + ": span ALL is reserved for non-translation");
  }
  if (!ann.category.is_legal()) {
    out.push_back(where + ": illegal category " + ann.category.str());
  }
  if (!ann.severity && !ann.is_no_error()) {
    out.push_back(where + ": severity missing for " + ann.category.str());
  }
  return out;
}

std::string normalize_span(std::string_view span) { return lower_ascii(trim(span)); }

}  // namespace mmad
