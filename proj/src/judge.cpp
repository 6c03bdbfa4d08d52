#include "mmad/judge.hpp"

#include <algorithm>

#include "mmad/codec.hpp"
#include "mmad/stage1.hpp"

namespace mmad {

namespace {

int severity_rank(const ErrorAnnotation& a) {
  if (a.severity == Severity::major) return 0;
  if (a.severity == Severity::minor) return 1;
  return 2;
}

int category_rank(const ErrorAnnotation& a) {
  switch (a.category.top) {
    case TopCategory::accuracy: return 0;
    case TopCategory::fluency: return 1;
    case TopCategory::terminology: return 2;
    case TopCategory::style: return 3;
    default: return 4;
  }
}

bool conflicts(const std::string& a, const std::string& b, bool substring) {
  if (a == b) return true;
  if (!substring) return false;
  return a.find(b) != std::string::npos || b.find(a) != std::string::npos;
}

}  // namespace

AnnotationSet normalize_final(std::span<const ErrorAnnotation> annotations, const NormalizeOptions& opts) {
  AnnotationSet out;
  out.provenance = Provenance::judge;
  for (const auto& a : annotations) {
    if (a.is_non_translation()) {
      ErrorAnnotation nt = a;
      nt.span = ErrorSpan::whole_segment();
      nt.category.sub.clear();
      out.annotations.push_back(std::move(nt));
      return out;
    }
  }

  std::vector<std::size_t> order;
  std::vector<std::string> spans(annotations.size());
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    if (annotations[i].is_no_error()) continue;
    spans[i] = normalize_span(annotations[i].span.text);
    order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    const auto& a = annotations[l];
    const auto& b = annotations[r];
    if (severity_rank(a) != severity_rank(b)) return severity_rank(a) < severity_rank(b);
    return category_rank(a) < category_rank(b);
  });

  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool clash = std::any_of(kept.begin(), kept.end(),
                                   [&](std::size_t k) { return conflicts(spans[i], spans[k], opts.substring_overlap); });
    if (!clash) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  for (std::size_t i : kept) out.annotations.push_back(annotations[i]);
  return out;
}

JudgeResult synthesize(const TranslationUnit& unit, const std::map<Dimension, Viewpoint>& viewpoints,
                       const PromptRegistry& registry, AgentSession& session, const NormalizeOptions& opts) {
  const auto payload = [&](Dimension d) {
    const auto it = viewpoints.find(d);
    if (it == viewpoints.end()) return encode_annotation_payload({});
    return encode_annotation_payload(it->second.annotations.annotations);
  };
  Bindings b = segment_bindings(unit);
  b["accuracy_annotations"] = payload(Dimension::accuracy);
  b["fluency_annotations"] = payload(Dimension::fluency);
  b["term_annotations"] = payload(Dimension::terminology);
  b["style_annotations"] = payload(Dimension::style);

  const CallTag tag{session.unit_tag(), "stage3", "", 0, "judge"};
  auto decoded = ask_annotation_payload(session, render(registry.get("stage3.judge"), b), tag);

  JudgeResult result;
  if (decoded) {
    for (auto& w : decoded->warnings) session.warnings().push_back(tag.str() + ": " + w);
    for (const auto& a : decoded->annotations) {
      for (auto& w : validate_annotation(a, unit)) session.warnings().push_back(std::move(w));
    }
    result.analysis = decoded->analysis;
    result.final_set = normalize_final(decoded->annotations, opts);
  } else {
    session.errors().push_back(tag.str() + ": no parseable judge payload after repair; merging viewpoints");
    std::vector<ErrorAnnotation> merged;
    for (const auto& [d, vp] : viewpoints) {
      merged.insert(merged.end(), vp.annotations.annotations.begin(), vp.annotations.annotations.end());
    }
    result.final_set = normalize_final(merged, opts);
    result.fell_back = true;
  }
  result.final_set.unit_key = unit.key();
  result.final_set.provenance = Provenance::judge;
  return result;
}

std::pair<AnnotationSet, double> judge_and_score(const TranslationUnit& unit,
                                                 const std::map<Dimension, Viewpoint>& viewpoints,
                                                 const ScoreWeights& w, const PromptRegistry& registry,
                                                 AgentSession& session, const NormalizeOptions& opts) {
  auto r = synthesize(unit, viewpoints, registry, session, opts);
  const double score = mqm_score(r.final_set, w);
  return {std::move(r.final_set), score};
}

}  // namespace mmad
