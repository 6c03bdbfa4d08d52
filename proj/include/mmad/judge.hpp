#pragma once

// Stage 3: merge the per-dimension viewpoints into one set and score it.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "mmad/debate.hpp"
#include "mmad/gateway.hpp"
#include "mmad/mqm.hpp"
#include "mmad/prompts.hpp"

namespace mmad {

struct NormalizeOptions {
  /// Also collapse spans where one normalized span contains the other.
  bool substring_overlap = false;
};

/// Deterministic cleanup of a merged annotation list. Any non-translation
/// reduces the output to one ALL non-translation annotation. Otherwise
/// no-error entries are dropped and, among annotations with conflicting
/// spans, the most severe survives (ties: accuracy, fluency, terminology,
/// style, then the rest, then input order). Survivors keep input order.
AnnotationSet normalize_final(std::span<const ErrorAnnotation> annotations, const NormalizeOptions& opts = {});

struct JudgeResult {
  AnnotationSet final_set;
  std::optional<std::string> analysis;
  bool fell_back = false;  // judge output unusable; merged viewpoints used
};

/// One judge call (plus one repair turn) over the viewpoint payloads.
/// Dimensions missing from `viewpoints` are passed as empty payloads.
JudgeResult synthesize(const TranslationUnit& unit, const std::map<Dimension, Viewpoint>& viewpoints,
                       const PromptRegistry& registry, AgentSession& session, const NormalizeOptions& opts = {});

std::pair<AnnotationSet, double> judge_and_score(const TranslationUnit& unit,
                                                 const std::map<Dimension, Viewpoint>& viewpoints,
                                                 const ScoreWeights& w, const PromptRegistry& registry,
                                                 AgentSession& session, const NormalizeOptions& opts = {});

}  // namespace mmad
