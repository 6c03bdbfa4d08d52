#pragma once

// Single-call LLM judges: GEMBA-MQM and EAPrompt.

#include <string>
#include <vector>

#include "mmad/gateway.hpp"
#include "mmad/mqm.hpp"
#include "mmad/prompts.hpp"

namespace mmad {

struct BaselineResult {
  AnnotationSet annotations;
  double score = 0.0;
  bool error = false;                  // nothing usable; score defaulted to 0
  std::vector<std::string> anomalies;  // e.g. tag disagrees with the lists
};

/// Renders gemba.mqm with the shipped 3-shot examples; one repair turn on a
/// parse failure.
BaselineResult gemba_mqm_evaluate(const TranslationUnit& unit, const PromptRegistry& registry, AgentSession& session,
                                  const ScoreWeights& w = {});

/// Score from the <score> tag when present (clamped into [floor, 0]);
/// otherwise recomputed from the parsed Major/Minor lists.
BaselineResult eaprompt_evaluate(const TranslationUnit& unit, const PromptRegistry& registry, AgentSession& session,
                                 const ScoreWeights& w = {});

}  // namespace mmad
