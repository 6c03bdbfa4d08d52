#pragma once

// Stage 2: per-dimension Pro-Con debate over s0, and the three judged
// alternatives (deliberation, interactive review, consultancy review).

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmad/gateway.hpp"
#include "mmad/mqm.hpp"
#include "mmad/prompts.hpp"

namespace mmad {

enum class Strategy { consensus, deliberation, interactive_review, consultancy_review };
enum class DebateTopic { severity, category, entirety };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);
std::string_view to_string(DebateTopic t);
std::optional<DebateTopic> parse_debate_topic(std::string_view text);

struct DebateConfig {
  Strategy strategy = Strategy::consensus;
  int max_rounds = 3;
  DebateTopic topic = DebateTopic::severity;
  bool lean_minor = true;

  void validate() const;
  /// Most gateway calls one debate may issue under this config.
  int call_bound() const;
};

enum class Speaker { pro, con, reviewer, judge };
std::string_view to_string(Speaker s);

struct DebateTurn {
  int round = 0;
  Speaker speaker = Speaker::pro;
  std::string statement;
  std::optional<AnnotationSet> parsed;  // empty for reviewer questions
  bool carried_forward = false;         // statement unparseable; previous set reused
};

enum class DebateOutcome { consensus, fallback, skipped, judged };
std::string_view to_string(DebateOutcome o);

struct DebateTranscript {
  Dimension dimension = Dimension::accuracy;
  AnnotationSet s0;
  AnnotationSet con_seed;
  std::vector<DebateTurn> turns;
  std::vector<bool> consensus_verdicts;  // one per checked round
  DebateOutcome outcome = DebateOutcome::skipped;
};

struct Viewpoint {
  Dimension dimension = Dimension::accuracy;
  AnnotationSet annotations;
  DebateOutcome outcome = DebateOutcome::skipped;
};

/// s0 with every severity flipped (major <-> minor; missing becomes major).
/// Throws InvalidInput on an empty set.
AnnotationSet seed_opposing_stance(const AnnotationSet& s0);

/// The topic clause spliced into every debate turn prompt.
std::string debate_prompt_for_topic(const PromptRegistry& registry, const DebateConfig& cfg);

/// Consensus strategy.
std::pair<Viewpoint, DebateTranscript> run_debate(const TranslationUnit& unit, Dimension dim, const AnnotationSet& s0,
                                                  const DebateConfig& cfg, const PromptRegistry& registry,
                                                  AgentSession& session);

/// Dispatches on cfg.strategy. An empty s0 always skips with zero calls.
std::pair<Viewpoint, DebateTranscript> run_strategy(const TranslationUnit& unit, Dimension dim, const AnnotationSet& s0,
                                                    const DebateConfig& cfg, const PromptRegistry& registry,
                                                    AgentSession& session);

}  // namespace mmad
