#pragma once

// Stage 1: one few-shot annotator call per dimension, producing s0.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmad/codec.hpp"
#include "mmad/gateway.hpp"
#include "mmad/mqm.hpp"
#include "mmad/prompts.hpp"

namespace mmad {

/// Parses "accuracy,fluency,..." into an ordered, duplicate-free, nonempty
/// list. Throws InvalidInput.
std::vector<Dimension> parse_dimension_set(std::string_view text);
void validate_dimension_set(std::span<const Dimension> dims);

/// src_lng, tgt_lng, source_segment, target_segment for a unit.
Bindings segment_bindings(const TranslationUnit& unit);

inline constexpr std::string_view kRepairInstruction =
    "Your previous answer could not be parsed. Re-emit valid JSON only, in the format requested above.";

/// Asks once and decodes an annotation payload; on a parse failure sends up
/// to `repairs` follow-up turns (tagged speaker "repair"). nullopt when all
/// attempts fail.
std::optional<DecodedPayload> ask_annotation_payload(AgentSession& session, std::vector<ChatMessage> messages,
                                                     const CallTag& tag, int repairs = 1);

struct Stage1Options {
  std::size_t shots = ExamplePack::kShots;
  bool allow_zero_shot = false;  // run without a pack for unsupported pairs
};

/// Throws LookupError when no pack covers the pair and zero-shot is off.
AnnotationSet initial_evaluate(const TranslationUnit& unit, Dimension dim, const PromptRegistry& registry,
                               AgentSession& session, const Stage1Options& opts = {});

std::map<Dimension, AnnotationSet> evaluate_all_dimensions(const TranslationUnit& unit,
                                                           std::span<const Dimension> dims,
                                                           const PromptRegistry& registry, AgentSession& session,
                                                           const Stage1Options& opts = {});

}  // namespace mmad
