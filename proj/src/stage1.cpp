#include "mmad/stage1.hpp"

#include <algorithm>

#include "mmad/error.hpp"

namespace mmad {

std::vector<Dimension> parse_dimension_set(std::string_view text) {
  std::vector<Dimension> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto d = parse_dimension(item);
    if (!d) throw InvalidInput("unknown dimension '" + std::string(item) + "'");
    out.push_back(*d);
  }
  validate_dimension_set(out);
  return out;
}

void validate_dimension_set(std::span<const Dimension> dims) {
  if (dims.empty()) throw InvalidInput("dimension set is empty");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    for (std::size_t j = i + 1; j < dims.size(); ++j) {
      if (dims[i] == dims[j]) throw InvalidInput("duplicate dimension " + std::string(to_string(dims[i])));
    }
  }
}

Bindings segment_bindings(const TranslationUnit& unit) {
  const auto [src, tgt] = resolve_language_names(unit.language_pair);
  return {{"src_lng", src},
          {"tgt_lng", tgt},
          {"source_segment", unit.source_text},
          {"target_segment", unit.hypothesis_text}};
}

std::optional<DecodedPayload> ask_annotation_payload(AgentSession& session, std::vector<ChatMessage> messages,
                                                     const CallTag& tag, int repairs) {
  std::string reply = session.ask(messages, tag);
  for (int attempt = 0;; ++attempt) {
    try {
      return decode_annotation_payload(reply);
    } catch (const ParseError&) {
      if (attempt >= repairs) return std::nullopt;
    }
    session.warnings().push_back(tag.str() + ": unparseable payload, sending repair turn");
    messages.push_back({Role::assistant, reply.empty() ? std::string("(empty)") : reply});
    messages.push_back({Role::user, std::string(kRepairInstruction)});
    CallTag repair_tag = tag;
    repair_tag.speaker = "repair";
    reply = session.ask(messages, repair_tag);
  }
}

AnnotationSet initial_evaluate(const TranslationUnit& unit, Dimension dim, const PromptRegistry& registry,
                               AgentSession& session, const Stage1Options& opts) {
  const PromptTemplate& tmpl = registry.get("stage1." + std::string(to_string(dim)));
  std::span<const FewShotExample> examples;
  const ExamplePack* pack = registry.pack(unit.language_pair);
  if (pack && opts.shots > 0) {
    const auto& all = pack->examples(dim);
    examples = std::span(all).first(std::min(opts.shots, all.size()));
  } else if (!pack && opts.shots > 0 && !opts.allow_zero_shot) {
    throw LookupError("no few-shot pack for " + unit.language_pair + " (zero-shot fallback is disabled)");
  }

  const CallTag tag{session.unit_tag(), "stage1", std::string(to_string(dim)), 0, "annotator"};
  auto decoded = ask_annotation_payload(session, render(tmpl, segment_bindings(unit), examples), tag);

  AnnotationSet out{unit.key(), {}, Provenance::stage1};
  if (!decoded) {
    session.errors().push_back(tag.str() + ": no parseable payload after repair; using the empty set");
    return out;
  }
  for (auto& w : decoded->warnings) session.warnings().push_back(tag.str() + ": " + w);
  for (auto& a : decoded->annotations) {
    a.dimension_origin = dim;
    for (auto& w : validate_annotation(a, unit)) session.warnings().push_back(std::move(w));
    out.annotations.push_back(std::move(a));
  }
  return out;
}

std::map<Dimension, AnnotationSet> evaluate_all_dimensions(const TranslationUnit& unit,
                                                           std::span<const Dimension> dims,
                                                           const PromptRegistry& registry, AgentSession& session,
                                                           const Stage1Options& opts) {
  validate_dimension_set(dims);
  std::map<Dimension, AnnotationSet> out;
  for (Dimension d : dims) out.emplace(d, initial_evaluate(unit, d, registry, session, opts));
  return out;
}

}  // namespace mmad
