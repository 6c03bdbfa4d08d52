#include "mmad/baselines.hpp"

#include <algorithm>

#include "mmad/codec.hpp"
#include "mmad/error.hpp"
#include "mmad/stage1.hpp"

namespace mmad {

namespace {

constexpr std::string_view kGembaRepair =
    "Your previous answer could not be parsed. Answer again using only the Critical:, Major: and Minor: sections.";
constexpr std::string_view kEapromptRepair =
    "Your previous answer could not be parsed. Answer again in the format of the template, ending with the score "
    "inside <score></score> tags.";

std::string nonempty(std::string s) { return s.empty() ? std::string("(empty)") : s; }

std::string format_score(double v) {
  std::string s = std::to_string(v);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

BaselineResult gemba_mqm_evaluate(const TranslationUnit& unit, const PromptRegistry& registry, AgentSession& session,
                                  const ScoreWeights& w) {
  const CallTag tag{session.unit_tag(), "gemba", "", 0, "annotator"};
  auto messages = render(registry.get("gemba.mqm"), segment_bindings(unit), registry.gemba_examples());
  std::string reply = session.ask(messages, tag);

  BaselineResult out;
  out.annotations = AnnotationSet{unit.key(), {}, Provenance::gemba};
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      std::vector<std::string> warnings;
      AnnotationSet parsed = parse_gemba_sections(reply, &warnings);
      for (auto& wn : warnings) session.warnings().push_back(tag.str() + ": " + wn);
      parsed.unit_key = unit.key();
      for (const auto& a : parsed.annotations) {
        for (auto& wn : validate_annotation(a, unit)) session.warnings().push_back(std::move(wn));
      }
      out.annotations = std::move(parsed);
      out.score = mqm_score(out.annotations, w);
      return out;
    } catch (const ParseError&) {
      if (attempt == 1) break;
    }
    messages.push_back({Role::assistant, nonempty(reply)});
    messages.push_back({Role::user, std::string(kGembaRepair)});
    CallTag repair = tag;
    repair.speaker = "repair";
    reply = session.ask(messages, repair);
  }
  out.error = true;
  session.errors().push_back(tag.str() + ": no parseable GEMBA answer after repair; score 0");
  return out;
}

BaselineResult eaprompt_evaluate(const TranslationUnit& unit, const PromptRegistry& registry, AgentSession& session,
                                 const ScoreWeights& w) {
  const CallTag tag{session.unit_tag(), "eaprompt", "", 0, "annotator"};
  Bindings b{{"source_segment", unit.source_text}, {"target_segment", unit.hypothesis_text}};
  auto messages = render(registry.get("eaprompt.mqm"), b);
  std::string reply = session.ask(messages, tag);

  BaselineResult out;
  out.annotations = AnnotationSet{unit.key(), {}, Provenance::eaprompt};
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::optional<int> tag_score;
    try {
      tag_score = extract_score_tag(reply);
    } catch (const ParseError&) {
    }
    EapromptLists lists = parse_eaprompt_lists(reply);
    if (tag_score || lists.found) {
      out.annotations.annotations = std::move(lists.annotations);
      for (const auto& a : out.annotations.annotations) {
        for (auto& wn : validate_annotation(a, unit)) session.warnings().push_back(std::move(wn));
      }
      const double recomputed = mqm_score(out.annotations, w);
      if (tag_score) {
        const double raw = *tag_score;
        out.score = std::clamp(raw, w.floor, 0.0) + 0.0;
        if (out.score != raw) out.anomalies.push_back("score tag " + format_score(raw) + " clamped into range");
        if (lists.found && recomputed != out.score) {
          out.anomalies.push_back("score tag " + format_score(raw) + " disagrees with error lists (" +
                                  format_score(recomputed) + ")");
        }
      } else {
        out.score = recomputed;
        out.anomalies.push_back("score tag missing; recomputed " + format_score(recomputed) + " from error lists");
      }
      for (const auto& a : out.anomalies) session.warnings().push_back(tag.str() + ": anomaly: " + a);
      return out;
    }
    if (attempt == 1) break;
    messages.push_back({Role::assistant, nonempty(reply)});
    messages.push_back({Role::user, std::string(kEapromptRepair)});
    CallTag repair = tag;
    repair.speaker = "repair";
    reply = session.ask(messages, repair);
  }
  out.error = true;
  session.errors().push_back(tag.str() + ": neither a score tag nor error lists; score 0");
  return out;
}

}  // namespace mmad
