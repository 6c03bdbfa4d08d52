#include "mmad/debate.hpp"

#include "mmad/codec.hpp"
#include "mmad/error.hpp"
#include "mmad/stage1.hpp"

namespace mmad {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::consensus: return "consensus";
    case Strategy::deliberation: return "deliberation";
    case Strategy::interactive_review: return "interactive_review";
    case Strategy::consultancy_review: return "consultancy_review";
  }
  return "consensus";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (auto s : {Strategy::consensus, Strategy::deliberation, Strategy::interactive_review,
                 Strategy::consultancy_review}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

std::string_view to_string(DebateTopic t) {
  switch (t) {
    case DebateTopic::severity: return "severity";
    case DebateTopic::category: return "category";
    case DebateTopic::entirety: return "entirety";
  }
  return "severity";
}

std::optional<DebateTopic> parse_debate_topic(std::string_view text) {
  for (auto t : {DebateTopic::severity, DebateTopic::category, DebateTopic::entirety}) {
    if (text == to_string(t)) return t;
  }
  return std::nullopt;
}

void DebateConfig::validate() const {
  if (max_rounds < 1) throw InvalidInput("max_rounds must be >= 1");
}

int DebateConfig::call_bound() const {
  switch (strategy) {
    case Strategy::consensus: return 3 * max_rounds;
    case Strategy::deliberation: return 2 * max_rounds + 1;
    case Strategy::interactive_review: return 3 * max_rounds + 1;
    case Strategy::consultancy_review: return 2 * max_rounds + 1;
  }
  return 0;
}

std::string_view to_string(Speaker s) {
  switch (s) {
    case Speaker::pro: return "pro";
    case Speaker::con: return "con";
    case Speaker::reviewer: return "reviewer";
    case Speaker::judge: return "judge";
  }
  return "pro";
}

std::string_view to_string(DebateOutcome o) {
  switch (o) {
    case DebateOutcome::consensus: return "consensus";
    case DebateOutcome::fallback: return "fallback";
    case DebateOutcome::skipped: return "skipped";
    case DebateOutcome::judged: return "judged";
  }
  return "skipped";
}

AnnotationSet seed_opposing_stance(const AnnotationSet& s0) {
  if (s0.empty()) throw InvalidInput("cannot seed an opposing stance from an empty set");
  AnnotationSet out = s0;
  for (auto& a : out.annotations) {
    a.severity = a.severity == Severity::major ? Severity::minor : Severity::major;
  }
  return out;
}

std::string debate_prompt_for_topic(const PromptRegistry& registry, const DebateConfig& cfg) {
  std::string id;
  switch (cfg.topic) {
    case DebateTopic::severity: id = cfg.lean_minor ? "topic.severity" : "topic.severity_neutral"; break;
    case DebateTopic::category: id = "topic.category"; break;
    case DebateTopic::entirety: return "";
  }
  const auto& t = registry.get(id);
  return t.body.empty() ? std::string() : t.body.front().text;
}

namespace {

std::string nonempty(std::string s) { return s.empty() ? std::string("(empty)") : s; }

struct Side {
  Speaker speaker;
  std::vector<ChatMessage> history;
  AnnotationSet latest;
};

class Debate {
 public:
  Debate(const TranslationUnit& unit, Dimension dim, const AnnotationSet& s0, const DebateConfig& cfg,
         const PromptRegistry& registry, AgentSession& session)
      : unit_(unit),
        dim_(dim),
        cfg_(cfg),
        registry_(registry),
        session_(session),
        tmpl_(registry.get("debate." + std::string(to_string(dim)))),
        bindings_(segment_bindings(unit)),
        topic_(debate_prompt_for_topic(registry, cfg)) {
    if (tmpl_.body.size() != 4) throw RenderError("template " + tmpl_.id + " must have four parts");
    transcript_.dimension = dim;
    transcript_.s0 = stamp(s0);
    transcript_.con_seed = seed_opposing_stance(transcript_.s0);
    pro_ = open(Speaker::pro, transcript_.s0);
    con_ = open(Speaker::con, transcript_.con_seed);
  }

  std::pair<Viewpoint, DebateTranscript> consensus() {
    for (int r = 1; r <= cfg_.max_rounds; ++r) {
      debate_round(r, "");
      bool agree = same_annotations(pro_.latest.annotations, con_.latest.annotations);
      if (!agree) {
        Bindings b{{"first_annotations", encode_annotation_payload(pro_.latest.annotations)},
                   {"second_annotations", encode_annotation_payload(con_.latest.annotations)}};
        const auto verdict = session_.ask(render(registry_.get("consensus.check"), b), tag(r, "checker"));
        agree = extract_yes_no(verdict);
      }
      transcript_.consensus_verdicts.push_back(agree);
      if (agree) return finish(pro_.latest, DebateOutcome::consensus);
    }
    return finish(pro_.latest, DebateOutcome::fallback);
  }

  std::pair<Viewpoint, DebateTranscript> deliberation() {
    for (int r = 1; r <= cfg_.max_rounds; ++r) debate_round(r, "");
    return judge();
  }

  std::pair<Viewpoint, DebateTranscript> interactive_review() {
    std::string questions;
    for (int r = 1; r <= cfg_.max_rounds; ++r) {
      debate_round(r, questions);
      const auto text = reviewer(r, "review.interactive");
      questions = substitute(registry_.get("review.questions").body.at(0).text, {{"questions", text}});
    }
    return judge();
  }

  std::pair<Viewpoint, DebateTranscript> consultancy_review() {
    std::string last_review;
    for (int r = 1; r <= cfg_.max_rounds; ++r) {
      const std::string prompt =
          r == 1 ? substitute(registry_.get("consultancy.open").body.at(0).text, {})
                 : substitute(registry_.get("consultancy.reply").body.at(0).text, {{"reviewer_questions", last_review}});
      speak(pro_, r, prompt);
      last_review = reviewer(r, "review.consultancy");
    }
    return judge();
  }

 private:
  AnnotationSet stamp(AnnotationSet s) const {
    s.unit_key = unit_.key();
    s.provenance = Provenance::debate;
    for (auto& a : s.annotations) a.dimension_origin = dim_;
    return s;
  }

  CallTag tag(int round, std::string speaker) const {
    return {session_.unit_tag(), "stage2", std::string(to_string(dim_)), round, std::move(speaker)};
  }

  Side open(Speaker who, const AnnotationSet& stance) {
    Bindings b = bindings_;
    b["annotations"] = encode_annotation_payload(stance.annotations);
    Side side{who, {}, stance};
    for (std::size_t i = 0; i < 3; ++i) side.history.push_back({tmpl_.body[i].role, substitute(tmpl_.body[i].text, b)});
    return side;
  }

  std::string reply_prompt(const std::string& other, const std::string& questions) const {
    Bindings b = bindings_;
    b["other_agent_annotations"] = other;
    b["reviewer_questions"] = questions;
    b["topic_instructions"] = topic_;
    return substitute(tmpl_.body[3].text, b);
  }

  const std::string& speak(Side& side, int round, const std::string& prompt) {
    side.history.push_back({Role::user, prompt});
    std::string statement = session_.ask(side.history, tag(round, std::string(to_string(side.speaker))));
    side.history.push_back({Role::assistant, nonempty(statement)});
    DebateTurn turn{round, side.speaker, std::move(statement), std::nullopt, false};
    try {
      auto decoded = decode_annotation_payload(turn.statement);
      AnnotationSet parsed{unit_.key(), std::move(decoded.annotations), Provenance::debate};
      side.latest = stamp(std::move(parsed));
    } catch (const ParseError&) {
      turn.carried_forward = true;
      session_.warnings().push_back(tag(round, std::string(to_string(side.speaker))).str() +
                                    ": unparseable turn, previous stance carried forward");
    }
    turn.parsed = side.latest;
    transcript_.turns.push_back(std::move(turn));
    return transcript_.turns.back().statement;
  }

  void debate_round(int r, const std::string& questions) {
    const std::string other_for_pro =
        r == 1 ? encode_annotation_payload(transcript_.con_seed.annotations) : last_statement(Speaker::con);
    const std::string pro_said = speak(pro_, r, reply_prompt(other_for_pro, questions));
    speak(con_, r, reply_prompt(pro_said, questions));
  }

  std::string last_statement(Speaker who) const {
    for (auto it = transcript_.turns.rbegin(); it != transcript_.turns.rend(); ++it) {
      if (it->speaker == who) return it->statement;
    }
    return {};
  }

  std::string render_transcript() const {
    std::string out;
    const bool consultancy = cfg_.strategy == Strategy::consultancy_review;
    for (const auto& t : transcript_.turns) {
      std::string who;
      switch (t.speaker) {
        case Speaker::pro: who = consultancy ? "Consultant" : "Debater A (supports the initial annotations)"; break;
        case Speaker::con: who = "Debater B (opposes the initial annotations)"; break;
        case Speaker::reviewer: who = "Reviewer"; break;
        case Speaker::judge: who = "Judge"; break;
      }
      out += "Round " + std::to_string(t.round) + ", " + who + ":\n" + t.statement + "\n\n";
    }
    if (!out.empty()) out.resize(out.size() - 2);
    return out.empty() ? std::string("(no turns yet)") : out;
  }

  std::string reviewer(int round, const std::string& template_id) {
    Bindings b = bindings_;
    b["dimension"] = std::string(to_string(dim_));
    b["transcript"] = render_transcript();
    std::string text = session_.ask(render(registry_.get(template_id), b), tag(round, "reviewer"));
    DebateTurn turn{round, Speaker::reviewer, text, std::nullopt, false};
    if (cfg_.strategy == Strategy::consultancy_review) {
      try {
        auto decoded = decode_annotation_payload(text);
        turn.parsed = stamp(AnnotationSet{unit_.key(), std::move(decoded.annotations), Provenance::debate});
      } catch (const ParseError&) {
        // Reviewer critique without a payload is still a valid turn.
      }
    }
    transcript_.turns.push_back(std::move(turn));
    return nonempty(std::move(text));
  }

  std::pair<Viewpoint, DebateTranscript> judge() {
    Bindings b = bindings_;
    b["dimension"] = std::string(to_string(dim_));
    b["annotations"] = encode_annotation_payload(transcript_.s0.annotations);
    b["transcript"] = render_transcript();
    const int round = cfg_.max_rounds + 1;
    std::string text = session_.ask(render(registry_.get("judge.transcript"), b), tag(round, "judge"));
    DebateTurn turn{round, Speaker::judge, text, std::nullopt, false};
    try {
      auto decoded = decode_annotation_payload(text);
      turn.parsed = stamp(AnnotationSet{unit_.key(), std::move(decoded.annotations), Provenance::debate});
      const AnnotationSet verdict = *turn.parsed;
      transcript_.turns.push_back(std::move(turn));
      return finish(verdict, DebateOutcome::judged);
    } catch (const ParseError&) {
      session_.warnings().push_back(tag(round, "judge").str() + ": unparseable verdict, falling back to s0");
      turn.carried_forward = true;
      turn.parsed = transcript_.s0;
      transcript_.turns.push_back(std::move(turn));
      return finish(transcript_.s0, DebateOutcome::fallback);
    }
  }

  std::pair<Viewpoint, DebateTranscript> finish(const AnnotationSet& result, DebateOutcome outcome) {
    transcript_.outcome = outcome;
    Viewpoint vp{dim_, result, outcome};
    return {std::move(vp), std::move(transcript_)};
  }

  const TranslationUnit& unit_;
  Dimension dim_;
  DebateConfig cfg_;
  const PromptRegistry& registry_;
  AgentSession& session_;
  const PromptTemplate& tmpl_;
  Bindings bindings_;
  std::string topic_;
  DebateTranscript transcript_;
  Side pro_{Speaker::pro, {}, {}};
  Side con_{Speaker::con, {}, {}};
};

std::pair<Viewpoint, DebateTranscript> skipped(const TranslationUnit& unit, Dimension dim, const AnnotationSet& s0) {
  DebateTranscript t;
  t.dimension = dim;
  t.s0 = s0;
  t.con_seed = AnnotationSet{unit.key(), {}, Provenance::debate};
  t.outcome = DebateOutcome::skipped;
  Viewpoint vp{dim, AnnotationSet{unit.key(), {}, Provenance::debate}, DebateOutcome::skipped};
  return {std::move(vp), std::move(t)};
}

}  // namespace

std::pair<Viewpoint, DebateTranscript> run_debate(const TranslationUnit& unit, Dimension dim, const AnnotationSet& s0,
                                                  const DebateConfig& cfg, const PromptRegistry& registry,
                                                  AgentSession& session) {
  DebateConfig c = cfg;
  c.strategy = Strategy::consensus;
  return run_strategy(unit, dim, s0, c, registry, session);
}

std::pair<Viewpoint, DebateTranscript> run_strategy(const TranslationUnit& unit, Dimension dim, const AnnotationSet& s0,
                                                    const DebateConfig& cfg, const PromptRegistry& registry,
                                                    AgentSession& session) {
  cfg.validate();
  if (s0.empty()) return skipped(unit, dim, s0);
  Debate d(unit, dim, s0, cfg, registry, session);
  switch (cfg.strategy) {
    case Strategy::consensus: return d.consensus();
    case Strategy::deliberation: return d.deliberation();
    case Strategy::interactive_review: return d.interactive_review();
    case Strategy::consultancy_review: return d.consultancy_review();
  }
  return d.consensus();
}

}  // namespace mmad
