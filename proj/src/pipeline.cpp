#include "mmad/pipeline.hpp"

#include <atomic>
#include <thread>

#include "mmad/baselines.hpp"
#include "mmad/error.hpp"
#include "mmad/judge.hpp"
#include "mmad/meta_eval.hpp"
#include "mmad/stage1.hpp"

namespace mmad {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::mmad: return "mmad";
    case Method::gemba: return "gemba";
    case Method::eaprompt: return "eaprompt";
  }
  return "mmad";
}

std::optional<Method> parse_method(std::string_view text) {
  for (auto m : {Method::mmad, Method::gemba, Method::eaprompt}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

void RunConfig::validate() const {
  debate.validate();
  validate_dimension_set(dimensions);
  weights.validate();
  if (concurrency < 1) throw InvalidInput("concurrency must be >= 1");
  if (shots > ExamplePack::kShots) throw InvalidInput("shots must be at most 4");
  if (request.max_tokens && *request.max_tokens < 1) throw InvalidInput("max_tokens must be positive");
}

namespace {

void run_mmad(UnitResult& r, const RunConfig& cfg, const PromptRegistry& registry, AgentSession& session) {
  const Stage1Options s1{cfg.shots, cfg.allow_zero_shot};
  r.stage1 = evaluate_all_dimensions(r.unit, cfg.dimensions, registry, session, s1);
  std::map<Dimension, Viewpoint> viewpoints;
  for (const auto& [dim, s0] : r.stage1) {
    auto [vp, transcript] = run_strategy(r.unit, dim, s0, cfg.debate, registry, session);
    viewpoints.emplace(dim, std::move(vp));
    r.debates.emplace(dim, std::move(transcript));
  }
  auto judged = synthesize(r.unit, viewpoints, registry, session, NormalizeOptions{cfg.substring_overlap});
  r.final_set = std::move(judged.final_set);
  r.analysis = std::move(judged.analysis);
  r.score = mqm_score(r.final_set, cfg.weights);
}

}  // namespace

UnitResult evaluate_unit(const TranslationUnit& unit, const RunConfig& cfg, const PromptRegistry& registry,
                         Gateway& gateway) {
  UnitResult r;
  r.unit = unit;
  AgentSession session(gateway, cfg.request, unit.key().str());
  try {
    switch (cfg.method) {
      case Method::mmad: run_mmad(r, cfg, registry, session); break;
      case Method::gemba: {
        auto b = gemba_mqm_evaluate(unit, registry, session, cfg.weights);
        r.final_set = std::move(b.annotations);
        r.score = b.score;
        break;
      }
      case Method::eaprompt: {
        auto b = eaprompt_evaluate(unit, registry, session, cfg.weights);
        r.final_set = std::move(b.annotations);
        r.score = b.score;
        break;
      }
    }
  } catch (const std::exception& e) {
    r.failed = true;
    r.failure = unit.key().str() + ": " + e.what();
  }
  r.calls = session.take_records();
  r.warnings = std::move(session.warnings());
  r.errors = std::move(session.errors());
  return r;
}

std::vector<UnitResult> run_units(std::span<const TranslationUnit> units, const RunConfig& cfg,
                                  const PromptRegistry& registry, Gateway& gateway) {
  cfg.validate();
  std::vector<UnitResult> results(units.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < units.size(); i = next++) {
      results[i] = evaluate_unit(units[i], cfg, registry, gateway);
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.concurrency), units.size());
  if (n_threads <= 1) {
    worker();
    return results;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return results;
}

RunFiles RunFiles::in(const std::filesystem::path& dir) {
  return {dir / "annotations.jsonl", dir / "scores.tsv", dir / "transcripts.jsonl", dir / "report.txt",
          dir / "manifest.json"};
}

std::vector<OutputRecord> output_records(std::span<const UnitResult> results) {
  std::vector<OutputRecord> out;
  for (const auto& r : results) {
    if (r.failed) continue;
    out.push_back({r.unit.language_pair, r.unit.system_id, r.unit.doc_id, r.unit.seg_id, r.final_set.provenance,
                   r.score, r.final_set.annotations});
  }
  return out;
}

std::vector<ScoreRecord> score_records(std::span<const UnitResult> results) {
  std::vector<ScoreRecord> out;
  for (const auto& r : results) {
    if (!r.failed) out.push_back({r.unit.language_pair, r.unit.system_id, r.unit.seg_id, r.score});
  }
  return out;
}

std::vector<TranscriptRecord> transcript_records(std::span<const UnitResult> results) {
  std::vector<TranscriptRecord> out;
  std::int64_t id = 0;
  for (const auto& r : results) {
    for (const auto& c : r.calls) out.push_back({++id, c});
  }
  return out;
}

std::string quality_report(std::span<const ScoreRecord> scores) {
  std::map<std::string, std::vector<double>> by_lp;
  std::vector<double> all;
  for (const auto& s : scores) {
    by_lp[s.language_pair].push_back(s.score);
    all.push_back(s.score);
  }
  if (all.empty()) return "MQM quality buckets\nno scored segments\n";
  std::string out = render_bucket_report(score_distribution(all), "MQM quality buckets (all)");
  if (by_lp.size() > 1) {
    for (const auto& [lp, v] : by_lp) out += "\n" + render_bucket_report(score_distribution(v), "MQM quality buckets (" + lp + ")");
  }
  return out;
}

void write_run_outputs(const RunFiles& files, std::span<const UnitResult> results, RunManifest& manifest) {
  const auto records = output_records(results);
  const auto scores = score_records(results);
  const auto transcripts = transcript_records(results);
  write_annotations(files.annotations, records);
  write_scores(files.scores, scores);
  write_transcripts(files.transcripts, transcripts);
  write_file_atomic(files.report, quality_report(scores));

  manifest.units = static_cast<std::int64_t>(results.size());
  manifest.calls_per_stage.clear();
  manifest.hard_failures = manifest.warnings = manifest.errors = 0;
  for (const auto& r : results) {
    if (r.failed) ++manifest.hard_failures;
    manifest.warnings += static_cast<std::int64_t>(r.warnings.size());
    manifest.errors += static_cast<std::int64_t>(r.errors.size()) + (r.failed ? 1 : 0);
    for (const auto& c : r.calls) ++manifest.calls_per_stage[c.tag.stage];
  }
  manifest.total_calls = static_cast<std::int64_t>(transcripts.size());
}

}  // namespace mmad
