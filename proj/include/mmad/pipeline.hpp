#pragma once

// End-to-end evaluation of a dataset: the debate pipeline (stage 1, debate, judge) or a
// single-call baseline per unit, units spread over worker threads, plus the
// run artifacts (annotations, scores, transcripts, report, manifest).

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmad/dataset_io.hpp"
#include "mmad/debate.hpp"
#include "mmad/gateway.hpp"
#include "mmad/mqm.hpp"
#include "mmad/prompts.hpp"

namespace mmad {

enum class Method { mmad, gemba, eaprompt };
std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view text);

struct RunConfig {
  Method method = Method::mmad;
  RequestDefaults request;
  DebateConfig debate;
  std::vector<Dimension> dimensions{std::begin(kAllDimensions), std::end(kAllDimensions)};
  std::size_t shots = ExamplePack::kShots;
  bool allow_zero_shot = false;
  bool substring_overlap = false;
  ScoreWeights weights;
  int concurrency = 4;

  void validate() const;
};

struct UnitResult {
  TranslationUnit unit;
  bool failed = false;
  std::string failure;
  AnnotationSet final_set;
  double score = 0.0;
  std::map<Dimension, AnnotationSet> stage1;
  std::map<Dimension, DebateTranscript> debates;
  std::optional<std::string> analysis;
  std::vector<CallRecord> calls;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
};

/// Never throws for per-unit problems; they mark the result failed.
UnitResult evaluate_unit(const TranslationUnit& unit, const RunConfig& cfg, const PromptRegistry& registry,
                         Gateway& gateway);

/// Results come back in input order regardless of scheduling.
std::vector<UnitResult> run_units(std::span<const TranslationUnit> units, const RunConfig& cfg,
                                  const PromptRegistry& registry, Gateway& gateway);

struct RunFiles {
  std::filesystem::path annotations;
  std::filesystem::path scores;
  std::filesystem::path transcripts;
  std::filesystem::path report;
  std::filesystem::path manifest;

  static RunFiles in(const std::filesystem::path& dir);
};

std::vector<OutputRecord> output_records(std::span<const UnitResult> results);
std::vector<ScoreRecord> score_records(std::span<const UnitResult> results);
/// Call ids are assigned in unit order, then call order within a unit.
std::vector<TranscriptRecord> transcript_records(std::span<const UnitResult> results);
std::string quality_report(std::span<const ScoreRecord> scores);

/// Writes every artifact except the manifest and fills the manifest's
/// call, unit, warning and error tallies.
void write_run_outputs(const RunFiles& files, std::span<const UnitResult> results, RunManifest& manifest);

}  // namespace mmad
