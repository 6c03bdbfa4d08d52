#pragma once

// Dataset loading and run-artifact persistence. Tables are tab-separated
// with a header row; cells escape tab, newline, CR and backslash as \t, \n,
// \r and \\. Every write goes to a temporary file that is then renamed.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmad/gateway.hpp"
#include "mmad/meta_eval.hpp"
#include "mmad/mqm.hpp"

namespace mmad {

std::string escape_tsv_cell(std::string_view s);
/// Throws InvalidInput on a dangling or unknown escape.
std::string unescape_tsv_cell(std::string_view s);

/// Shortest decimal text that parses back to exactly v.
std::string format_number(double v);

/// Writes via <path>.tmp then rename; creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);
std::string file_digest(const std::filesystem::path& path);

/// segments.tsv: lp, system, doc, seg_id, source, target, reference.
std::vector<TranslationUnit> load_segments(const std::filesystem::path& path);
void write_segments(const std::filesystem::path& path, std::span<const TranslationUnit> units);

struct GoldData {
  std::map<UnitKey, AnnotationSet> sets;
  /// Gold MQM per unit; averaged over raters when a rater column exists.
  std::map<UnitKey, double> scores;
  std::vector<std::string> warnings;
};

/// gold.tsv: lp, system, doc, seg_id, category, severity, span, and an
/// optional rater column. A no-error/neutral row records an error-free
/// segment.
GoldData load_gold_annotations(const std::filesystem::path& path, const ScoreWeights& w = {});

struct ScoreRecord {
  std::string language_pair;
  std::string system_id;
  std::string seg_id;
  double score = 0.0;

  bool operator==(const ScoreRecord&) const = default;
};

/// scores.tsv: lp, system, seg_id, score.
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path, std::span<const ScoreRecord> records);
std::string serialize_scores(std::span<const ScoreRecord> records);

/// Gold scores: either a scores.tsv or a gold.tsv (detected by header).
std::vector<ScoreRecord> read_gold_scores(const std::filesystem::path& path, const ScoreWeights& w = {});

/// Joins metric and gold scores on (lp, system, seg_id). Throws InvalidInput
/// listing keys present on one side only.
std::vector<ScoredSegment> join_scores(std::span<const ScoreRecord> metric, std::span<const ScoreRecord> gold);

struct OutputRecord {
  std::string language_pair;
  std::string system_id;
  std::string doc_id;
  std::string seg_id;
  Provenance provenance = Provenance::judge;
  double score = 0.0;
  std::vector<ErrorAnnotation> annotations;

  UnitKey key() const { return {language_pair, system_id, doc_id, seg_id}; }
  bool operator==(const OutputRecord& o) const = default;
};

/// annotations.jsonl, one object per record.
std::string serialize_annotations(std::span<const OutputRecord> records);
void write_annotations(const std::filesystem::path& path, std::span<const OutputRecord> records);
std::vector<OutputRecord> read_annotations(const std::filesystem::path& path);

struct TranscriptRecord {
  std::int64_t call_id = 0;
  CallRecord call;
};

/// transcripts.jsonl: call_id, tag, stage, dimension, round, request_digest,
/// messages, response_content.
std::string serialize_transcripts(std::span<const TranscriptRecord> records);
void write_transcripts(const std::filesystem::path& path, std::span<const TranscriptRecord> records);
std::vector<TranscriptRecord> read_transcripts(const std::filesystem::path& path);

struct RunManifest {
  std::string run_id;
  std::string command;                        // evaluate or baseline
  std::map<std::string, std::string> config;  // resolved settings, flag names as keys
  std::map<std::string, int> template_versions;
  std::map<std::string, std::string> dataset_digests;
  std::string started_at;
  std::string finished_at;
  std::map<std::string, std::int64_t> calls_per_stage;
  std::int64_t total_calls = 0;
  std::int64_t cache_hits = 0;
  std::int64_t remote_calls = 0;
  std::int64_t units = 0;
  std::int64_t hard_failures = 0;
  std::int64_t warnings = 0;
  std::int64_t errors = 0;

  bool operator==(const RunManifest&) const = default;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

/// Plain-text HQ/MQ/LQ table.
std::string render_bucket_report(const BucketDistribution& d, std::string_view title);

}  // namespace mmad
