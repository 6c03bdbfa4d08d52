#pragma once

// Metric meta-evaluation against gold MQM: system pairwise accuracy,
// Pearson, tie-calibrated segment accuracy, the combined meta score, span
// P/R/F1 and quality-bucket distributions.
//
// The pair kernels are OpenMP-parallel; meta_eval::reference holds serial
// brute-force versions of the same statistics.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmad/mqm.hpp"

namespace mmad {

struct ScoredSegment {
  std::string language_pair;
  std::string seg_id;
  std::string system_id;
  double metric_score = 0.0;
  double gold_score = 0.0;
};

struct SystemMeans {
  double metric = 0.0;
  double gold = 0.0;
  std::size_t n = 0;
};

/// Throws InvalidInput on empty input. Appends a warning when systems cover
/// different segment sets.
std::map<std::string, SystemMeans> system_scores(std::span<const ScoredSegment> segments,
                                                 std::vector<std::string>* warnings = nullptr);

/// Fraction of gold-untied system pairs ranked in the gold order. Throws
/// InvalidInput with fewer than 2 systems, UndefinedStatistic when every
/// pair is gold-tied.
double system_pairwise_accuracy(const std::map<std::string, SystemMeans>& means);

/// Sample Pearson correlation. Throws InvalidInput on a length mismatch or
/// fewer than 2 points, UndefinedStatistic on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Metric/gold differences of every same-segment pair of distinct systems.
/// Segments group by (language_pair, seg_id).
struct PairDiff {
  double metric = 0.0;
  double gold = 0.0;
};
std::vector<PairDiff> segment_pairs(std::span<const ScoredSegment> segments);

/// Throws InvalidInput when there are no pairs.
double accuracy_t(std::span<const ScoredSegment> segments, double epsilon);
double accuracy_t(std::span<const PairDiff> pairs, double epsilon);

struct AccuracyTStar {
  double accuracy = 0.0;
  double epsilon = 0.0;
};
/// Best accuracy_t over epsilon in {0} and every observed |metric diff|;
/// ties go to the smallest epsilon.
AccuracyTStar accuracy_t_star(std::span<const ScoredSegment> segments);
AccuracyTStar accuracy_t_star(std::span<const PairDiff> pairs);

double meta_score(double sys_acc, double sys_r, double seg_acc_t, double seg_r);

struct SpanPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matches = 0;
  std::size_t n_predicted = 0;
  std::size_t n_gold = 0;
};

/// Normalized-span multiset matching; no-error annotations are ignored.
SpanPRF span_prf(const AnnotationSet& predicted, const AnnotationSet& gold);
/// Corpus P/R/F1 from pooled counts (micro average).
SpanPRF span_prf_micro(std::span<const SpanPRF> per_segment);
SpanPRF prf_from_counts(std::size_t matches, std::size_t n_predicted, std::size_t n_gold);

struct BucketDistribution {
  double hq = 0.0;  // percentages
  double mq = 0.0;
  double lq = 0.0;
  std::size_t n = 0;
  std::size_t n_hq = 0;
  std::size_t n_mq = 0;
  std::size_t n_lq = 0;
};
/// Throws InvalidInput on empty input or a positive score.
BucketDistribution score_distribution(std::span<const double> scores);

struct MetaReport {
  std::string label;  // language pair or "pooled"
  std::optional<double> sys_pairwise_acc;
  std::optional<double> sys_pearson;
  std::optional<double> seg_acc_t;
  double seg_acc_t_epsilon = 0.0;
  std::optional<double> seg_pearson;
  std::optional<double> meta;  // defined only when all four components are
  std::size_t n_systems = 0;
  std::size_t n_segments = 0;  // scored (segment, system) items
  std::size_t n_pairs = 0;     // same-segment system pairs
  std::vector<std::string> notes;  // why a component is undefined
};

struct MetaOptions {
  std::optional<double> epsilon;  // fixed epsilon instead of the sweep
};

/// One report per language pair, keyed by pair.
std::map<std::string, MetaReport> meta_evaluate_by_pair(std::span<const ScoredSegment> segments,
                                                        const MetaOptions& opts = {});
/// All pairs together: systems compared only within their pair, Pearson
/// over the flattened items.
MetaReport meta_evaluate_pooled(std::span<const ScoredSegment> segments, const MetaOptions& opts = {});

namespace meta_eval::reference {

double system_pairwise_accuracy(const std::map<std::string, SystemMeans>& means);
double accuracy_t(std::span<const ScoredSegment> segments, double epsilon);
AccuracyTStar accuracy_t_star(std::span<const ScoredSegment> segments);

}  // namespace meta_eval::reference

}  // namespace mmad
