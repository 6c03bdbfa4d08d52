// Serial brute-force versions of the pair statistics, kept as the baseline
// for the parallel kernels in tests and benchmarks.

#include <cmath>
#include <set>

#include "mmad/error.hpp"
#include "mmad/meta_eval.hpp"

namespace mmad::meta_eval::reference {

namespace {
int sign(double v) { return (v > 0.0) - (v < 0.0); }
}  // namespace

double system_pairwise_accuracy(const std::map<std::string, SystemMeans>& means) {
  if (means.size() < 2) throw InvalidInput("system pairwise accuracy needs at least 2 systems");
  std::size_t correct = 0, total = 0;
  // Ordered pairs visit each unordered pair twice; the ratio is unchanged.
  for (const auto& [a, ma] : means) {
    for (const auto& [b, mb] : means) {
      if (a == b || ma.gold == mb.gold) continue;
      ++total;
      if (sign(ma.metric - mb.metric) == sign(ma.gold - mb.gold)) ++correct;
    }
  }
  if (total == 0) throw UndefinedStatistic("every system pair is tied in gold");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double accuracy_t(std::span<const ScoredSegment> segments, double epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidInput("epsilon must be nonnegative");
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      const auto& x = segments[i];
      const auto& y = segments[j];
      if (x.language_pair != y.language_pair || x.seg_id != y.seg_id || x.system_id == y.system_id) continue;
      ++total;
      const double dm = x.metric_score - y.metric_score;
      const double dg = x.gold_score - y.gold_score;
      const int rel_m = std::fabs(dm) <= epsilon ? 0 : sign(dm);
      if (rel_m == sign(dg)) ++correct;
    }
  }
  if (total == 0) throw InvalidInput("accuracy_t needs at least one same-segment system pair");
  return static_cast<double>(correct) / static_cast<double>(total);
}

AccuracyTStar accuracy_t_star(std::span<const ScoredSegment> segments) {
  std::set<double> cand{0.0};
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      const auto& x = segments[i];
      const auto& y = segments[j];
      if (x.language_pair != y.language_pair || x.seg_id != y.seg_id || x.system_id == y.system_id) continue;
      cand.insert(std::fabs(x.metric_score - y.metric_score));
    }
  }
  AccuracyTStar best{-1.0, 0.0};
  for (double eps : cand) {
    const double acc = reference::accuracy_t(segments, eps);
    if (acc > best.accuracy) best = {acc, eps};
  }
  return best;
}

}  // namespace mmad::meta_eval::reference
