#include "mmad/meta_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <omp.h>

#include "mmad/error.hpp"

namespace mmad {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

struct PairCounts {
  std::size_t correct = 0;
  std::size_t total = 0;
};

PairCounts pairwise_counts(const std::map<std::string, SystemMeans>& means) {
  std::vector<const SystemMeans*> v;
  for (const auto& [_, m] : means) v.push_back(&m);
  PairCounts c;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      const double dg = v[i]->gold - v[j]->gold;
      if (dg == 0.0) continue;
      ++c.total;
      if (sign(v[i]->metric - v[j]->metric) == sign(dg)) ++c.correct;
    }
  }
  return c;
}

std::string span_key(const ErrorAnnotation& a) { return a.span.all ? std::string("\x01" "ALL") : normalize_span(a.span.text); }

}  // namespace

std::map<std::string, SystemMeans> system_scores(std::span<const ScoredSegment> segments,
                                                 std::vector<std::string>* warnings) {
  if (segments.empty()) throw InvalidInput("system_scores needs at least one scored segment");
  std::map<std::string, SystemMeans> out;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> coverage;
  for (const auto& s : segments) {
    auto& m = out[s.system_id];
    m.metric += s.metric_score;
    m.gold += s.gold_score;
    ++m.n;
    coverage[s.system_id].emplace(s.language_pair, s.seg_id);
  }
  for (auto& [_, m] : out) {
    m.metric /= static_cast<double>(m.n);
    m.gold /= static_cast<double>(m.n);
  }
  if (warnings) {
    const auto& first = coverage.begin()->second;
    for (const auto& [sys, segs] : coverage) {
      if (segs != first) {
        warnings->push_back("system " + sys + " covers a different segment set than " + coverage.begin()->first);
      }
    }
  }
  return out;
}

double system_pairwise_accuracy(const std::map<std::string, SystemMeans>& means) {
  if (means.size() < 2) throw InvalidInput("system pairwise accuracy needs at least 2 systems");
  const auto c = pairwise_counts(means);
  if (c.total == 0) throw UndefinedStatistic("every system pair is tied in gold");
  return static_cast<double>(c.correct) / static_cast<double>(c.total);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pearson needs equal-length inputs");
  if (x.size() < 2) throw InvalidInput("pearson needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("pearson is undefined for a zero-variance input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<PairDiff> segment_pairs(std::span<const ScoredSegment> segments) {
  std::map<std::pair<std::string_view, std::string_view>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    groups[{segments[i].language_pair, segments[i].seg_id}].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> members;
  std::vector<std::size_t> offset{0};
  for (const auto& [key, idx] : groups) {
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        if (segments[idx[a]].system_id == segments[idx[b]].system_id) {
          throw InvalidInput("system " + segments[idx[a]].system_id + " scored twice for segment " +
                             std::string(key.first) + "/" + std::string(key.second));
        }
      }
    }
    members.push_back(&idx);
    offset.push_back(offset.back() + idx.size() * (idx.size() - 1) / 2);
  }
  std::vector<PairDiff> out(offset.back());
  const auto ngroups = static_cast<std::ptrdiff_t>(members.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t g = 0; g < ngroups; ++g) {
    const auto& idx = *members[g];
    std::size_t k = offset[g];
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const auto& x = segments[idx[a]];
        const auto& y = segments[idx[b]];
        out[k++] = {x.metric_score - y.metric_score, x.gold_score - y.gold_score};
      }
    }
  }
  return out;
}

double accuracy_t(std::span<const PairDiff> pairs, double epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidInput("epsilon must be nonnegative");
  if (pairs.empty()) throw InvalidInput("accuracy_t needs at least one same-segment system pair");
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  std::size_t correct = 0;
#pragma omp parallel for reduction(+ : correct)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& p = pairs[i];
    const bool metric_tie = std::fabs(p.metric) <= epsilon;
    const bool ok = p.gold == 0.0 ? metric_tie : (!metric_tie && sign(p.metric) == sign(p.gold));
    correct += ok ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

double accuracy_t(std::span<const ScoredSegment> segments, double epsilon) {
  const auto pairs = segment_pairs(segments);
  return accuracy_t(pairs, epsilon);
}

AccuracyTStar accuracy_t_star(std::span<const PairDiff> pairs) {
  if (pairs.empty()) throw InvalidInput("accuracy_t needs at least one same-segment system pair");
  // Gold ties count while |d| <= eps; correctly signed non-ties count while
  // |d| > eps. Accuracy only changes at those values, so they (plus 0) are
  // the only candidates needed; any other observed gap scores the same as
  // the nearest such value below it, which is smaller and wins the tie.
  std::vector<double> tie_gaps, hit_gaps;
  for (const auto& p : pairs) {
    if (p.gold == 0.0) {
      tie_gaps.push_back(std::fabs(p.metric));
    } else if (sign(p.metric) == sign(p.gold)) {
      hit_gaps.push_back(std::fabs(p.metric));
    }
  }
  std::sort(tie_gaps.begin(), tie_gaps.end());
  std::sort(hit_gaps.begin(), hit_gaps.end());
  std::vector<double> cand;
  cand.reserve(tie_gaps.size() + hit_gaps.size() + 1);
  cand.push_back(0.0);
  std::merge(tie_gaps.begin(), tie_gaps.end(), hit_gaps.begin(), hit_gaps.end(), std::back_inserter(cand));
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  std::vector<std::size_t> correct(cand.size());
  const auto nc = static_cast<std::ptrdiff_t>(cand.size());
#pragma omp parallel for
  for (std::ptrdiff_t i = 0; i < nc; ++i) {
    const double c = cand[i];
    const auto ties_in = std::upper_bound(tie_gaps.begin(), tie_gaps.end(), c) - tie_gaps.begin();
    const auto hits_out = hit_gaps.end() - std::upper_bound(hit_gaps.begin(), hit_gaps.end(), c);
    correct[i] = static_cast<std::size_t>(ties_in + hits_out);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < correct.size(); ++i) {
    if (correct[i] > correct[best]) best = i;
  }
  return {static_cast<double>(correct[best]) / static_cast<double>(pairs.size()), cand[best]};
}

AccuracyTStar accuracy_t_star(std::span<const ScoredSegment> segments) {
  const auto pairs = segment_pairs(segments);
  return accuracy_t_star(pairs);
}

double meta_score(double sys_acc, double sys_r, double seg_acc_t, double seg_r) {
  // Extended-precision sum: the plain double sum of (0.8, 0.6, 0.4, 0.2) rounds to 0.5000000000000001.
  const long double sum = static_cast<long double>(sys_acc) + sys_r + seg_acc_t + seg_r;
  return static_cast<double>(0.25L * sum);
}

SpanPRF prf_from_counts(std::size_t matches, std::size_t n_predicted, std::size_t n_gold) {
  SpanPRF r;
  r.matches = matches;
  r.n_predicted = n_predicted;
  r.n_gold = n_gold;
  r.precision = n_predicted == 0 ? (n_gold == 0 ? 1.0 : 0.0)
                                 : static_cast<double>(matches) / static_cast<double>(n_predicted);
  r.recall = n_gold == 0 ? (n_predicted == 0 ? 1.0 : 0.0) : static_cast<double>(matches) / static_cast<double>(n_gold);
  r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

SpanPRF span_prf(const AnnotationSet& predicted, const AnnotationSet& gold) {
  std::map<std::string, std::size_t> pred_counts, gold_counts;
  std::size_t np = 0, ng = 0;
  for (const auto& a : predicted.annotations) {
    if (a.is_no_error()) continue;
    ++pred_counts[span_key(a)];
    ++np;
  }
  for (const auto& a : gold.annotations) {
    if (a.is_no_error()) continue;
    ++gold_counts[span_key(a)];
    ++ng;
  }
  std::size_t matches = 0;
  for (const auto& [k, c] : pred_counts) {
    const auto it = gold_counts.find(k);
    if (it != gold_counts.end()) matches += std::min(c, it->second);
  }
  return prf_from_counts(matches, np, ng);
}

SpanPRF span_prf_micro(std::span<const SpanPRF> per_segment) {
  std::size_t m = 0, np = 0, ng = 0;
  for (const auto& s : per_segment) {
    m += s.matches;
    np += s.n_predicted;
    ng += s.n_gold;
  }
  return prf_from_counts(m, np, ng);
}

BucketDistribution score_distribution(std::span<const double> scores) {
  if (scores.empty()) throw InvalidInput("score distribution of an empty score list");
  std::size_t hq = 0, mq = 0, lq = 0;
  for (double s : scores) {
    switch (classify_quality_bucket(s)) {
      case QualityBucket::HQ: ++hq; break;
      case QualityBucket::MQ: ++mq; break;
      case QualityBucket::LQ: ++lq; break;
    }
  }
  const double n = static_cast<double>(scores.size());
  return {100.0 * static_cast<double>(hq) / n, 100.0 * static_cast<double>(mq) / n,
          100.0 * static_cast<double>(lq) / n, scores.size(), hq, mq, lq};
}

namespace {

template <typename F>
std::optional<double> guarded(F&& f, const std::string& what, std::vector<std::string>& notes) {
  try {
    return f();
  } catch (const Error& e) {
    notes.push_back(what + ": " + e.what());
    return std::nullopt;
  }
}

void finish_report(MetaReport& r, std::span<const ScoredSegment> segs, const std::vector<PairDiff>& pairs,
                   const MetaOptions& opts) {
  r.n_segments = segs.size();
  r.n_pairs = pairs.size();
  if (opts.epsilon) {
    r.seg_acc_t_epsilon = *opts.epsilon;
    r.seg_acc_t = guarded([&] { return accuracy_t(pairs, *opts.epsilon); }, "seg_acc_t", r.notes);
  } else {
    r.seg_acc_t = guarded(
        [&] {
          const auto best = accuracy_t_star(pairs);
          r.seg_acc_t_epsilon = best.epsilon;
          return best.accuracy;
        },
        "seg_acc_t", r.notes);
  }
  std::vector<double> m, g;
  for (const auto& s : segs) {
    m.push_back(s.metric_score);
    g.push_back(s.gold_score);
  }
  r.seg_pearson = guarded([&] { return pearson(m, g); }, "seg_pearson", r.notes);
  if (r.sys_pairwise_acc && r.sys_pearson && r.seg_acc_t && r.seg_pearson) {
    r.meta = meta_score(*r.sys_pairwise_acc, *r.sys_pearson, *r.seg_acc_t, *r.seg_pearson);
  }
}

}  // namespace

std::map<std::string, MetaReport> meta_evaluate_by_pair(std::span<const ScoredSegment> segments,
                                                        const MetaOptions& opts) {
  std::map<std::string, std::vector<ScoredSegment>> by_lp;
  for (const auto& s : segments) by_lp[s.language_pair].push_back(s);
  std::map<std::string, MetaReport> out;
  for (const auto& [lp, segs] : by_lp) {
    MetaReport r;
    r.label = lp;
    const auto means = system_scores(segs, &r.notes);
    r.n_systems = means.size();
    r.sys_pairwise_acc = guarded([&] { return system_pairwise_accuracy(means); }, "sys_pairwise_acc", r.notes);
    std::vector<double> mm, gm;
    for (const auto& [_, v] : means) {
      mm.push_back(v.metric);
      gm.push_back(v.gold);
    }
    r.sys_pearson = guarded([&] { return pearson(mm, gm); }, "sys_pearson", r.notes);
    finish_report(r, segs, segment_pairs(segs), opts);
    out.emplace(lp, std::move(r));
  }
  return out;
}

MetaReport meta_evaluate_pooled(std::span<const ScoredSegment> segments, const MetaOptions& opts) {
  MetaReport r;
  r.label = "pooled";
  std::map<std::string, std::vector<ScoredSegment>> by_lp;
  for (const auto& s : segments) by_lp[s.language_pair].push_back(s);
  PairCounts pc;
  std::vector<double> mm, gm;
  for (const auto& [lp, segs] : by_lp) {
    const auto means = system_scores(segs, &r.notes);
    r.n_systems += means.size();
    const auto c = pairwise_counts(means);
    pc.correct += c.correct;
    pc.total += c.total;
    for (const auto& [_, v] : means) {
      mm.push_back(v.metric);
      gm.push_back(v.gold);
    }
  }
  r.sys_pairwise_acc = guarded(
      [&] {
        if (pc.total == 0) throw UndefinedStatistic("no gold-untied system pair in any language pair");
        return static_cast<double>(pc.correct) / static_cast<double>(pc.total);
      },
      "sys_pairwise_acc", r.notes);
  r.sys_pearson = guarded([&] { return pearson(mm, gm); }, "sys_pearson", r.notes);
  finish_report(r, segments, segment_pairs(segments), opts);
  return r;
}

}  // namespace mmad
