#pragma once

// Random meta-evaluation instances shared by the unit and acceptance tests.

#include <random>
#include <string>
#include <vector>

#include "mmad/meta_eval.hpp"

namespace mmad::test {

struct InstanceShape {
  int max_systems = 6;
  int max_segments = 25;
  int lang_pairs = 1;
  bool drop_items = false;  // leave occasional (system, segment) holes
};

/// Integer-valued scores in [-10, 0], so ties in both metric and gold are
/// frequent and every difference is exact.
inline std::vector<ScoredSegment> random_instance(std::mt19937& rng, const InstanceShape& shape = {}) {
  std::uniform_int_distribution<int> nsys(2, shape.max_systems);
  std::uniform_int_distribution<int> nseg(1, shape.max_segments);
  std::uniform_int_distribution<int> score(-10, 0);
  const int range = 1 + static_cast<int>(rng() % 11);
  std::vector<ScoredSegment> out;
  for (int lp = 0; lp < shape.lang_pairs; ++lp) {
    const int s = nsys(rng);
    const int n = nseg(rng);
    for (int seg = 0; seg < n; ++seg) {
      for (int sys = 0; sys < s; ++sys) {
        if (shape.drop_items && seg > 0 && rng() % 7 == 0) continue;
        ScoredSegment x;
        x.language_pair = "lp" + std::to_string(lp);
        x.seg_id = std::to_string(seg);
        x.system_id = "sys" + std::to_string(sys);
        x.metric_score = -static_cast<double>(rng() % range);
        x.gold_score = score(rng);
        out.push_back(x);
      }
    }
  }
  return out;
}

}  // namespace mmad::test
