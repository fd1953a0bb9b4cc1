/* Copyright 2026 The histrack Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <utility>
#include <vector>

#include "histrack/types.hpp"

namespace histrack {

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (prediction index, ground-truth index), sorted
  std::vector<int> unmatched_predictions;
  std::vector<int> unmatched_gt;

  // -1 when unmatched.
  int gt_for(int prediction) const;
  // True when every index in [0, n_pred) and [0, n_gt) appears exactly once.
  bool is_partition(int n_pred, int n_gt) const;
};

// Minimum-cost assignment of min(R, C) pairs. Deterministic: the solver scans
// rows in increasing order and columns in increasing order, keeping the first
// minimum it meets. Throws std::invalid_argument on non-finite costs.
Assignment solve_min_cost(const Mat& cost);

double assignment_cost(const Mat& cost, const Assignment& a);

struct MatchWeights {
  double cls = 2.0;
  double l1 = 5.0;
  double giou = 2.0;
};

// Cost of assigning a detection prediction to a ground-truth object.
double matching_cost(const Prediction& pred, const AnnotationEntry& gt, const MatchWeights& w);

// Identity-first matching. Prediction indices 0..tracks-1 are the newest
// queries of `track_ids` (in order); detection predictions follow. Tracks bind
// to the ground-truth entry carrying their id; the remaining entries are
// matched to detection predictions by minimum cost.
Assignment build_matching(const std::vector<int>& track_ids, const std::vector<Prediction>& det_preds,
                          const FrameAnnotations& gt, const MatchWeights& weights);

}  // namespace histrack
