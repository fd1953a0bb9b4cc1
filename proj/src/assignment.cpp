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

#include "histrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace histrack {

int Assignment::gt_for(int prediction) const {
  for (const auto& [p, g] : pairs) {
    if (p == prediction) return g;
  }
  return -1;
}

bool Assignment::is_partition(int n_pred, int n_gt) const {
  std::vector<int> pc(static_cast<std::size_t>(n_pred), 0);
  std::vector<int> gc(static_cast<std::size_t>(n_gt), 0);
  auto bump = [](std::vector<int>& v, int i) {
    if (i < 0 || i >= static_cast<int>(v.size())) return false;
    ++v[static_cast<std::size_t>(i)];
    return true;
  };
  for (const auto& [p, g] : pairs) {
    if (!bump(pc, p) || !bump(gc, g)) return false;
  }
  for (int p : unmatched_predictions) {
    if (!bump(pc, p)) return false;
  }
  for (int g : unmatched_gt) {
    if (!bump(gc, g)) return false;
  }
  return std::all_of(pc.begin(), pc.end(), [](int c) { return c == 1; }) &&
         std::all_of(gc.begin(), gc.end(), [](int c) { return c == 1; });
}

namespace {

// Shortest augmenting path Hungarian method for rows <= cols. Returns the
// column assigned to each row.
std::vector<int> hungarian(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(m + 1), 0.0);
  std::vector<int> p(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(m + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j) {
    if (p[static_cast<std::size_t>(j)] != 0) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Assignment solve_min_cost(const Mat& cost) {
  for (Eigen::Index i = 0; i < cost.size(); ++i) {
    if (!std::isfinite(cost(i))) throw std::invalid_argument("solve_min_cost: non-finite cost");
  }
  const int r = static_cast<int>(cost.rows());
  const int c = static_cast<int>(cost.cols());
  Assignment out;
  if (r == 0 || c == 0) {
    for (int i = 0; i < r; ++i) out.unmatched_predictions.push_back(i);
    for (int j = 0; j < c; ++j) out.unmatched_gt.push_back(j);
    return out;
  }
  std::vector<bool> row_used(static_cast<std::size_t>(r), false), col_used(static_cast<std::size_t>(c), false);
  if (r <= c) {
    const auto rc = hungarian(cost);
    for (int i = 0; i < r; ++i) out.pairs.emplace_back(i, rc[static_cast<std::size_t>(i)]);
  } else {
    const auto cr = hungarian(cost.transpose());
    for (int j = 0; j < c; ++j) out.pairs.emplace_back(cr[static_cast<std::size_t>(j)], j);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [i, j] : out.pairs) {
    row_used[static_cast<std::size_t>(i)] = true;
    col_used[static_cast<std::size_t>(j)] = true;
  }
  for (int i = 0; i < r; ++i) {
    if (!row_used[static_cast<std::size_t>(i)]) out.unmatched_predictions.push_back(i);
  }
  for (int j = 0; j < c; ++j) {
    if (!col_used[static_cast<std::size_t>(j)]) out.unmatched_gt.push_back(j);
  }
  return out;
}

double assignment_cost(const Mat& cost, const Assignment& a) {
  double total = 0.0;
  for (const auto& [i, j] : a.pairs) total += cost(i, j);
  return total;
}

double matching_cost(const Prediction& pred, const AnnotationEntry& gt, const MatchWeights& w) {
  const double p = gt.class_id < pred.class_probs.size() ? pred.class_probs[gt.class_id] : 0.0;
  const double l1 = std::abs(pred.box.cx - gt.box.cx) + std::abs(pred.box.cy - gt.box.cy) +
                    std::abs(pred.box.w - gt.box.w) + std::abs(pred.box.h - gt.box.h);
  return -w.cls * p + w.l1 * l1 - w.giou * generalized_iou(pred.box, gt.box);
}

Assignment build_matching(const std::vector<int>& track_ids, const std::vector<Prediction>& det_preds,
                          const FrameAnnotations& gt, const MatchWeights& weights) {
  gt.validate();
  const int n_tracks = static_cast<int>(track_ids.size());
  const int n_gt = static_cast<int>(gt.entries.size());
  std::map<int, int> gt_index;
  for (int g = 0; g < n_gt; ++g) gt_index[gt.entries[static_cast<std::size_t>(g)].track_id] = g;

  Assignment out;
  std::vector<bool> gt_taken(static_cast<std::size_t>(n_gt), false);
  for (int t = 0; t < n_tracks; ++t) {
    auto it = gt_index.find(track_ids[static_cast<std::size_t>(t)]);
    if (it != gt_index.end() && !gt_taken[static_cast<std::size_t>(it->second)]) {
      out.pairs.emplace_back(t, it->second);
      gt_taken[static_cast<std::size_t>(it->second)] = true;
    } else {
      out.unmatched_predictions.push_back(t);
    }
  }

  std::vector<int> free_gt;
  for (int g = 0; g < n_gt; ++g) {
    if (!gt_taken[static_cast<std::size_t>(g)]) free_gt.push_back(g);
  }
  Mat cost(static_cast<Eigen::Index>(det_preds.size()), static_cast<Eigen::Index>(free_gt.size()));
  for (std::size_t i = 0; i < det_preds.size(); ++i) {
    for (std::size_t j = 0; j < free_gt.size(); ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          matching_cost(det_preds[i], gt.entries[static_cast<std::size_t>(free_gt[j])], weights);
    }
  }
  const Assignment det = solve_min_cost(cost);
  for (const auto& [i, j] : det.pairs) out.pairs.emplace_back(n_tracks + i, free_gt[static_cast<std::size_t>(j)]);
  for (int i : det.unmatched_predictions) out.unmatched_predictions.push_back(n_tracks + i);
  for (int j : det.unmatched_gt) out.unmatched_gt.push_back(free_gt[static_cast<std::size_t>(j)]);
  std::sort(out.pairs.begin(), out.pairs.end());
  std::sort(out.unmatched_predictions.begin(), out.unmatched_predictions.end());
  std::sort(out.unmatched_gt.begin(), out.unmatched_gt.end());
  return out;
}

}  // namespace histrack
