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

// Reference implementations used only by tests. They trade speed for
// directness: enumeration, rasterization and textbook formulas.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "histrack/metrics.hpp"
#include "histrack/rng.hpp"
#include "histrack/types.hpp"

namespace histrack::oracle {

// Cells of an n-cell grid over [0, 1] whose centres fall in [lo, hi).
inline long cells_in(double lo, double hi, long n) {
  long count = 0;
  for (long i = 0; i < n; ++i) {
    const double c = (i + 0.5) / static_cast<double>(n);
    if (c >= lo && c < hi) ++count;
  }
  return count;
}

struct GridAreas {
  long a = 0, b = 0, inter = 0, hull = 0;
  long uni() const { return a + b - inter; }
  double iou() const { return static_cast<double>(inter) / static_cast<double>(uni()); }
  double giou() const { return iou() - static_cast<double>(hull - uni()) / static_cast<double>(hull); }
};

// Axis-aligned rasterization on an n x n grid: a cell belongs to a box when
// its centre does, so counts factor into per-axis counts.
inline GridAreas rasterize(const BoundingBox& a, const BoundingBox& b, long n = 10000) {
  const auto ca = a.corners(), cb = b.corners();
  GridAreas g;
  g.a = cells_in(ca.x1, ca.x2, n) * cells_in(ca.y1, ca.y2, n);
  g.b = cells_in(cb.x1, cb.x2, n) * cells_in(cb.y1, cb.y2, n);
  g.inter = cells_in(std::max(ca.x1, cb.x1), std::min(ca.x2, cb.x2), n) *
            cells_in(std::max(ca.y1, cb.y1), std::min(ca.y2, cb.y2), n);
  g.hull = cells_in(std::min(ca.x1, cb.x1), std::max(ca.x2, cb.x2), n) *
           cells_in(std::min(ca.y1, cb.y1), std::max(ca.y2, cb.y2), n);
  return g;
}

// Minimum total cost over all assignments of min(R, C) pairs. Each candidate
// is summed in increasing row order, as assignment_cost does.
inline double brute_force_min_cost(const Mat& cost) {
  const bool transpose = cost.rows() > cost.cols();
  const Mat m = transpose ? Mat(cost.transpose()) : cost;
  std::vector<int> cols(static_cast<std::size_t>(m.cols()));
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<std::pair<int, int>> pairs;
    for (int r = 0; r < m.rows(); ++r) {
      const int c = cols[static_cast<std::size_t>(r)];
      pairs.push_back(transpose ? std::pair{c, r} : std::pair{r, c});
    }
    std::sort(pairs.begin(), pairs.end());
    double total = 0;
    for (const auto& [r, c] : pairs) total += cost(r, c);
    best = std::min(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

// All partial injective maps from [0, rows) into [0, cols); -1 = unmatched.
inline void for_each_partial_matching(int rows, int cols, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> pick(static_cast<std::size_t>(rows), -1);
  std::vector<bool> used(static_cast<std::size_t>(cols), false);
  std::function<void(int)> rec = [&](int r) {
    if (r == rows) {
      f(pick);
      return;
    }
    pick[static_cast<std::size_t>(r)] = -1;
    rec(r + 1);
    for (int c = 0; c < cols; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      used[static_cast<std::size_t>(c)] = true;
      pick[static_cast<std::size_t>(r)] = c;
      rec(r + 1);
      used[static_cast<std::size_t>(c)] = false;
    }
    pick[static_cast<std::size_t>(r)] = -1;
  };
  rec(0);
}

inline std::vector<int> unique_ids(const Sequence& s) {
  std::set<int> ids;
  for (const auto& f : s) ids.insert(f.ids.begin(), f.ids.end());
  return {ids.begin(), ids.end()};
}

// IDF1 by enumerating every trajectory bijection between gt and pred ids.
inline double idf1(const Sequence& pred, const Sequence& gt, double thresh = 0.5) {
  const auto gids = unique_ids(gt), pids = unique_ids(pred);
  long n_gt = 0, n_pred = 0;
  for (const auto& f : gt) n_gt += static_cast<long>(f.ids.size());
  for (const auto& f : pred) n_pred += static_cast<long>(f.ids.size());
  if (n_gt + n_pred == 0) return 1.0;
  // Frames where gt id g and pred id p overlap enough.
  auto overlap = [&](int g, int p) {
    long k = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) {
      for (std::size_t i = 0; i < gt[t].ids.size(); ++i) {
        for (std::size_t j = 0; j < pred[t].ids.size(); ++j) {
          if (gt[t].ids[i] == g && pred[t].ids[j] == p && box_iou(gt[t].boxes[i], pred[t].boxes[j]) >= thresh) ++k;
        }
      }
    }
    return k;
  };
  long best = 0;
  for_each_partial_matching(static_cast<int>(gids.size()), static_cast<int>(pids.size()), [&](const std::vector<int>& m) {
    long tp = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] >= 0) tp += overlap(gids[i], pids[static_cast<std::size_t>(m[i])]);
    }
    best = std::max(best, tp);
  });
  return 2.0 * static_cast<double>(best) / static_cast<double>(n_gt + n_pred);
}

struct HotaAlpha {
  long tp = 0, fn = 0, fp = 0;
  double det_a = 0, ass_a = 0, hota = 0;
};

// HOTA at one threshold straight from its definition: per frame, the
// matching of maximal summed IoU among pairs with IoU >= alpha (enumerated),
// then the association score of every true positive.
inline HotaAlpha hota_at(const Sequence& pred, const Sequence& gt, double alpha) {
  HotaAlpha r;
  std::vector<std::pair<int, int>> tps;
  std::map<int, long> gt_len, pred_len;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    const auto& g = gt[t];
    const auto& p = pred[t];
    for (int id : g.ids) ++gt_len[id];
    for (int id : p.ids) ++pred_len[id];
    double best = -1;
    std::vector<int> best_m;
    for_each_partial_matching(static_cast<int>(g.ids.size()), static_cast<int>(p.ids.size()),
                              [&](const std::vector<int>& m) {
                                double s = 0;
                                for (std::size_t i = 0; i < m.size(); ++i) {
                                  if (m[i] < 0) continue;
                                  const double v = box_iou(g.boxes[i], p.boxes[static_cast<std::size_t>(m[i])]);
                                  if (v < alpha) return;
                                  s += v;
                                }
                                if (s > best) {
                                  best = s;
                                  best_m = m;
                                }
                              });
    long matched = 0;
    for (std::size_t i = 0; i < best_m.size(); ++i) {
      if (best_m[i] < 0) continue;
      ++matched;
      tps.emplace_back(g.ids[i], p.ids[static_cast<std::size_t>(best_m[i])]);
    }
    r.tp += matched;
    r.fn += static_cast<long>(g.ids.size()) - matched;
    r.fp += static_cast<long>(p.ids.size()) - matched;
  }
  const long denom = r.tp + r.fn + r.fp;
  r.det_a = denom == 0 ? 1.0 : static_cast<double>(r.tp) / static_cast<double>(denom);
  if (r.tp == 0) {
    r.ass_a = denom == 0 ? 1.0 : 0.0;
  } else {
    double sum = 0;
    for (const auto& c : tps) {
      const long tpa = std::count(tps.begin(), tps.end(), c);
      const long fna = gt_len[c.first] - tpa;
      const long fpa = pred_len[c.second] - tpa;
      sum += static_cast<double>(tpa) / static_cast<double>(tpa + fna + fpa);
    }
    r.ass_a = sum / static_cast<double>(r.tp);
  }
  r.hota = std::sqrt(r.det_a * r.ass_a);
  return r;
}

// Random scenarios with up to three objects over up to six frames:
// localization noise, dropped boxes, false alarms and identity changes.
inline std::pair<Sequence, Sequence> random_scenario(Rng& rng) {
  const int frames = rng.uniform_int(1, 6);
  const int n = rng.uniform_int(1, 3);
  Sequence gt(static_cast<std::size_t>(frames)), pred(static_cast<std::size_t>(frames));
  std::vector<BoundingBox> pos;
  std::vector<int> label;
  for (int i = 0; i < n; ++i) {
    pos.push_back({rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.08, 0.25), rng.uniform(0.08, 0.25)});
    label.push_back(10 + i);
  }
  int next_label = 20;
  for (int t = 0; t < frames; ++t) {
    for (int i = 0; i < n; ++i) {
      auto& b = pos[static_cast<std::size_t>(i)];
      b.cx += rng.uniform(-0.05, 0.05);
      b.cy += rng.uniform(-0.05, 0.05);
      if (rng.bernoulli(0.1)) continue;  // not present this frame
      gt[static_cast<std::size_t>(t)].ids.push_back(i + 1);
      gt[static_cast<std::size_t>(t)].boxes.push_back(b);
      if (rng.bernoulli(0.15)) continue;  // missed
      if (rng.bernoulli(0.15)) label[static_cast<std::size_t>(i)] = next_label++;
      if (rng.bernoulli(0.1)) std::swap(label[static_cast<std::size_t>(i)], label[static_cast<std::size_t>((i + 1) % n)]);
      const double s = rng.uniform(0.0, 0.04);
      BoundingBox p{b.cx + rng.uniform(-s, s), b.cy + rng.uniform(-s, s), b.w * rng.uniform(0.8, 1.2),
                    b.h * rng.uniform(0.8, 1.2)};
      auto& f = pred[static_cast<std::size_t>(t)];
      if (std::find(f.ids.begin(), f.ids.end(), label[static_cast<std::size_t>(i)]) != f.ids.end()) continue;
      f.ids.push_back(label[static_cast<std::size_t>(i)]);
      f.boxes.push_back(p);
    }
    if (rng.bernoulli(0.2)) {
      pred[static_cast<std::size_t>(t)].ids.push_back(90 + t);
      pred[static_cast<std::size_t>(t)].boxes.push_back({rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), 0.1, 0.1});
    }
  }
  return {pred, gt};
}

}  // namespace histrack::oracle
