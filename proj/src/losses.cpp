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

#include "histrack/losses.hpp"

#include <algorithm>
#include <stdexcept>

namespace histrack {

namespace {

using ad::Var;

Var zero(ad::Tape& tape) { return tape.constant(Mat::Zero(1, 1)); }

// -log p or the focal variant for each picked log-probability.
Var class_loss_terms(Var log_probs, const std::vector<std::pair<int, int>>& picks, ClassLoss kind) {
  Var logp = ad::pick_elements(log_probs, picks);
  if (kind == ClassLoss::kCrossEntropy) return ad::scale(logp, -1.0);
  Var one_minus = ad::add_scalar(ad::scale(ad::exp(logp), -1.0), 1.0);
  return ad::scale(ad::mul(ad::mul(one_minus, one_minus), logp), -1.0);
}

Mat target_boxes(const FrameAnnotations& gt, const std::vector<int>& gt_indices) {
  Mat m(static_cast<Eigen::Index>(gt_indices.size()), 4);
  for (std::size_t i = 0; i < gt_indices.size(); ++i) {
    const auto& b = gt.entries[static_cast<std::size_t>(gt_indices[i])].box;
    m.row(static_cast<Eigen::Index>(i)) << b.cx, b.cy, b.w, b.h;
  }
  return m;
}

}  // namespace

Var giou_loss_rows(Var boxes, const Mat& targets) {
  ad::Tape& tape = *boxes.tape;
  auto col = [](Var v, int c) { return ad::slice_cols(v, c, 1); };
  Var cx = col(boxes, 0), cy = col(boxes, 1), w = col(boxes, 2), h = col(boxes, 3);
  Var px1 = ad::sub(cx, ad::scale(w, 0.5)), px2 = ad::add(cx, ad::scale(w, 0.5));
  Var py1 = ad::sub(cy, ad::scale(h, 0.5)), py2 = ad::add(cy, ad::scale(h, 0.5));
  const Mat gx1 = targets.col(0) - targets.col(2) / 2, gx2 = targets.col(0) + targets.col(2) / 2;
  const Mat gy1 = targets.col(1) - targets.col(3) / 2, gy2 = targets.col(1) + targets.col(3) / 2;
  Var tx1 = tape.constant(gx1), tx2 = tape.constant(gx2), ty1 = tape.constant(gy1), ty2 = tape.constant(gy2);
  Var garea = tape.constant(targets.col(2).cwiseProduct(targets.col(3)));

  Var iw = ad::relu(ad::sub(ad::min_elem(px2, tx2), ad::max_elem(px1, tx1)));
  Var ih = ad::relu(ad::sub(ad::min_elem(py2, ty2), ad::max_elem(py1, ty1)));
  Var inter = ad::mul(iw, ih);
  Var uni = ad::sub(ad::add(ad::mul(w, h), garea), inter);
  Var hull = ad::mul(ad::sub(ad::max_elem(px2, tx2), ad::min_elem(px1, tx1)),
                     ad::sub(ad::max_elem(py2, ty2), ad::min_elem(py1, ty1)));
  Var giou = ad::sub(ad::div(inter, uni), ad::div(ad::sub(hull, uni), hull));
  return ad::add_scalar(ad::scale(giou, -1.0), 1.0);
}

BipartiteTerms bipartite_loss(Var log_probs, Var boxes, const FrameAnnotations& gt, const Assignment& pi,
                              const Config& config) {
  ad::Tape& tape = *log_probs.tape;
  const int m = static_cast<int>(log_probs.rows());
  if (boxes.rows() != m) throw std::invalid_argument("bipartite_loss: row mismatch");
  BipartiteTerms out{zero(tape), zero(tape), zero(tape)};
  if (m == 0) return out;

  std::vector<std::pair<int, int>> picks;
  Mat weights(m, 1);
  for (int r = 0; r < m; ++r) {
    const int g = pi.gt_for(r);
    const int cls = g < 0 ? 0 : gt.entries[static_cast<std::size_t>(g)].class_id;
    picks.emplace_back(r, cls);
    weights(r, 0) = g < 0 ? config.background_weight : 1.0;
  }
  Var per_row = class_loss_terms(log_probs, picks, config.class_loss);
  out.cls = ad::weighted_sum(per_row, weights / weights.sum());

  if (!pi.pairs.empty()) {
    std::vector<int> rows, gts;
    for (const auto& [r, g] : pi.pairs) {
      rows.push_back(r);
      gts.push_back(g);
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    Var matched = ad::gather_rows(boxes, rows);
    const Mat targets = target_boxes(gt, gts);
    out.l1 = ad::scale(ad::sum(ad::abs(ad::sub(matched, tape.constant(targets)))), inv);
    out.giou = ad::scale(ad::sum(giou_loss_rows(matched, targets)), inv);
  }
  return out;
}

TocTerms toc_loss(Var log_probs, Var boxes, const std::vector<HistoricalRows>& historical, const FrameAnnotations& gt,
                  const Assignment& pi, const Config& config) {
  ad::Tape& tape = *log_probs.tape;
  TocTerms out{zero(tape), 0};
  std::vector<std::pair<int, int>> picks;
  std::vector<int> box_rows, box_gts;
  for (const auto& h : historical) {
    const int g = pi.gt_for(h.track_index);
    for (int r : h.rows) {
      if (g < 0) {
        picks.emplace_back(r, 0);
      } else {
        picks.emplace_back(r, gt.entries[static_cast<std::size_t>(g)].class_id);
        box_rows.push_back(r);
        box_gts.push_back(g);
      }
    }
  }
  if (picks.empty()) return out;
  std::vector<Var> parts{ad::sum(class_loss_terms(log_probs, picks, config.class_loss))};
  if (!box_rows.empty()) {
    Var matched = ad::gather_rows(boxes, box_rows);
    const Mat targets = target_boxes(gt, box_gts);
    parts.push_back(ad::scale(ad::sum(ad::abs(ad::sub(matched, tape.constant(targets)))), config.lambda_l1));
    parts.push_back(ad::scale(ad::sum(giou_loss_rows(matched, targets)), config.lambda_giou));
  }
  Var total = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) total = ad::add(total, parts[i]);
  out.numerator = total;
  out.count = static_cast<int>(box_rows.size());
  return out;
}

Var clip_loss(const std::vector<std::vector<FrameLayerTerms>>& terms, const Config& config) {
  if (terms.empty() || terms.front().empty()) throw std::invalid_argument("clip_loss: needs at least one frame");
  const std::size_t layers = terms.front().size();
  Var total = terms.front().front().bip.cls.tape->constant(Mat::Zero(1, 1));
  for (std::size_t l = 0; l < layers; ++l) {
    int count = 0;
    Var toc = terms.front().front().bip.cls.tape->constant(Mat::Zero(1, 1));
    for (const auto& frame : terms) {
      if (frame.size() != layers) throw std::invalid_argument("clip_loss: layer count differs between frames");
      const auto& t = frame[l];
      total = ad::add(total, ad::scale(t.bip.cls, config.lambda_cls));
      total = ad::add(total, ad::scale(t.bip.l1, config.lambda_l1));
      total = ad::add(total, ad::scale(t.bip.giou, config.lambda_giou));
      toc = ad::add(toc, t.toc.numerator);
      count += t.toc.count;
    }
    total = ad::add(total, ad::scale(toc, 1.0 / std::max(1, count)));
  }
  return total;
}

LossBreakdown summarize(const std::vector<std::vector<FrameLayerTerms>>& terms, const Config& config) {
  LossBreakdown b;
  if (terms.empty()) return b;
  const std::size_t layers = terms.front().size();
  for (std::size_t l = 0; l < layers; ++l) {
    double num = 0;
    int count = 0;
    for (const auto& frame : terms) {
      b.bip_class += frame[l].bip.cls.scalar();
      b.bip_l1 += frame[l].bip.l1.scalar();
      b.bip_giou += frame[l].bip.giou.scalar();
      num += frame[l].toc.numerator.scalar();
      count += frame[l].toc.count;
    }
    b.toc += num / std::max(1, count);
    b.n_his += count;
  }
  b.total = config.lambda_cls * b.bip_class + config.lambda_l1 * b.bip_l1 + config.lambda_giou * b.bip_giou + b.toc;
  return b;
}

}  // namespace histrack
