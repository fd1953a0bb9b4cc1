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

#include "histrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "histrack/assignment.hpp"

namespace histrack {

namespace {

void check_lengths(const Sequence& pred, const Sequence& gt) {
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("metrics: prediction covers " + std::to_string(pred.size()) +
                                " frames, ground truth " + std::to_string(gt.size()));
  }
}

Mat iou_matrix(const FrameObjects& gt, const FrameObjects& pred) {
  Mat m(static_cast<Eigen::Index>(gt.ids.size()), static_cast<Eigen::Index>(pred.ids.size()));
  for (std::size_t i = 0; i < gt.ids.size(); ++i) {
    for (std::size_t j = 0; j < pred.ids.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = box_iou(gt.boxes[i], pred.boxes[j]);
    }
  }
  return m;
}

// Objects of a frame ordered by id, so ties resolve towards lower ids.
std::vector<std::size_t> by_id(const FrameObjects& f) {
  std::vector<std::size_t> order(f.ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f.ids[a] < f.ids[b]; });
  return order;
}

double ratio(double num, double den, double empty) { return den > 0 ? num / den : empty; }

}  // namespace

Sequence gt_sequence(const VideoItem& video) {
  Sequence seq(video.annotations.size());
  for (std::size_t t = 0; t < video.annotations.size(); ++t) {
    for (const auto& e : video.annotations[t].entries) {
      if (!e.visible) continue;
      seq[t].ids.push_back(e.track_id);
      seq[t].boxes.push_back(e.box);
    }
  }
  return seq;
}

Sequence pred_sequence(const TrackFile& file, int frames, int native_width, int native_height) {
  Sequence seq(static_cast<std::size_t>(std::max(0, frames)));
  for (const auto& r : file.rows) {
    if (r.frame_index < 0 || r.frame_index >= frames) continue;
    auto& f = seq[static_cast<std::size_t>(r.frame_index)];
    f.ids.push_back(r.track_id);
    f.boxes.push_back(r.normalized(native_width, native_height));
  }
  return seq;
}

double hota_alpha(int k) { return 0.05 * (k + 1); }

double ClearCounts::mota() const {
  return 1.0 - static_cast<double>(fp + fn + idsw) / static_cast<double>(std::max(1L, gt_count));
}

double IdCounts::idf1() const { return ratio(2.0 * idtp, static_cast<double>(gt_count + pred_count), 1.0); }

double HotaCounts::det_a(int k) const {
  const auto i = static_cast<std::size_t>(k);
  return ratio(static_cast<double>(tp[i]), static_cast<double>(tp[i] + fn[i] + fp[i]), 1.0);
}

double HotaCounts::ass_a(int k) const {
  const auto i = static_cast<std::size_t>(k);
  if (tp[i] == 0) return fn[i] + fp[i] == 0 ? 1.0 : 0.0;
  return ass_sum[i] / static_cast<double>(tp[i]);
}

double HotaCounts::hota(int k) const { return std::sqrt(det_a(k) * ass_a(k)); }

ClearCounts clear_counts(const Sequence& pred, const Sequence& gt, double iou_thresh) {
  check_lengths(pred, gt);
  ClearCounts c;
  std::map<int, int> last_match;  // gt id -> most recent matched prediction id
  std::map<int, int> prev_frame;  // pairing of the previous frame
  for (std::size_t t = 0; t < gt.size(); ++t) {
    const FrameObjects& g = gt[t];
    const FrameObjects& p = pred[t];
    c.gt_count += static_cast<long>(g.ids.size());
    c.pred_count += static_cast<long>(p.ids.size());
    const Mat iou = iou_matrix(g, p);
    std::vector<bool> g_used(g.ids.size(), false), p_used(p.ids.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> matches;

    // Keep last frame's pairs that are still valid.
    for (std::size_t gi : by_id(g)) {
      const auto it = prev_frame.find(g.ids[gi]);
      if (it == prev_frame.end()) continue;
      for (std::size_t pj = 0; pj < p.ids.size(); ++pj) {
        if (p.ids[pj] != it->second || p_used[pj]) continue;
        if (iou(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(pj)) >= iou_thresh) {
          g_used[gi] = p_used[pj] = true;
          matches.emplace_back(gi, pj);
        }
        break;
      }
    }

    std::vector<std::size_t> rows, cols;
    for (std::size_t gi : by_id(g)) {
      if (!g_used[gi]) rows.push_back(gi);
    }
    for (std::size_t pj : by_id(p)) {
      if (!p_used[pj]) cols.push_back(pj);
    }
    if (!rows.empty() && !cols.empty()) {
      Mat cost(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
          const double v = iou(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[k]));
          cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v >= iou_thresh ? 1.0 - v : 10.0;
        }
      }
      for (const auto& [r, k] : solve_min_cost(cost).pairs) {
        const std::size_t gi = rows[static_cast<std::size_t>(r)], pj = cols[static_cast<std::size_t>(k)];
        if (iou(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(pj)) < iou_thresh) continue;
        const auto it = last_match.find(g.ids[gi]);
        if (it != last_match.end() && it->second != p.ids[pj]) ++c.idsw;
        matches.emplace_back(gi, pj);
      }
    }

    prev_frame.clear();
    for (const auto& [gi, pj] : matches) {
      prev_frame[g.ids[gi]] = p.ids[pj];
      last_match[g.ids[gi]] = p.ids[pj];
    }
    c.matches += static_cast<long>(matches.size());
    c.fn += static_cast<long>(g.ids.size() - matches.size());
    c.fp += static_cast<long>(p.ids.size() - matches.size());
  }
  return c;
}

IdCounts id_counts(const Sequence& pred, const Sequence& gt, double iou_thresh) {
  check_lengths(pred, gt);
  IdCounts c;
  std::map<int, int> gt_index, pred_index;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    for (int id : gt[t].ids) gt_index.emplace(id, 0);
    for (int id : pred[t].ids) pred_index.emplace(id, 0);
    c.gt_count += static_cast<long>(gt[t].ids.size());
    c.pred_count += static_cast<long>(pred[t].ids.size());
  }
  int k = 0;
  for (auto& [id, idx] : gt_index) idx = k++;
  k = 0;
  for (auto& [id, idx] : pred_index) idx = k++;
  if (gt_index.empty() || pred_index.empty()) return c;

  Mat overlap = Mat::Zero(static_cast<Eigen::Index>(gt_index.size()), static_cast<Eigen::Index>(pred_index.size()));
  for (std::size_t t = 0; t < gt.size(); ++t) {
    const Mat iou = iou_matrix(gt[t], pred[t]);
    for (Eigen::Index i = 0; i < iou.rows(); ++i) {
      for (Eigen::Index j = 0; j < iou.cols(); ++j) {
        if (iou(i, j) >= iou_thresh) {
          overlap(gt_index.at(gt[t].ids[static_cast<std::size_t>(i)]),
                  pred_index.at(pred[t].ids[static_cast<std::size_t>(j)])) += 1;
        }
      }
    }
  }
  for (const auto& [i, j] : solve_min_cost(-overlap).pairs) c.idtp += static_cast<long>(overlap(i, j));
  return c;
}

HotaCounts hota_counts(const Sequence& pred, const Sequence& gt) {
  check_lengths(pred, gt);
  HotaCounts c;
  std::map<int, long> gt_len, pred_len;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    for (int id : gt[t].ids) ++gt_len[id];
    for (int id : pred[t].ids) ++pred_len[id];
  }
  std::vector<Mat> ious;
  for (std::size_t t = 0; t < gt.size(); ++t) ious.push_back(iou_matrix(gt[t], pred[t]));

  for (int a = 0; a < kHotaAlphas; ++a) {
    const double alpha = hota_alpha(a);
    std::map<std::pair<int, int>, long> pair_tp;
    std::vector<std::pair<int, int>> tps;
    long n_gt = 0, n_pred = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) {
      const Mat& iou = ious[t];
      n_gt += iou.rows();
      n_pred += iou.cols();
      if (iou.size() == 0) continue;
      // Maximize summed IoU over pairs that clear alpha.
      const Mat cost = (iou.array() >= alpha).select(-iou, 0.0);
      for (const auto& [i, j] : solve_min_cost(cost).pairs) {
        if (iou(i, j) < alpha) continue;
        const std::pair<int, int> key{gt[t].ids[static_cast<std::size_t>(i)], pred[t].ids[static_cast<std::size_t>(j)]};
        ++pair_tp[key];
        tps.push_back(key);
      }
    }
    const auto k = static_cast<std::size_t>(a);
    c.tp[k] = static_cast<long>(tps.size());
    c.fn[k] = n_gt - c.tp[k];
    c.fp[k] = n_pred - c.tp[k];
    for (const auto& key : tps) {
      const double tpa = static_cast<double>(pair_tp.at(key));
      c.ass_sum[k] += tpa / (static_cast<double>(gt_len.at(key.first) + pred_len.at(key.second)) - tpa);
    }
  }
  return c;
}

void MetricAccumulator::add(const Sequence& pred, const Sequence& gt) {
  const ClearCounts cc = clear_counts(pred, gt);
  clear_.fp += cc.fp;
  clear_.fn += cc.fn;
  clear_.idsw += cc.idsw;
  clear_.matches += cc.matches;
  clear_.gt_count += cc.gt_count;
  clear_.pred_count += cc.pred_count;
  const IdCounts ic = id_counts(pred, gt);
  id_.idtp += ic.idtp;
  id_.gt_count += ic.gt_count;
  id_.pred_count += ic.pred_count;
  const HotaCounts hc = hota_counts(pred, gt);
  for (std::size_t k = 0; k < static_cast<std::size_t>(kHotaAlphas); ++k) {
    hota_.tp[k] += hc.tp[k];
    hota_.fn[k] += hc.fn[k];
    hota_.fp[k] += hc.fp[k];
    hota_.ass_sum[k] += hc.ass_sum[k];
  }
}

MetricReport MetricAccumulator::report() const {
  MetricReport r;
  r.mota = clear_.mota();
  r.fp = clear_.fp;
  r.fn = clear_.fn;
  r.idsw = clear_.idsw;
  r.gt_count = clear_.gt_count;
  r.pred_count = clear_.pred_count;
  r.idf1 = id_.idf1();
  for (int a = 0; a < kHotaAlphas; ++a) {
    const auto k = static_cast<std::size_t>(a);
    r.hota_curve[k] = hota_.hota(a);
    r.det_a_curve[k] = hota_.det_a(a);
    r.ass_a_curve[k] = hota_.ass_a(a);
    r.hota += r.hota_curve[k];
    r.det_a += r.det_a_curve[k];
    r.ass_a += r.ass_a_curve[k];
  }
  r.hota /= kHotaAlphas;
  r.det_a /= kHotaAlphas;
  r.ass_a /= kHotaAlphas;
  return r;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["hota"] = hota;
  j["det_a"] = det_a;
  j["ass_a"] = ass_a;
  j["idf1"] = idf1;
  j["mota"] = mota;
  j["fp"] = fp;
  j["fn"] = fn;
  j["idsw"] = idsw;
  j["gt_count"] = gt_count;
  j["pred_count"] = pred_count;
  nlohmann::ordered_json curve = nlohmann::ordered_json::array();
  for (int a = 0; a < kHotaAlphas; ++a) {
    const auto k = static_cast<std::size_t>(a);
    curve.push_back({{"alpha", hota_alpha(a)}, {"hota", hota_curve[k]}, {"det_a", det_a_curve[k]},
                     {"ass_a", ass_a_curve[k]}});
  }
  j["hota_curve"] = curve;
  return j.dump(2);
}

MetricReport evaluate(const Sequence& pred, const Sequence& gt) {
  MetricAccumulator acc;
  acc.add(pred, gt);
  return acc.report();
}

ClearResult clear_metrics(const Sequence& pred, const Sequence& gt, double iou_thresh) {
  const ClearCounts c = clear_counts(pred, gt, iou_thresh);
  return {c.mota(), c.fp, c.fn, c.idsw};
}

double idf1(const Sequence& pred, const Sequence& gt, double iou_thresh) {
  return id_counts(pred, gt, iou_thresh).idf1();
}

HotaResult hota(const Sequence& pred, const Sequence& gt) {
  const HotaCounts c = hota_counts(pred, gt);
  HotaResult r;
  for (int a = 0; a < kHotaAlphas; ++a) {
    r.curve[static_cast<std::size_t>(a)] = c.hota(a);
    r.hota += c.hota(a);
    r.det_a += c.det_a(a);
    r.ass_a += c.ass_a(a);
  }
  r.hota /= kHotaAlphas;
  r.det_a /= kHotaAlphas;
  r.ass_a /= kHotaAlphas;
  return r;
}

double equivalent_fps(double fps, int n) {
  if (n < 1) throw std::invalid_argument("equivalent_fps: interval must be >= 1");
  return fps * n;
}

}  // namespace histrack
