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

#include <gtest/gtest.h>

#include <map>

#include "histrack/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace histrack {
namespace {

FrameObjects objs(std::vector<std::pair<int, BoundingBox>> list) {
  FrameObjects f;
  for (const auto& [id, box] : list) {
    f.ids.push_back(id);
    f.boxes.push_back(box);
  }
  return f;
}

BoundingBox at(double cx, double cy) { return {cx, cy, 0.1, 0.1}; }

Sequence relabel(Sequence s, const std::map<int, int>& ids) {
  for (auto& f : s) {
    for (int& id : f.ids) id = ids.at(id);
  }
  return s;
}

// Two objects over four frames.
Sequence two_walkers() {
  Sequence gt;
  for (int t = 0; t < 4; ++t) gt.push_back(objs({{1, at(0.2 + 0.05 * t, 0.3)}, {2, at(0.7, 0.3 + 0.05 * t)}}));
  return gt;
}

TEST(Clear, PerfectPrediction) {
  const Sequence gt = two_walkers();
  const ClearResult r = clear_metrics(gt, gt);
  EXPECT_EQ(r.mota, 1.0);
  EXPECT_EQ(r.fp + r.fn + r.idsw, 0);
  EXPECT_EQ(idf1(gt, gt), 1.0);
  const HotaResult h = hota(gt, gt);
  EXPECT_EQ(h.hota, 1.0);
  for (double v : h.curve) EXPECT_EQ(v, 1.0);
}

TEST(Clear, EmptyPrediction) {
  const Sequence gt = two_walkers();
  const Sequence none(gt.size());
  const ClearResult r = clear_metrics(none, gt);
  EXPECT_EQ(r.fn, 8);
  EXPECT_EQ(r.mota, 0.0);
  EXPECT_EQ(idf1(none, gt), 0.0);
  EXPECT_EQ(hota(none, gt).hota, 0.0);
}

TEST(Clear, OneIdChangeHandTrace) {
  // Frames 0-1: object 1 is tracked as 10, object 2 as 20. From frame 2 the
  // tracker relabels object 1 as 30: one switch, no misses, no false alarms.
  const Sequence gt = two_walkers();
  Sequence pred = gt;
  for (int t = 0; t < 4; ++t) {
    pred[static_cast<std::size_t>(t)].ids = {t < 2 ? 10 : 30, 20};
  }
  const ClearResult r = clear_metrics(pred, gt);
  EXPECT_EQ(r.idsw, 1);
  EXPECT_EQ(r.fp, 0);
  EXPECT_EQ(r.fn, 0);
  EXPECT_DOUBLE_EQ(r.mota, 1.0 - 1.0 / 8.0);
}

TEST(Clear, CarryOverBeatsBetterOverlap) {
  // Object 1 is tracked as 10; at frame 1 a second prediction 11 overlaps it
  // better, but the existing pairing still clears the threshold and is kept.
  Sequence gt = {objs({{1, at(0.5, 0.5)}}), objs({{1, at(0.5, 0.5)}})};
  Sequence pred = {objs({{10, at(0.5, 0.5)}}), objs({{10, at(0.51, 0.5)}, {11, at(0.5, 0.5)}})};
  const ClearResult r = clear_metrics(pred, gt);
  EXPECT_EQ(r.idsw, 0);
  EXPECT_EQ(r.fp, 1);
}

TEST(Clear, ExtraFalsePositivesNeverRaiseMota) {
  Rng rng(12);
  const Sequence gt = two_walkers();
  Sequence pred = gt;
  double last = clear_metrics(pred, gt).mota;
  for (int k = 0; k < 10; ++k) {
    auto& f = pred[static_cast<std::size_t>(rng.uniform_int(0, 3))];
    f.ids.push_back(100 + k);
    f.boxes.push_back(at(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)));
    const double m = clear_metrics(pred, gt).mota;
    EXPECT_LE(m, last);
    last = m;
  }
}

TEST(Idf1, SwappedLabelsForWholeVideo) {
  const Sequence gt = two_walkers();
  EXPECT_EQ(idf1(relabel(gt, {{1, 2}, {2, 1}}), gt), 1.0);
}

TEST(Idf1, HalfwaySwapMatchesOracle) {
  const Sequence gt = two_walkers();
  Sequence pred = gt;
  pred[2].ids = {2, 1};
  pred[3].ids = {2, 1};
  // Either bijection keeps two of the four frames of each track.
  EXPECT_DOUBLE_EQ(idf1(pred, gt), 0.5);
  EXPECT_EQ(idf1(pred, gt), oracle::idf1(pred, gt));
}

TEST(Hota, ScrambledIdsKeepDetectionLoseAssociation) {
  const Sequence gt = two_walkers();
  Sequence pred = gt;
  int next = 100;
  for (auto& f : pred) {
    for (int& id : f.ids) id = next++;
  }
  const HotaResult h = hota(pred, gt);
  EXPECT_EQ(h.det_a, 1.0);
  EXPECT_DOUBLE_EQ(h.ass_a, 0.25);
  EXPECT_DOUBLE_EQ(h.hota, 0.5);
  for (int k = 0; k < kHotaAlphas; ++k) {
    const auto o = oracle::hota_at(pred, gt, hota_alpha(k));
    EXPECT_EQ(h.curve[static_cast<std::size_t>(k)], o.hota);
  }
}

TEST(Hota, AlphaGrid) {
  EXPECT_DOUBLE_EQ(hota_alpha(0), 0.05);
  EXPECT_DOUBLE_EQ(hota_alpha(kHotaAlphas - 1), 0.95);
  EXPECT_EQ(hota(two_walkers(), two_walkers()).curve.size(), 19u);
}

TEST(Oracles, Idf1AndHotaMatchExhaustiveSearch) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto [pred, gt] = oracle::random_scenario(rng);
    EXPECT_EQ(idf1(pred, gt), oracle::idf1(pred, gt)) << "trial " << trial;
    const HotaCounts c = hota_counts(pred, gt);
    for (int k = 0; k < kHotaAlphas; ++k) {
      const auto o = oracle::hota_at(pred, gt, hota_alpha(k));
      const auto i = static_cast<std::size_t>(k);
      ASSERT_EQ(c.tp[i], o.tp) << "trial " << trial << " alpha " << k;
      EXPECT_EQ(c.fn[i], o.fn);
      EXPECT_EQ(c.fp[i], o.fp);
      EXPECT_EQ(c.det_a(k), o.det_a);
      EXPECT_EQ(c.ass_a(k), o.ass_a) << "trial " << trial << " alpha " << k;
      EXPECT_EQ(c.hota(k), o.hota);
    }
  }
}

TEST(Oracles, MetricsIgnorePredictedLabels) {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [pred, gt] = oracle::random_scenario(rng);
    std::map<int, int> ids;
    for (int id : oracle::unique_ids(pred)) ids[id] = 1000 - id;
    const Sequence moved = relabel(pred, ids);
    EXPECT_EQ(clear_metrics(moved, gt).mota, clear_metrics(pred, gt).mota);
    EXPECT_EQ(idf1(moved, gt), idf1(pred, gt));
    const HotaResult a = hota(pred, gt), b = hota(moved, gt);
    EXPECT_EQ(a.hota, b.hota);
    for (int k = 0; k < kHotaAlphas; ++k) {
      const HotaCounts c = hota_counts(pred, gt);
      EXPECT_GE(c.det_a(k), 0.0);
      EXPECT_LE(c.det_a(k), 1.0);
      EXPECT_GE(c.ass_a(k), 0.0);
      EXPECT_LE(c.ass_a(k), 1.0);
    }
  }
}

TEST(Report, AccumulatorSumsCounts) {
  Rng rng(5);
  const auto [p1, g1] = oracle::random_scenario(rng);
  const auto [p2, g2] = oracle::random_scenario(rng);
  MetricAccumulator acc;
  acc.add(p1, g1);
  acc.add(p2, g2);
  const MetricReport r = acc.report();
  const ClearCounts c1 = clear_counts(p1, g1), c2 = clear_counts(p2, g2);
  EXPECT_EQ(r.fp, c1.fp + c2.fp);
  EXPECT_EQ(r.fn, c1.fn + c2.fn);
  EXPECT_EQ(r.idsw, c1.idsw + c2.idsw);
  const IdCounts i1 = id_counts(p1, g1), i2 = id_counts(p2, g2);
  EXPECT_DOUBLE_EQ(r.idf1, 2.0 * (i1.idtp + i2.idtp) / (i1.gt_count + i2.gt_count + i1.pred_count + i2.pred_count));
  EXPECT_NE(r.to_json().find("\"hota_curve\""), std::string::npos);
}

TEST(Report, MismatchedLengthsRejected) {
  EXPECT_THROW(clear_metrics(Sequence(2), Sequence(3)), std::invalid_argument);
}

TEST(EquivalentFps, Examples) {
  EXPECT_DOUBLE_EQ(equivalent_fps(10.8, 3), 32.4);
  EXPECT_DOUBLE_EQ(equivalent_fps(27.7, 1), 27.7);
  EXPECT_DOUBLE_EQ(equivalent_fps(5.0, 1), 5.0);
  EXPECT_THROW(equivalent_fps(5.0, 0), std::invalid_argument);
}

TEST(Sequences, TrackFileRoundTrip) {
  TrackFile f;
  f.rows.push_back(TrackRow::from_normalized(0, 3, {0.5, 0.5, 0.2, 0.25}, 640, 480, 0.9, 1));
  f.rows.push_back(TrackRow::from_normalized(2, 4, {0.25, 0.75, 0.1, 0.1}, 640, 480, 0.8, 2));
  f.rows.push_back(TrackRow::from_normalized(7, 4, {0.25, 0.75, 0.1, 0.1}, 640, 480, 0.8, 2));
  const Sequence s = pred_sequence(f, 3, 640, 480);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].ids, std::vector<int>{3});
  EXPECT_TRUE(s[1].ids.empty());
  EXPECT_NEAR(s[2].boxes[0].cx, 0.25, 1e-12);
}

}  // namespace
}  // namespace histrack
