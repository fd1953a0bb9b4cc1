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

// Tracking metrics: CLEAR (MOTA, FP, FN, ID switches), IDF1 and HOTA, plus
// the equivalent-FPS utility.

#include <array>
#include <string>
#include <vector>

#include "histrack/synthgen.hpp"
#include "histrack/trackfile.hpp"
#include "histrack/types.hpp"

namespace histrack {

struct FrameObjects {
  std::vector<int> ids;
  std::vector<BoundingBox> boxes;
};

// One entry per frame; both sequences must have the same length.
using Sequence = std::vector<FrameObjects>;

// Ground truth restricted to visible entries.
Sequence gt_sequence(const VideoItem& video);
// Rows outside [0, frames) are ignored.
Sequence pred_sequence(const TrackFile& file, int frames, int native_width, int native_height);

constexpr int kHotaAlphas = 19;
double hota_alpha(int k);  // 0.05 * (k + 1)

struct ClearCounts {
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long matches = 0;
  long gt_count = 0;
  long pred_count = 0;
  double mota() const;
};

struct IdCounts {
  long idtp = 0;
  long gt_count = 0;
  long pred_count = 0;
  double idf1() const;
};

struct HotaCounts {
  std::array<long, kHotaAlphas> tp{};
  std::array<long, kHotaAlphas> fn{};
  std::array<long, kHotaAlphas> fp{};
  std::array<double, kHotaAlphas> ass_sum{};  // sum over true positives of the association score

  double det_a(int k) const;
  double ass_a(int k) const;
  double hota(int k) const;
};

ClearCounts clear_counts(const Sequence& pred, const Sequence& gt, double iou_thresh = 0.5);
IdCounts id_counts(const Sequence& pred, const Sequence& gt, double iou_thresh = 0.5);
HotaCounts hota_counts(const Sequence& pred, const Sequence& gt);

struct MetricReport {
  double mota = 0;
  double idf1 = 0;
  double hota = 0;
  double det_a = 0;
  double ass_a = 0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long gt_count = 0;
  long pred_count = 0;
  std::array<double, kHotaAlphas> hota_curve{};
  std::array<double, kHotaAlphas> det_a_curve{};
  std::array<double, kHotaAlphas> ass_a_curve{};

  std::string to_json() const;
};

// Sums raw counts over videos before forming ratios.
class MetricAccumulator {
 public:
  void add(const Sequence& pred, const Sequence& gt);
  MetricReport report() const;

 private:
  ClearCounts clear_;
  IdCounts id_;
  HotaCounts hota_;
};

MetricReport evaluate(const Sequence& pred, const Sequence& gt);

struct ClearResult {
  double mota = 0;
  long fp = 0, fn = 0, idsw = 0;
};
ClearResult clear_metrics(const Sequence& pred, const Sequence& gt, double iou_thresh = 0.5);
double idf1(const Sequence& pred, const Sequence& gt, double iou_thresh = 0.5);
struct HotaResult {
  double hota = 0, det_a = 0, ass_a = 0;
  std::array<double, kHotaAlphas> curve{};
};
HotaResult hota(const Sequence& pred, const Sequence& gt);

// Throughput at interval n of a tracker that keeps its accuracy there.
double equivalent_fps(double fps, int n);

}  // namespace histrack
