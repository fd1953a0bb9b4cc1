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

// Training objective: the bipartite matching loss on the newest tracking
// predictions plus detection predictions, and the tracking object consistency
// (TOC) loss on the remaining historical predictions of every track.

#include <vector>

#include "histrack/assignment.hpp"
#include "histrack/autodiff.hpp"
#include "histrack/types.hpp"

namespace histrack {

struct BipartiteTerms {
  ad::Var cls;   // weighted mean class loss over all rows
  ad::Var l1;    // mean L1 over matched rows
  ad::Var giou;  // mean (1 - GIoU) over matched rows
};

// `log_probs` (M x (C+1)) and `boxes` (M x 4) hold exactly the rows indexed
// by `pi`. Matched rows are supervised with their ground-truth class and box,
// unmatched rows with background.
BipartiteTerms bipartite_loss(ad::Var log_probs, ad::Var boxes, const FrameAnnotations& gt, const Assignment& pi,
                              const Config& config);

struct HistoricalRows {
  int track_index = 0;    // prediction index of the track in `pi`
  std::vector<int> rows;  // non-newest rows of the track in log_probs/boxes
};

struct TocTerms {
  ad::Var numerator;  // 1 x 1
  int count = 0;      // historical rows whose track is matched
};

TocTerms toc_loss(ad::Var log_probs, ad::Var boxes, const std::vector<HistoricalRows>& historical,
                  const FrameAnnotations& gt, const Assignment& pi, const Config& config);

struct FrameLayerTerms {
  BipartiteTerms bip;
  TocTerms toc;
};

// terms[frame][layer]. The TOC numerators of a layer are summed over frames
// and divided by max(1, total count) once per layer; every layer then adds
// its bipartite terms for every frame.
ad::Var clip_loss(const std::vector<std::vector<FrameLayerTerms>>& terms, const Config& config);

struct LossBreakdown {
  double bip_class = 0;
  double bip_l1 = 0;
  double bip_giou = 0;
  double toc = 0;
  double total = 0;
  int n_his = 0;
};

// Summed over frames and layers with the same normalization as clip_loss.
LossBreakdown summarize(const std::vector<std::vector<FrameLayerTerms>>& terms, const Config& config);

// Per-row 1 - GIoU between predicted boxes and constant targets (K x 4 each).
ad::Var giou_loss_rows(ad::Var boxes, const Mat& targets);

}  // namespace histrack
