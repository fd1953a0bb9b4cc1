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

// Clip-level training: identity-bound track queries carried across the
// frames of a clip on one tape, the matching + TOC objective at every decoder
// layer, an encoder proposal term, and AdamW with gradient clipping.

#include <functional>
#include <vector>

#include "histrack/autodiff.hpp"
#include "histrack/losses.hpp"
#include "histrack/synthgen.hpp"
#include "histrack/types.hpp"

namespace histrack {

// A track inside a training clip. Features and anchors stay on the tape so
// gradients flow across frames.
struct ClipTrack {
  int track_id = 0;
  int class_id = 1;
  std::vector<ad::Var> bank;   // newest first, each 1 x d
  std::vector<int> bank_frames;
  ad::Var anchor;              // 1 x 4
  int lost_age = 0;
};

struct ClipResult {
  ad::Var loss;           // matching + TOC objective plus proposal term
  ad::Var tracking_loss;  // matching + TOC objective only
  LossBreakdown breakdown;
  double proposal = 0;
  int max_bank = 0;       // largest bank seen in the clip
  std::vector<std::vector<FrameLayerTerms>> terms;  // [frame][layer]
};

// `frames` and `annotations` are the clip frames in order; only visible
// ground truth is used. `tracks` seeds the clip (normally empty).
ClipResult clip_objective(ad::Binder& params, const Config& config, const std::vector<const Image*>& frames,
                          const std::vector<FrameAnnotations>& annotations, std::vector<ClipTrack> tracks = {});

// Objectness and box regression for encoder tokens whose cell contains a
// visible ground-truth centre.
ad::Var proposal_loss(const Config& config, ad::Var objectness, ad::Var token_boxes, const FrameAnnotations& gt);

struct TrainProgress {
  int step = 0;
  int total_steps = 0;
  int epoch = 0;
  double learning_rate = 0;
  double loss = 0;  // mean over the batch
  LossBreakdown breakdown;
  double proposal = 0;
};

struct TrainOptions {
  std::function<void(const TrainProgress&)> on_step;
};

struct TrainResult {
  ad::ParamStore params;
  std::vector<TrainProgress> curve;
};

// Clip order, strides and start frames depend on config.seed only, so runs
// that differ in tracking settings see identical data.
TrainResult train(const Config& config, const Dataset& data, const TrainOptions& options = {});

}  // namespace histrack
