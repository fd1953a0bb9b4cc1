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

// The differentiable tracker network: a toy convolutional encoder with
// top-k proposals, temporal-blocking decoder layers, and the information
// refinement modules (IRMs) that sit between decoder layers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "histrack/autodiff.hpp"
#include "histrack/masks.hpp"
#include "histrack/memory.hpp"
#include "histrack/types.hpp"

namespace histrack {

// Fresh parameters for `config`; deterministic in `seed`.
ad::ParamStore init_params(const Config& config, std::uint64_t seed);

// Throws ValidationError when `params` is missing a tensor `config` needs or
// holds one with the wrong shape.
void check_params(const Config& config, const ad::ParamStore& params);

struct FrameFeatures {
  ad::Var tokens;            // tokens x d, position encoded
  ad::Var objectness;        // tokens x 1 logits
  ad::Var token_boxes;       // tokens x 4 normalized boxes
  std::vector<int> proposal_tokens;
  ad::Var proposal_anchors;  // n_det x 4
  ad::Var proposal_content;  // n_det x d

  std::vector<BoundingBox> anchor_boxes() const;
};

// Throws std::invalid_argument when the image shape disagrees with config.
FrameFeatures encode_frame(ad::Binder& params, const Config& config, const Image& image);

// Test hooks for the IRM combination step.
struct IrmOverrides {
  std::optional<double> gate;   // replaces every gate value z
  bool zero_addition = false;   // replaces the addition branch output with 0
};

struct IrmTrace {
  ad::Var gate;      // N x d_head
  ad::Var addition;  // N x d
};

// Refines tracking-row content; rows of different groups never interact.
// `irm_layer` names the decoder layer the module precedes.
ad::Var irm_forward(ad::Binder& params, const Config& config, int irm_layer, ad::Var content,
                    const std::vector<int>& group_ids, const IrmOverrides& overrides = {},
                    IrmTrace* trace = nullptr);

struct LayerOutput {
  ad::Var content;    // N x d
  ad::Var boxes;      // N x 4 refined anchors
  ad::Var log_probs;  // N x (C + 1)

  std::vector<Prediction> predictions() const;
  Prediction prediction(int row) const;
  Vec feature(int row) const { return content.value().row(row).transpose(); }
};

LayerOutput decoder_layer_forward(ad::Binder& params, const Config& config, int layer, ad::Var content,
                                  ad::Var anchors, const AttentionMask& mask, const FrameFeatures& frame);

// Runs every decoder layer, applying IRMs to the first `num_tracking_rows`
// rows where the configuration places them. Returns one output per layer.
std::vector<LayerOutput> forward_frame(ad::Binder& params, const Config& config, ad::Var content, ad::Var anchors,
                                       const std::vector<int>& group_ids, int num_tracking_rows,
                                       const FrameFeatures& frame, const IrmOverrides& overrides = {});

// Convenience overload for inference: tracking rows come from the batch as
// constants, detection rows use the frame's proposals.
std::vector<LayerOutput> forward_frame(ad::Binder& params, const Config& config, const QueryBatch& batch,
                                       const FrameFeatures& frame);

ad::Var boxes_to_var(ad::Tape& tape, const std::vector<BoundingBox>& boxes);
BoundingBox box_from_row(const Mat& m, int row);

// Number of IRM applications in one forward_frame call.
int irm_applications(const Config& config);

}  // namespace histrack
