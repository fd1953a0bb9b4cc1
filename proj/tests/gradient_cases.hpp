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
// Finite-difference checks shared by the unit suite and the acceptance run.

#include "histrack/masks.hpp"
#include "histrack/model.hpp"
#include "histrack/trainer.hpp"
#include "test_util.hpp"

namespace histrack::testing {

inline GradCheck irm_gradient_check() {
  const Config c = tiny_config();
  ad::ParamStore store = init_params(c, 3);
  Rng rng(11);
  store.add("test.content", random_mat(5, c.feature_dim, rng));
  const Mat w = random_mat(5, c.feature_dim, rng);
  const std::vector<int> groups{4, 4, 4, 9, 9};
  return check_param_gradients(store, [&](ad::Binder& b) {
    return ad::weighted_sum(irm_forward(b, c, 1, b("test.content"), groups), w);
  });
}

inline GradCheck decoder_layer_gradient_check() {
  const Config c = tiny_config();
  ad::ParamStore store = init_params(c, 5);
  Rng rng(12);
  // Non-zero box head so the refinement path carries gradient too.
  store.mutable_at("dec0.box2.w") = random_mat(c.feature_dim, 4, rng, 0.1);
  store.add("test.content", random_mat(5, c.feature_dim, rng));
  const Mat anchors = (Mat(5, 4) << 0.3, 0.3, 0.2, 0.2, 0.3, 0.3, 0.2, 0.2, 0.6, 0.5, 0.25, 0.3, 0.7, 0.7, 0.1, 0.2,
                       0.4, 0.6, 0.3, 0.2)
                          .finished();
  const std::vector<int> groups{7, 7, detection_group(0), detection_group(1), detection_group(2)};
  const AttentionMask mask = decoder_mask(groups, 2);
  const Image img = random_image(c.image_height, c.image_width, 4);
  const Mat w1 = random_mat(5, c.feature_dim, rng);
  const Mat w2 = random_mat(5, c.num_classes + 1, rng);
  const Mat w3 = random_mat(5, 4, rng);
  return check_param_gradients(store, [&](ad::Binder& b) {
    const FrameFeatures f = encode_frame(b, c, img);
    LayerOutput out = decoder_layer_forward(b, c, 0, b("test.content"), b.tape().constant(anchors), mask, f);
    return ad::add(ad::add(ad::weighted_sum(out.content, w1), ad::weighted_sum(out.log_probs, w2)),
                   ad::weighted_sum(out.boxes, w3));
  });
}

// Two seeded tracks with two-entry banks over a two-frame clip; track 2
// leaves after the first frame and a new object appears.
struct TinyClip {
  Config config = tiny_config();
  std::vector<Image> images;
  std::vector<FrameAnnotations> gt;
  Mat bank;

  TinyClip() {
    images = {random_image(16, 16, 21), random_image(16, 16, 22)};
    FrameAnnotations f0{0, {{1, 1, {0.3, 0.3, 0.3, 0.25}, true}, {2, 2, {0.7, 0.65, 0.2, 0.3}, true}}};
    FrameAnnotations f1{1, {{1, 1, {0.35, 0.32, 0.3, 0.25}, true}, {3, 2, {0.6, 0.75, 0.25, 0.2}, true}}};
    gt = {f0, f1};
    Rng rng(31);
    bank = random_mat(4, config.feature_dim, rng);
  }

  ClipResult run(ad::Binder& b) const {
    ad::Tape& tape = b.tape();
    std::vector<ClipTrack> tracks(2);
    const double anchors[2][4] = {{0.32, 0.28, 0.3, 0.3}, {0.68, 0.6, 0.22, 0.28}};
    for (int k = 0; k < 2; ++k) {
      tracks[k].track_id = k + 1;
      tracks[k].class_id = k + 1;
      tracks[k].bank = {tape.constant(bank.row(2 * k)), tape.constant(bank.row(2 * k + 1))};
      tracks[k].bank_frames = {-1, -2};
      tracks[k].anchor = tape.constant((Mat(1, 4) << anchors[k][0], anchors[k][1], anchors[k][2], anchors[k][3]).finished());
    }
    return clip_objective(b, config, {&images[0], &images[1]}, gt, tracks);
  }

  ad::ParamStore params() const {
    ad::ParamStore store = init_params(config, 8);
    Rng rng(9);
    for (int l = 0; l < config.num_decoders; ++l) {
      store.mutable_at("dec" + std::to_string(l) + ".box2.w") = random_mat(config.feature_dim, 4, rng, 0.1);
    }
    return store;
  }
};

inline GradCheck clip_gradient_check(const TinyClip& clip) {
  ad::ParamStore store = clip.params();
  return check_param_gradients(store, [&](ad::Binder& b) { return clip.run(b).tracking_loss; });
}

}  // namespace histrack::testing
