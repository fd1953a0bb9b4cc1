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

#include "gradient_cases.hpp"

namespace histrack {
namespace {

using testing::check_param_gradients;
using testing::tiny_config;

void expect_close(const testing::GradCheck& g) {
  ASSERT_GT(g.checked, 0);
  EXPECT_GE(g.within_tight, 0.95 * g.checked) << "worst " << g.worst_name << " " << g.worst;
  EXPECT_LT(g.worst, 1e-3) << g.worst_name;
}

TEST(Gradients, RelativeErrorFloorsTinyValues) {
  EXPECT_DOUBLE_EQ(testing::relative_error(2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(testing::relative_error(0.0, 1e-9), 1e-2);
}

TEST(Gradients, IrmForward) { expect_close(testing::irm_gradient_check()); }

TEST(Gradients, DecoderLayerForward) { expect_close(testing::decoder_layer_gradient_check()); }

TEST(Gradients, FullClipObjective) {
  const testing::TinyClip clip;
  {
    const ad::ParamStore store = clip.params();
    ad::Tape tape;
    ad::Binder b(tape, store, false);
    const ClipResult r = clip.run(b);
    ASSERT_GT(r.breakdown.n_his, 0) << "clip must exercise the TOC term";
    ASSERT_GT(r.breakdown.toc, 0);
  }
  expect_close(testing::clip_gradient_check(clip));
}

TEST(Gradients, ProposalTerm) {
  const Config c = tiny_config();
  ad::ParamStore store = init_params(c, 2);
  const Image img = testing::random_image(16, 16, 5);
  FrameAnnotations gt{0, {{1, 1, {0.3, 0.3, 0.3, 0.25}, true}, {2, 2, {0.7, 0.8, 0.2, 0.3}, true}}};
  auto g = check_param_gradients(store, [&](ad::Binder& b) {
    const FrameFeatures f = encode_frame(b, c, img);
    return proposal_loss(c, f.objectness, f.token_boxes, gt);
  });
  expect_close(g);
}

}  // namespace
}  // namespace histrack
