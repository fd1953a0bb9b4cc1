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

#include <cmath>

#include "histrack/masks.hpp"
#include "histrack/model.hpp"
#include "test_util.hpp"

namespace histrack {
namespace {

using testing::tiny_config;

// Textbook layer norm: biased variance, eps 1e-5.
Mat reference_layer_norm(const Mat& x, const Mat& gain, const Mat& bias) {
  Mat out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    double var = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) var += (x(r, c) - mu) * (x(r, c) - mu);
    var /= static_cast<double>(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out(r, c) = (x(r, c) - mu) / std::sqrt(var + 1e-5) * gain(0, c) + bias(0, c);
    }
  }
  return out;
}

// z is N x heads; each gate covers a contiguous channel block.
Mat reference_irm(const Mat& f, const Mat& z, const Mat& f_add, const Mat& gain, const Mat& bias) {
  const Eigen::Index group = f.cols() / z.cols();
  Mat pre(f.rows(), f.cols());
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    for (Eigen::Index c = 0; c < f.cols(); ++c) pre(r, c) = 2.0 * f(r, c) * (1.0 - z(r, c / group)) + f_add(r, c);
  }
  return reference_layer_norm(pre, gain, bias);
}

struct IrmFixture {
  Config c = tiny_config();
  ad::ParamStore store;
  Mat content;
  std::vector<int> groups{3, 3, 3, 8, 8};

  IrmFixture() {
    c.feature_dim = 16;
    c.d_head = 4;
    store = init_params(c, 13);
    Rng rng(14);
    // Non-trivial norm parameters so gain and bias are exercised.
    store.mutable_at("irm1.ln.g") = testing::random_mat(1, c.feature_dim, rng);
    store.mutable_at("irm1.ln.b") = testing::random_mat(1, c.feature_dim, rng);
    content = testing::random_mat(5, c.feature_dim, rng);
  }

  Mat run(const Mat& x, const IrmOverrides& o = {}, Mat* gate = nullptr, Mat* addition = nullptr) const {
    ad::Tape tape;
    ad::Binder b(tape, store, false);
    IrmTrace trace;
    const Mat out = irm_forward(b, c, 1, tape.constant(x), groups, o, &trace).value();
    if (gate != nullptr) *gate = trace.gate.value();
    if (addition != nullptr) *addition = trace.addition.value();
    return out;
  }
};

TEST(Irm, GateOneKeepsOnlyAddition) {
  IrmFixture f;
  Mat gate, add;
  const Mat out = f.run(f.content, {1.0, false}, &gate, &add);
  const Mat expected = reference_layer_norm(add, f.store.at("irm1.ln.g"), f.store.at("irm1.ln.b"));
  EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Irm, GateZeroDoublesContent) {
  IrmFixture f;
  Mat gate, add;
  const Mat out = f.run(f.content, {0.0, false}, &gate, &add);
  const Mat expected = reference_layer_norm(2.0 * f.content + add, f.store.at("irm1.ln.g"), f.store.at("irm1.ln.b"));
  EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Irm, HalfGateWithoutAdditionIsNormOfContent) {
  IrmFixture f;
  const Mat out = f.run(f.content, {0.5, true});
  const Mat expected = reference_layer_norm(f.content, f.store.at("irm1.ln.g"), f.store.at("irm1.ln.b"));
  EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Irm, LearnedGateFollowsCombinationRule) {
  IrmFixture f;
  Mat gate, add;
  const Mat out = f.run(f.content, {}, &gate, &add);
  ASSERT_EQ(gate.cols(), f.c.d_head);
  EXPECT_GT(gate.minCoeff(), 0.0);
  EXPECT_LT(gate.maxCoeff(), 1.0);
  const Mat expected = reference_irm(f.content, gate, add, f.store.at("irm1.ln.g"), f.store.at("irm1.ln.b"));
  EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Irm, TracksAreIsolated) {
  IrmFixture f;
  const Mat base = f.run(f.content);
  Mat moved = f.content;
  Rng rng(5);
  moved.topRows(3) += testing::random_mat(3, f.c.feature_dim, rng);
  const Mat out = f.run(moved);
  EXPECT_TRUE((out.bottomRows(2).array() == base.bottomRows(2).array()).all());
  EXPECT_FALSE((out.topRows(3).array() == base.topRows(3).array()).all());
}

TEST(Irm, PermutingTracksPermutesOutput) {
  IrmFixture f;
  const Mat base = f.run(f.content);
  Mat swapped(5, f.c.feature_dim);
  swapped << f.content.bottomRows(2), f.content.topRows(3);
  f.groups = {8, 8, 3, 3, 3};
  const Mat out = f.run(swapped);
  EXPECT_LT((out.topRows(2) - base.bottomRows(2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((out.bottomRows(3) - base.topRows(3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Irm, EmptyInputIsNoOp) {
  IrmFixture f;
  f.groups.clear();
  EXPECT_EQ(f.run(Mat(0, f.c.feature_dim)).rows(), 0);
}

TEST(Irm, IndivisibleDimensionRejected) {
  IrmFixture f;
  f.c.d_head = 3;
  EXPECT_THROW(f.run(f.content), std::invalid_argument);
}

TEST(Irm, PlacementCount) {
  Config c;
  c.num_decoders = 6;
  EXPECT_EQ(irm_applications(c), 5);
  c.num_decoders = 1;
  EXPECT_EQ(irm_applications(c), 0);
  c.num_decoders = 3;
  c.irm_count = 0;
  EXPECT_EQ(irm_applications(c), 0);
  const ad::ParamStore no_irm = init_params(c, 1);
  for (const auto& [name, m] : no_irm.all()) EXPECT_NE(name.rfind("irm", 0), 0u) << name;
  c.irm_count = 1;
  EXPECT_EQ(irm_applications(c), 1);
  EXPECT_FALSE(c.irm_before_layer(1));
  EXPECT_TRUE(c.irm_before_layer(2));
  c.irm_count = 3;
  EXPECT_THROW(c.validate(), ValidationError);
}

// ---- attention and decoder

TEST(Attention, MatchesManualMaskedSoftmax) {
  Rng rng(3);
  const int n = 5, d = 8, heads = 2, dh = 4;
  ad::Tape tape;
  const Mat q = testing::random_mat(n, d, rng), k = testing::random_mat(n, d, rng), v = testing::random_mat(n, d, rng);
  const AttentionMask mask = decoder_mask(std::vector<int>{1, 1, 1, detection_group(0), detection_group(1)}, 3);
  const Mat out = ad::attention(tape.constant(q), tape.constant(k), tape.constant(v), mask.allow, heads).value();
  for (int h = 0; h < heads; ++h) {
    for (int i = 0; i < n; ++i) {
      std::vector<double> w(n, 0.0);
      double z = 0;
      for (int j = 0; j < n; ++j) {
        if (!mask.allow(i, j)) continue;
        w[static_cast<std::size_t>(j)] = std::exp(q.row(i).segment(h * dh, dh).dot(k.row(j).segment(h * dh, dh)) / 2.0);
        z += w[static_cast<std::size_t>(j)];
      }
      for (int c = 0; c < dh; ++c) {
        double expect = 0;
        for (int j = 0; j < n; ++j) expect += w[static_cast<std::size_t>(j)] / z * v(j, h * dh + c);
        EXPECT_NEAR(out(i, h * dh + c), expect, 1e-12);
      }
    }
  }
}

struct DecoderFixture {
  Config c = tiny_config();
  ad::ParamStore store = init_params(c, 21);
  Image image = testing::random_image(16, 16, 2);
  Mat content;
  Mat anchors = (Mat(5, 4) << 0.3, 0.3, 0.2, 0.2, 0.3, 0.3, 0.2, 0.2, 0.6, 0.5, 0.25, 0.3, 0.7, 0.7, 0.1, 0.2, 0.4,
                 0.6, 0.3, 0.2)
                    .finished();
  std::vector<int> groups{7, 7, detection_group(0), detection_group(1), detection_group(2)};

  DecoderFixture() {
    Rng rng(6);
    content = testing::random_mat(5, c.feature_dim, rng);
  }

  LayerOutput run(const Mat& x, const AttentionMask& mask, ad::Tape& tape) const {
    ad::Binder b(tape, store, false);
    const FrameFeatures f = encode_frame(b, c, image);
    return decoder_layer_forward(b, c, 0, tape.constant(x), tape.constant(anchors), mask, f);
  }
};

TEST(Decoder, BlockedRowDoesNotReachPartner) {
  DecoderFixture f;
  const AttentionMask mask = decoder_mask(f.groups, 2);
  ad::Tape t1, t2;
  const LayerOutput base = f.run(f.content, mask, t1);
  Mat moved = f.content;
  moved.row(1).setConstant(3.0);
  const LayerOutput out = f.run(moved, mask, t2);
  // Row 0 is blocked from row 1 and sees everything else unchanged.
  EXPECT_TRUE((out.content.value().row(0).array() == base.content.value().row(0).array()).all());
  EXPECT_TRUE((out.boxes.value().row(0).array() == base.boxes.value().row(0).array()).all());
  // A detection row does see row 1.
  EXPECT_FALSE((out.content.value().row(2).array() == base.content.value().row(2).array()).all());
}

TEST(Decoder, ZeroDeltaHeadKeepsAnchor) {
  DecoderFixture f;
  f.store.mutable_at("dec0.box2.w").setZero();
  f.store.mutable_at("dec0.box2.b").setZero();
  f.anchors.row(0) << 0.5, 0.5, 0.2, 0.2;
  ad::Tape t;
  const LayerOutput out = f.run(f.content, decoder_mask(f.groups, 2), t);
  EXPECT_LT((out.boxes.value() - f.anchors).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Decoder, ProbabilitiesNormalized) {
  DecoderFixture f;
  ad::Tape t;
  const LayerOutput out = f.run(f.content, decoder_mask(f.groups, 2), t);
  for (const Prediction& p : out.predictions()) {
    EXPECT_NEAR(p.class_probs.sum(), 1.0, 1e-9);
    EXPECT_GE(p.score, 0.0);
    EXPECT_LE(p.score, 1.0);
    EXPECT_TRUE(p.box.valid());
  }
}

TEST(Decoder, ForwardWithoutTracksIsPlainStack) {
  Config c = tiny_config();
  const ad::ParamStore store = init_params(c, 4);
  const Image img = testing::random_image(16, 16, 9);
  ad::Tape t1, t2;
  ad::Binder b1(t1, store, false), b2(t2, store, false);
  const FrameFeatures f1 = encode_frame(b1, c, img), f2 = encode_frame(b2, c, img);
  const QueryBatch batch = build_query_batch({}, f1.proposal_content.value(), f1.anchor_boxes(), 0);
  const auto layers = forward_frame(b1, c, batch, f1);
  ASSERT_EQ(static_cast<int>(layers.size()), c.num_decoders);
  const AttentionMask mask = decoder_mask(batch.group_id, 0);
  ad::Var content = t2.constant(batch.content), anchors = boxes_to_var(t2, batch.anchors);
  for (int l = 0; l < c.num_decoders; ++l) {
    const LayerOutput o = decoder_layer_forward(b2, c, l, content, anchors, mask, f2);
    EXPECT_TRUE((o.content.value().array() == layers[static_cast<std::size_t>(l)].content.value().array()).all());
    content = o.content;
    anchors = o.boxes;
  }
}

TEST(Decoder, DetectionRowsBypassIrm) {
  // Forcing the gates changes tracking rows after the IRM but leaves the
  // detection rows' layer input untouched; with a single layer after the
  // IRM the difference reaches detections only through self-attention.
  Config c = tiny_config();
  const ad::ParamStore store = init_params(c, 4);
  const Image img = testing::random_image(16, 16, 9);
  Rng rng(1);
  const Mat content = testing::random_mat(5, c.feature_dim, rng);
  const std::vector<BoundingBox> anchors(5, BoundingBox{0.5, 0.5, 0.2, 0.2});
  const std::vector<int> groups{1, 1, detection_group(0), detection_group(1), detection_group(2)};
  auto run = [&](const IrmOverrides& o, ad::Tape& t) {
    ad::Binder b(t, store, false);
    const FrameFeatures f = encode_frame(b, c, img);
    return forward_frame(b, c, t.constant(content), boxes_to_var(t, anchors), groups, 2, f, o);
  };
  ad::Tape t1, t2;
  const auto a = run({}, t1);
  const auto z = run({1.0, false}, t2);
  EXPECT_TRUE((a[0].content.value().array() == z[0].content.value().array()).all());
  EXPECT_FALSE((a[1].content.value().topRows(2).array() == z[1].content.value().topRows(2).array()).all());
}

// ---- encoder

TEST(Encoder, ShapesAndDeterminism) {
  Config c;
  const ad::ParamStore store = init_params(c, 0);
  const Image img = testing::random_image(64, 64, 1);
  ad::Tape t1, t2;
  ad::Binder b1(t1, store, false), b2(t2, store, false);
  const FrameFeatures a = encode_frame(b1, c, img), b = encode_frame(b2, c, img);
  EXPECT_EQ(a.tokens.rows(), 64);
  EXPECT_EQ(a.tokens.cols(), c.feature_dim);
  EXPECT_EQ(static_cast<int>(a.proposal_tokens.size()), c.n_det);
  EXPECT_EQ(a.proposal_content.rows(), c.n_det);
  for (const auto& box : a.anchor_boxes()) EXPECT_TRUE(box.valid());
  EXPECT_TRUE((a.tokens.value().array() == b.tokens.value().array()).all());
  EXPECT_EQ(a.proposal_tokens, b.proposal_tokens);

  Image other = img;
  other.at(10, 10, 0) = static_cast<std::uint8_t>(img.at(10, 10, 0) ^ 0x80);
  ad::Tape t3;
  ad::Binder b3(t3, store, false);
  const FrameFeatures d = encode_frame(b3, c, other);
  EXPECT_FALSE((d.tokens.value().array() == a.tokens.value().array()).all());
}

TEST(Encoder, RejectsWrongShape) {
  Config c;
  const ad::ParamStore store = init_params(c, 0);
  ad::Tape t;
  ad::Binder b(t, store, false);
  EXPECT_THROW(encode_frame(b, c, testing::random_image(32, 64, 1)), std::invalid_argument);
}

TEST(Params, CheckDetectsMismatch) {
  Config c = tiny_config();
  ad::ParamStore store = init_params(c, 0);
  EXPECT_NO_THROW(check_params(c, store));
  Config bigger = c;
  bigger.feature_dim = 32;
  EXPECT_THROW(check_params(bigger, store), ValidationError);
  const ad::ParamStore again = init_params(c, 0);
  for (const auto& [name, m] : store.all()) EXPECT_TRUE((again.at(name).array() == m.array()).all()) << name;
}

}  // namespace
}  // namespace histrack
