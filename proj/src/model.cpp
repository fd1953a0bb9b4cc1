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

#include "histrack/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "histrack/rng.hpp"

namespace histrack {

namespace {

using ad::Var;

constexpr int kPatch = 4;
constexpr double kPriorSize = 0.2;

struct ShapeSpec {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  enum Init { kXavier, kZero, kOne, kUniform } init;
};

void add_linear(std::vector<ShapeSpec>& s, const std::string& name, int in, int out, bool zero = false) {
  s.push_back({name + ".w", in, out, zero ? ShapeSpec::kZero : ShapeSpec::kXavier});
  s.push_back({name + ".b", 1, out, ShapeSpec::kZero});
}

void add_mha(std::vector<ShapeSpec>& s, const std::string& name, int d) {
  for (const char* p : {".q", ".k", ".v", ".o"}) add_linear(s, name + p, d, d);
}

void add_norm(std::vector<ShapeSpec>& s, const std::string& name, int d) {
  s.push_back({name + ".g", 1, d, ShapeSpec::kOne});
  s.push_back({name + ".b", 1, d, ShapeSpec::kZero});
}

std::string layer_prefix(int layer) { return "dec" + std::to_string(layer); }
std::string irm_prefix(int layer) { return "irm" + std::to_string(layer); }

std::vector<ShapeSpec> param_shapes(const Config& c) {
  const int d = c.feature_dim;
  const int half = d / 2;
  std::vector<ShapeSpec> s;
  add_linear(s, "enc.patch", kPatch * kPatch * c.image_channels, half);
  add_linear(s, "enc.merge", 4 * half, d);
  add_linear(s, "enc.proj", d, d);
  add_linear(s, "enc.obj", d, 1);
  add_linear(s, "enc.box", d, 4);
  s.push_back({"det.content", c.n_det, d, ShapeSpec::kUniform});
  add_linear(s, "qpos.l1", d, d);
  add_linear(s, "qpos.l2", d, d);
  for (int l = 0; l < c.num_decoders; ++l) {
    const std::string p = layer_prefix(l);
    add_mha(s, p + ".sa", d);
    add_norm(s, p + ".ln1", d);
    add_mha(s, p + ".ca", d);
    add_norm(s, p + ".ln2", d);
    add_linear(s, p + ".ffn1", d, c.ffn_dim);
    add_linear(s, p + ".ffn2", c.ffn_dim, d);
    add_norm(s, p + ".ln3", d);
    add_linear(s, p + ".cls", d, c.num_classes + 1);
    add_linear(s, p + ".box1", d, d);
    add_linear(s, p + ".box2", d, 4, /*zero=*/true);
    if (c.irm_before_layer(l)) {
      const std::string q = irm_prefix(l);
      add_mha(s, q + ".add_collect", d);
      add_mha(s, q + ".add_action", d);
      add_mha(s, q + ".rem_collect", d);
      add_mha(s, q + ".rem_action", d);
      add_linear(s, q + ".gate", d, c.d_head);
      add_norm(s, q + ".ln", d);
    }
  }
  return s;
}

Var linear(ad::Binder& p, const std::string& name, Var x) {
  return ad::add_row(ad::matmul(x, p(name + ".w")), p(name + ".b"));
}

Var mha(ad::Binder& p, const std::string& name, Var query, Var key, Var value, const ad::BoolMat& allow, int heads) {
  Var q = linear(p, name + ".q", query);
  Var k = linear(p, name + ".k", key);
  Var v = linear(p, name + ".v", value);
  return linear(p, name + ".o", ad::attention(q, k, v, allow, heads));
}

Var norm(ad::Binder& p, const std::string& name, Var x) { return ad::layer_norm(x, p(name + ".g"), p(name + ".b")); }

Mat patchify(const Image& image) {
  const int gh = image.height / kPatch;
  const int gw = image.width / kPatch;
  Mat out(gh * gw, kPatch * kPatch * image.channels);
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      int col = 0;
      for (int y = 0; y < kPatch; ++y) {
        for (int x = 0; x < kPatch; ++x) {
          for (int c = 0; c < image.channels; ++c) {
            const double v = image.at(gy * kPatch + y, gx * kPatch + x, c) / 255.0;
            out(gy * gw + gx, col++) = (v - 0.5) / 0.25;
          }
        }
      }
    }
  }
  return out;
}

// Cell-centred boxes for every token of the encoder grid.
Mat token_cells(const Config& c, double size) {
  const int gh = c.token_grid_h();
  const int gw = c.token_grid_w();
  Mat out(gh * gw, 4);
  for (int y = 0; y < gh; ++y) {
    for (int x = 0; x < gw; ++x) {
      out.row(y * gw + x) << (x + 0.5) / gw, (y + 0.5) / gh, size, size;
    }
  }
  return out;
}

}  // namespace

ad::ParamStore init_params(const Config& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ad::ParamStore store;
  for (const auto& spec : param_shapes(config)) {
    Mat m(spec.rows, spec.cols);
    switch (spec.init) {
      case ShapeSpec::kZero:
        m.setZero();
        break;
      case ShapeSpec::kOne:
        m.setOnes();
        break;
      case ShapeSpec::kUniform:
        for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-1.0, 1.0);
        break;
      case ShapeSpec::kXavier: {
        const double a = std::sqrt(6.0 / static_cast<double>(spec.rows + spec.cols));
        for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-a, a);
        break;
      }
    }
    store.add(spec.name, std::move(m));
  }
  return store;
}

void check_params(const Config& config, const ad::ParamStore& params) {
  for (const auto& spec : param_shapes(config)) {
    if (!params.contains(spec.name)) throw ValidationError("checkpoint is missing parameter " + spec.name);
    const Mat& m = params.at(spec.name);
    if (m.rows() != spec.rows || m.cols() != spec.cols) {
      throw ValidationError("parameter " + spec.name + " has shape " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", config expects " + std::to_string(spec.rows) + "x" +
                            std::to_string(spec.cols));
    }
  }
}

BoundingBox box_from_row(const Mat& m, int row) { return {m(row, 0), m(row, 1), m(row, 2), m(row, 3)}; }

ad::Var boxes_to_var(ad::Tape& tape, const std::vector<BoundingBox>& boxes) {
  Mat m(static_cast<Eigen::Index>(boxes.size()), 4);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) << boxes[i].cx, boxes[i].cy, boxes[i].w, boxes[i].h;
  }
  return tape.constant(std::move(m));
}

std::vector<BoundingBox> FrameFeatures::anchor_boxes() const {
  std::vector<BoundingBox> out;
  const Mat& m = proposal_anchors.value();
  for (int r = 0; r < m.rows(); ++r) out.push_back(box_from_row(m, r));
  return out;
}

FrameFeatures encode_frame(ad::Binder& p, const Config& c, const Image& image) {
  if (image.height != c.image_height || image.width != c.image_width || image.channels != c.image_channels ||
      image.pixels.size() != static_cast<std::size_t>(image.height * image.width * image.channels)) {
    throw std::invalid_argument("encode_frame: image is " + std::to_string(image.height) + "x" +
                                std::to_string(image.width) + "x" + std::to_string(image.channels) + ", expected " +
                                std::to_string(c.image_height) + "x" + std::to_string(c.image_width) + "x" +
                                std::to_string(c.image_channels));
  }
  ad::Tape& tape = p.tape();
  Var x = tape.constant(patchify(image));
  x = ad::relu(linear(p, "enc.patch", x));
  x = ad::space_to_depth(x, c.image_height / kPatch, c.image_width / kPatch, 2);
  x = ad::relu(linear(p, "enc.merge", x));
  Var pos = ad::sine_embed(tape.constant(token_cells(c, 1.0 / c.token_grid_w())), c.feature_dim);
  x = ad::add(linear(p, "enc.proj", x), pos);

  FrameFeatures f;
  f.tokens = x;
  f.objectness = linear(p, "enc.obj", x);
  Var prior = ad::inverse_sigmoid(tape.constant(token_cells(c, kPriorSize)));
  f.token_boxes = ad::sigmoid(ad::add(linear(p, "enc.box", x), prior));

  const Mat& scores = f.objectness.value();
  std::vector<int> order(static_cast<std::size_t>(scores.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores(a, 0) > scores(b, 0); });
  order.resize(static_cast<std::size_t>(c.n_det));
  f.proposal_tokens = order;
  f.proposal_anchors = ad::gather_rows(f.token_boxes, order);
  f.proposal_content = p("det.content");
  return f;
}

Var irm_forward(ad::Binder& p, const Config& c, int irm_layer, Var content, const std::vector<int>& group_ids,
                const IrmOverrides& overrides, IrmTrace* trace) {
  if (c.feature_dim % c.d_head != 0) throw std::invalid_argument("irm_forward: d not divisible by d_head");
  if (content.rows() != static_cast<Eigen::Index>(group_ids.size()))
    throw std::invalid_argument("irm_forward: group id count mismatch");
  if (content.rows() == 0) return content;
  const std::string q = irm_prefix(irm_layer);
  const ad::BoolMat allow = irm_mask(group_ids).allow;
  const int heads = c.d_head;
  ad::Tape& tape = p.tape();

  // Addition branch: collect clues, then use them to query the original content.
  Var add_clues = mha(p, q + ".add_collect", content, content, content, allow, heads);
  Var addition = mha(p, q + ".add_action", add_clues, content, content, allow, heads);
  // Removal branch: same structure followed by a sigmoid gate per head group.
  Var rem_clues = mha(p, q + ".rem_collect", content, content, content, allow, heads);
  Var removal = mha(p, q + ".rem_action", rem_clues, content, content, allow, heads);
  Var gate = ad::sigmoid(linear(p, q + ".gate", removal));

  if (overrides.gate) gate = tape.constant(Mat::Constant(gate.rows(), gate.cols(), *overrides.gate));
  if (overrides.zero_addition) addition = tape.constant(Mat::Zero(addition.rows(), addition.cols()));
  if (trace != nullptr) *trace = {gate, addition};

  Var keep = ad::add_scalar(ad::scale(ad::expand_groups(gate, c.feature_dim / heads), -1.0), 1.0);
  Var reserved = ad::scale(ad::mul(content, keep), 2.0);
  return norm(p, q + ".ln", ad::add(reserved, addition));
}

LayerOutput decoder_layer_forward(ad::Binder& p, const Config& c, int layer, Var content, Var anchors,
                                  const AttentionMask& mask, const FrameFeatures& frame) {
  if (mask.size() != content.rows() || anchors.rows() != content.rows() || anchors.cols() != 4)
    throw std::invalid_argument("decoder_layer_forward: shape mismatch");
  const std::string l = layer_prefix(layer);
  const int heads = c.d_head;

  Var pos = linear(p, "qpos.l2", ad::relu(linear(p, "qpos.l1", ad::sine_embed(anchors, c.feature_dim))));
  Var qk = ad::add(content, pos);
  Var x = norm(p, l + ".ln1", ad::add(content, mha(p, l + ".sa", qk, qk, content, mask.allow, heads)));
  Var query = ad::add(x, pos);
  x = norm(p, l + ".ln2", ad::add(x, mha(p, l + ".ca", query, frame.tokens, frame.tokens, {}, heads)));
  Var ffn = linear(p, l + ".ffn2", ad::relu(linear(p, l + ".ffn1", x)));
  x = norm(p, l + ".ln3", ad::add(x, ffn));

  LayerOutput out;
  out.content = x;
  out.log_probs = ad::log_softmax_rows(linear(p, l + ".cls", x));
  Var delta = linear(p, l + ".box2", ad::relu(linear(p, l + ".box1", x)));
  out.boxes = ad::sigmoid(ad::add(ad::inverse_sigmoid(anchors), delta));
  return out;
}

std::vector<LayerOutput> forward_frame(ad::Binder& p, const Config& c, Var content, Var anchors,
                                       const std::vector<int>& group_ids, int num_tracking_rows,
                                       const FrameFeatures& frame, const IrmOverrides& overrides) {
  const AttentionMask mask = decoder_mask(group_ids, num_tracking_rows);
  const std::vector<int> tracking_groups(group_ids.begin(), group_ids.begin() + num_tracking_rows);
  const int n = static_cast<int>(group_ids.size());
  std::vector<LayerOutput> outputs;
  for (int l = 0; l < c.num_decoders; ++l) {
    if (l > 0) {
      content = outputs.back().content;
      anchors = outputs.back().boxes;
      if (c.irm_before_layer(l) && num_tracking_rows > 0) {
        Var refined = irm_forward(p, c, l, ad::slice_rows(content, 0, num_tracking_rows), tracking_groups, overrides);
        content = num_tracking_rows == n
                      ? refined
                      : ad::concat_rows({refined, ad::slice_rows(content, num_tracking_rows, n - num_tracking_rows)});
      }
    }
    outputs.push_back(decoder_layer_forward(p, c, l, content, anchors, mask, frame));
  }
  return outputs;
}

std::vector<LayerOutput> forward_frame(ad::Binder& p, const Config& c, const QueryBatch& batch,
                                       const FrameFeatures& frame) {
  ad::Tape& tape = p.tape();
  return forward_frame(p, c, tape.constant(batch.content), boxes_to_var(tape, batch.anchors), batch.group_id,
                       batch.num_tracking_rows, frame);
}

std::vector<Prediction> LayerOutput::predictions() const {
  std::vector<Prediction> out;
  for (int r = 0; r < content.rows(); ++r) out.push_back(prediction(r));
  return out;
}

Prediction LayerOutput::prediction(int row) const {
  Vec probs = log_probs.value().row(row).transpose().array().exp();
  return Prediction::from_probs(std::move(probs), box_from_row(boxes.value(), row));
}

int irm_applications(const Config& config) {
  int n = 0;
  for (int l = 0; l < config.num_decoders; ++l) n += config.irm_before_layer(l) ? 1 : 0;
  return n;
}

}  // namespace histrack
