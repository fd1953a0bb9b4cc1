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

#include "histrack/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace histrack {

bool BoundingBox::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) && w > 0 &&
         h > 0;
}

namespace {

// Areas from corners, so a box overlaps itself exactly.
double corner_area(const BoundingBox::Corners& c) { return (c.x2 - c.x1) * (c.y2 - c.y1); }

double intersection_area(const BoundingBox::Corners& a, const BoundingBox::Corners& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  return iw * ih;
}

}  // namespace

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const double inter = intersection_area(ca, cb);
  const double uni = corner_area(ca) + corner_area(cb) - inter;
  if (uni <= 0) return 0.0;
  return inter / uni;
}

double generalized_iou(const BoundingBox& a, const BoundingBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const double inter = intersection_area(ca, cb);
  const double uni = corner_area(ca) + corner_area(cb) - inter;
  const double hull = (std::max(ca.x2, cb.x2) - std::min(ca.x1, cb.x1)) *
                      (std::max(ca.y2, cb.y2) - std::min(ca.y1, cb.y1));
  if (uni <= 0 || hull <= 0) return 0.0;
  return inter / uni - (hull - uni) / hull;
}

int Prediction::best_class() const {
  int best = 1;
  for (int c = 2; c < class_probs.size(); ++c) {
    if (class_probs[c] > class_probs[best]) best = c;
  }
  return best;
}

Prediction Prediction::from_probs(Vec probs, const BoundingBox& box) {
  Prediction p;
  p.class_probs = std::move(probs);
  p.box = box;
  p.score = p.class_probs.size() > 1 ? p.class_probs.tail(p.class_probs.size() - 1).maxCoeff() : 0.0;
  return p;
}

const AnnotationEntry* FrameAnnotations::find(int track_id) const {
  for (const auto& e : entries) {
    if (e.track_id == track_id) return &e;
  }
  return nullptr;
}

void FrameAnnotations::validate() const {
  std::set<int> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.track_id).second) {
      throw std::invalid_argument("duplicate track id " + std::to_string(e.track_id) +
                                  " in frame " + std::to_string(frame_index));
    }
  }
}

void Config::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError("config: " + m); };
  if (feature_dim <= 0 || d_head <= 0 || feature_dim % d_head != 0)
    fail("feature_dim must be a positive multiple of d_head");
  if (feature_dim % 8 != 0) fail("feature_dim must be divisible by 8");
  if (n_det < 1) fail("n_det must be >= 1");
  if (n_max < 1) fail("n_max must be >= 1");
  if (!(sigma > 0 && sigma < 1)) fail("sigma must lie in (0,1)");
  if (num_decoders < 1) fail("num_decoders must be >= 1");
  if (effective_irm_count() > num_decoders - 1) fail("irm_count must be <= num_decoders - 1");
  if (n_keep < 0) fail("n_keep must be >= 0");
  if (num_classes < 1) fail("num_classes must be >= 1");
  if (image_width % 8 != 0 || image_height % 8 != 0 || image_width <= 0 || image_height <= 0)
    fail("image size must be a positive multiple of 8");
  if (image_channels < 1) fail("image_channels must be >= 1");
  if (n_det > num_tokens()) fail("n_det exceeds the encoder token count");
  if (clip_length < 1) fail("clip_length must be >= 1");
  if (batch_clips < 1 || epochs < 0 || max_clip_stride < 1) fail("invalid training schedule");
  if (ffn_dim < 1) fail("ffn_dim must be >= 1");
}

namespace {

struct Field {
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

template <typename T>
T parse_value(const std::string& key, const std::string& s) {
  std::istringstream in(s);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) throw ValidationError("config: bad value for " + key + ": '" + s + "'");
  return v;
}

template <typename T>
std::string format_value(const T& v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

template <typename T>
Field field(T Config::*member, const std::string& key) {
  return {[member](const Config& c) { return format_value(c.*member); },
          [member, key](Config& c, const std::string& s) { c.*member = parse_value<T>(key, s); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto add = [&t](const std::string& key, Field f) { t.emplace_back(key, std::move(f)); };
    add("model.feature_dim", field(&Config::feature_dim, "model.feature_dim"));
    add("model.n_det", field(&Config::n_det, "model.n_det"));
    add("model.d_head", field(&Config::d_head, "model.d_head"));
    add("model.ffn_dim", field(&Config::ffn_dim, "model.ffn_dim"));
    add("model.num_decoders", field(&Config::num_decoders, "model.num_decoders"));
    add("model.irm_count", field(&Config::irm_count, "model.irm_count"));
    add("model.num_classes", field(&Config::num_classes, "model.num_classes"));
    add("model.image_width", field(&Config::image_width, "model.image_width"));
    add("model.image_height", field(&Config::image_height, "model.image_height"));
    add("model.image_channels", field(&Config::image_channels, "model.image_channels"));
    add("tracking.sigma", field(&Config::sigma, "tracking.sigma"));
    add("tracking.n_keep", field(&Config::n_keep, "tracking.n_keep"));
    add("tracking.n_max", field(&Config::n_max, "tracking.n_max"));
    add("loss.lambda_cls", field(&Config::lambda_cls, "loss.lambda_cls"));
    add("loss.lambda_l1", field(&Config::lambda_l1, "loss.lambda_l1"));
    add("loss.lambda_giou", field(&Config::lambda_giou, "loss.lambda_giou"));
    add("loss.background_weight", field(&Config::background_weight, "loss.background_weight"));
    add("loss.proposal_weight", field(&Config::proposal_weight, "loss.proposal_weight"));
    add("loss.class_loss",
        Field{[](const Config& c) { return std::string(c.class_loss == ClassLoss::kFocal ? "focal" : "ce"); },
              [](Config& c, const std::string& s) {
                if (s == "ce") c.class_loss = ClassLoss::kCrossEntropy;
                else if (s == "focal") c.class_loss = ClassLoss::kFocal;
                else throw ValidationError("config: loss.class_loss must be 'ce' or 'focal'");
              }});
    add("train.clip_length", field(&Config::clip_length, "train.clip_length"));
    add("train.batch_clips", field(&Config::batch_clips, "train.batch_clips"));
    add("train.epochs", field(&Config::epochs, "train.epochs"));
    add("train.max_clip_stride", field(&Config::max_clip_stride, "train.max_clip_stride"));
    add("train.learning_rate", field(&Config::learning_rate, "train.learning_rate"));
    add("train.weight_decay", field(&Config::weight_decay, "train.weight_decay"));
    add("train.grad_clip", field(&Config::grad_clip, "train.grad_clip"));
    add("train.seed", field(&Config::seed, "train.seed"));
    return t;
  }();
  return table;
}

const Field& lookup(const std::string& key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return f;
  }
  throw ValidationError("config: unknown key '" + key + "'");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> Config::to_pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, f] : fields()) out.emplace_back(k, f.get(*this));
  return out;
}

void Config::set(const std::string& key, const std::string& value) { lookup(key).set(*this, value); }

std::string Config::get(const std::string& key) const { return lookup(key).get(*this); }

}  // namespace histrack
