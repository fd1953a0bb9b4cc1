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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace histrack {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Normalized center-format box. Corner format is derived on demand.
struct BoundingBox {
  double cx = 0.5;
  double cy = 0.5;
  double w = 0.1;
  double h = 0.1;

  struct Corners {
    double x1, y1, x2, y2;
  };

  Corners corners() const { return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2}; }
  static BoundingBox from_corners(const Corners& c) {
    return {(c.x1 + c.x2) / 2, (c.y1 + c.y2) / 2, c.x2 - c.x1, c.y2 - c.y1};
  }
  double area() const { return w * h; }
  bool valid() const;

  bool operator==(const BoundingBox&) const = default;
};

double box_iou(const BoundingBox& a, const BoundingBox& b);
double generalized_iou(const BoundingBox& a, const BoundingBox& b);

// Class index 0 is background.
struct Prediction {
  Vec class_probs;
  BoundingBox box;
  double score = 0.0;

  int best_class() const;  // argmax over non-background classes, 1-based
  static Prediction from_probs(Vec probs, const BoundingBox& box);
};

struct AnnotationEntry {
  int track_id = 0;
  int class_id = 1;
  BoundingBox box;
  bool visible = true;
};

struct FrameAnnotations {
  int frame_index = 0;
  std::vector<AnnotationEntry> entries;

  const AnnotationEntry* find(int track_id) const;
  // Throws std::invalid_argument on duplicate ids.
  void validate() const;
};

// Interleaved 8-bit image, row-major H x W x C.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int h, int w, int c) : height(h), width(w), channels(c), pixels(static_cast<std::size_t>(h * w * c), 0) {}
  std::uint8_t& at(int y, int x, int c) { return pixels[static_cast<std::size_t>((y * width + x) * channels + c)]; }
  std::uint8_t at(int y, int x, int c) const { return pixels[static_cast<std::size_t>((y * width + x) * channels + c)]; }
  bool operator==(const Image&) const = default;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file or directory could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ClassLoss { kCrossEntropy, kFocal };

struct Config {
  // model
  int feature_dim = 64;
  int n_det = 20;
  int d_head = 8;  // attention heads == IRM gate groups
  int ffn_dim = 128;
  int num_decoders = 3;
  int irm_count = -1;  // -1 selects num_decoders - 1
  int num_classes = 2;
  int image_width = 64;
  int image_height = 64;
  int image_channels = 3;

  // tracking
  double sigma = 0.6;
  int n_keep = 5;
  int n_max = 3;

  // loss
  double lambda_cls = 2.0;
  double lambda_l1 = 5.0;
  double lambda_giou = 2.0;
  double background_weight = 0.1;
  double proposal_weight = 1.0;
  ClassLoss class_loss = ClassLoss::kCrossEntropy;

  // training
  int clip_length = 4;
  int batch_clips = 8;
  int epochs = 20;
  int max_clip_stride = 10;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  double grad_clip = 0.1;
  std::uint64_t seed = 0;

  int effective_irm_count() const { return irm_count < 0 ? num_decoders - 1 : irm_count; }
  // Decoder layers are 0-based; IRMs sit in front of the deepest layers.
  bool irm_before_layer(int layer) const {
    return layer >= 1 && layer >= num_decoders - effective_irm_count();
  }
  int token_grid_w() const { return image_width / 8; }
  int token_grid_h() const { return image_height / 8; }
  int num_tokens() const { return token_grid_w() * token_grid_h(); }

  // Throws ValidationError.
  void validate() const;

  // Flat key/value view; keys are "section.name".
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
};

}  // namespace histrack
