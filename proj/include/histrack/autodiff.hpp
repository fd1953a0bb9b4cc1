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

// Reverse-mode automatic differentiation over dense double matrices.
//
// A Tape records every operation of one forward pass. Values are computed
// eagerly; Tape::backward() walks the record in reverse and accumulates
// gradients into every node that depends on a leaf created with
// requires_grad. Nodes are stored in a deque so references to values stay
// valid while the tape grows.

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "histrack/types.hpp"

namespace histrack::ad {

using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Mat& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  bool valid() const { return tape != nullptr; }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Mat& out_grad)>;

  Var constant(Mat value);
  Var leaf(Mat value, bool requires_grad = true);
  // Records an op result. `backward` receives the gradient of the output and
  // must call accumulate() for each input; it is skipped when no input needs
  // gradients.
  Var record(Mat value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Mat value, const std::vector<Var>& inputs, Backward backward);

  void backward(Var root);
  void accumulate(Var v, const Mat& delta);

  const Mat& value(int id) const { return nodes_[id].value; }
  // Empty matrix when the node received no gradient.
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    Backward backward;
  };
  std::deque<Node> nodes_;
};

// Elementwise and linear algebra.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var add_row(Var a, Var row);  // broadcast a 1 x c row over every row of a
Var min_elem(Var a, Var b);
Var max_elem(Var a, Var b);
Var abs(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var log(Var a);
Var exp(Var a);
Var inverse_sigmoid(Var a, double eps = 1e-5);

// Reductions and reshaping.
Var sum(Var a);
Var row_sum(Var a);
Var weighted_sum(Var a, const Mat& weights);
// Σ w * a(r, c) over the listed entries; result is 1 x 1.
struct Pick {
  int row;
  int col;
  double weight;
};
Var pick_sum(Var a, const std::vector<Pick>& picks);
// Column vector of a(r, c) for each listed entry.
Var pick_elements(Var a, const std::vector<std::pair<int, int>>& entries);
Var slice_rows(Var a, int start, int count);
Var slice_cols(Var a, int start, int count);
Var gather_rows(Var a, const std::vector<int>& rows);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
// N x g -> N x (g * group_size), repeating each column over a contiguous block.
Var expand_groups(Var a, int group_size);
// Merges factor x factor neighbourhoods of a row-major token grid into one
// token whose features are concatenated (y, x) in raster order.
Var space_to_depth(Var a, int grid_h, int grid_w, int factor);

// Normalization and attention.
Var log_softmax_rows(Var a);
Var softmax_rows(Var a);
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
// Multi-head scaled dot-product attention. `allow` is rows(q) x rows(k);
// an empty mask allows everything. Blocked entries get exactly zero weight.
Var attention(Var q, Var k, Var v, const BoolMat& allow, int heads);
// Sinusoidal embedding of N x 4 boxes into N x dim features.
Var sine_embed(Var boxes, int dim);

// Named parameter storage shared between tapes.
class ParamStore {
 public:
  void add(const std::string& name, Mat value);
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  const Mat& at(const std::string& name) const;
  Mat& mutable_at(const std::string& name);
  const std::map<std::string, Mat>& all() const { return values_; }
  std::size_t total_size() const;

 private:
  std::map<std::string, Mat> values_;
};

// Binds parameters of a store onto one tape, creating leaves lazily.
class Binder {
 public:
  Binder(Tape& tape, const ParamStore& store, bool requires_grad)
      : tape_(tape), store_(store), requires_grad_(requires_grad) {}

  Var operator()(const std::string& name);
  Tape& tape() { return tape_; }
  bool requires_grad() const { return requires_grad_; }
  // Gradients of every bound parameter after tape.backward().
  std::map<std::string, Mat> gradients() const;

 private:
  Tape& tape_;
  const ParamStore& store_;
  bool requires_grad_;
  std::map<std::string, Var> bound_;
};

}  // namespace histrack::ad
