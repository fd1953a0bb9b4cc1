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

#include "histrack/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace histrack::ad {

const Mat& Var::value() const { return tape->value(id); }

Var Tape::constant(Mat value) { return leaf(std::move(value), false); }

Var Tape::leaf(Mat value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Mat(), requires_grad, nullptr});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Mat value, std::initializer_list<Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& in : inputs) needs = needs || nodes_[in.id].needs_grad;
  nodes_.push_back(Node{std::move(value), Mat(), needs, needs ? std::move(backward) : nullptr});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Mat value, const std::vector<Var>& inputs, Backward backward) {
  bool needs = false;
  for (const Var& in : inputs) needs = needs || nodes_[in.id].needs_grad;
  nodes_.push_back(Node{std::move(value), Mat(), needs, needs ? std::move(backward) : nullptr});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(Var v, const Mat& delta) {
  Node& n = nodes_[v.id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = delta;
  } else {
    n.grad += delta;
  }
}

void Tape::backward(Var root) {
  Node& r = nodes_[root.id];
  if (!r.needs_grad) return;
  r.grad = Mat::Ones(r.value.rows(), r.value.cols());
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.backward || n.grad.size() == 0) continue;
    n.backward(*this, n.grad);
  }
}

namespace {

void check_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  return a.tape->record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const Mat& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.needs_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  return a.tape->record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Mat& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  return a.tape->record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Mat& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  return a.tape->record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, const Mat& g) {
    if (t.needs_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
    if (t.needs_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var div(Var a, Var b) {
  check_same_shape(a, b, "div");
  return a.tape->record(a.value().cwiseQuotient(b.value()), {a, b}, [a, b](Tape& t, const Mat& g) {
    if (t.needs_grad(a)) t.accumulate(a, g.cwiseQuotient(b.value()));
    if (t.needs_grad(b)) {
      const Mat& bv = b.value();
      t.accumulate(b, -g.cwiseProduct(a.value()).cwiseQuotient(bv.cwiseProduct(bv)));
    }
  });
}

Var scale(Var a, double s) {
  return a.tape->record(a.value() * s, {a}, [a, s](Tape& t, const Mat& g) { t.accumulate(a, g * s); });
}

Var add_scalar(Var a, double s) {
  return a.tape->record(a.value().array() + s, {a}, [a](Tape& t, const Mat& g) { t.accumulate(a, g); });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("add_row: bad row shape");
  Mat out = a.value().rowwise() + row.value().row(0);
  return a.tape->record(std::move(out), {a, row}, [a, row](Tape& t, const Mat& g) {
    t.accumulate(a, g);
    if (t.needs_grad(row)) t.accumulate(row, g.colwise().sum());
  });
}

Var min_elem(Var a, Var b) {
  check_same_shape(a, b, "min_elem");
  Mat out = a.value().cwiseMin(b.value());
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, const Mat& g) {
    const auto pick_a = (a.value().array() <= b.value().array()).cast<double>();
    t.accumulate(a, (g.array() * pick_a).matrix());
    t.accumulate(b, (g.array() * (1.0 - pick_a)).matrix());
  });
}

Var max_elem(Var a, Var b) {
  check_same_shape(a, b, "max_elem");
  Mat out = a.value().cwiseMax(b.value());
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, const Mat& g) {
    const auto pick_a = (a.value().array() >= b.value().array()).cast<double>();
    t.accumulate(a, (g.array() * pick_a).matrix());
    t.accumulate(b, (g.array() * (1.0 - pick_a)).matrix());
  });
}

Var abs(Var a) {
  return a.tape->record(a.value().cwiseAbs(), {a}, [a](Tape& t, const Mat& g) {
    t.accumulate(a, (g.array() * a.value().array().sign()).matrix());
  });
}

Var relu(Var a) {
  return a.tape->record(a.value().cwiseMax(0.0), {a}, [a](Tape& t, const Mat& g) {
    t.accumulate(a, (g.array() * (a.value().array() > 0).cast<double>()).matrix());
  });
}

Var sigmoid(Var a) {
  Mat y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return a.tape->record(y, {a}, [a, y](Tape& t, const Mat& g) {
    t.accumulate(a, (g.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var log(Var a) {
  return a.tape->record(a.value().array().log().matrix(), {a}, [a](Tape& t, const Mat& g) {
    t.accumulate(a, g.cwiseQuotient(a.value()));
  });
}

Var exp(Var a) {
  Mat y = a.value().array().exp().matrix();
  return a.tape->record(y, {a}, [a, y](Tape& t, const Mat& g) { t.accumulate(a, g.cwiseProduct(y)); });
}

Var inverse_sigmoid(Var a, double eps) {
  const Mat& x = a.value();
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xc = std::clamp(x(i), 0.0, 1.0);
    out(i) = std::log(std::max(xc, eps) / std::max(1.0 - xc, eps));
  }
  return a.tape->record(std::move(out), {a}, [a, eps](Tape& t, const Mat& g) {
    const Mat& x = a.value();
    Mat d(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double v = 0.0;
      if (x(i) > eps && x(i) <= 1.0) v += 1.0 / x(i);
      if (1.0 - x(i) > eps && x(i) >= 0.0) v += 1.0 / (1.0 - x(i));
      d(i) = g(i) * v;
    }
    t.accumulate(a, d);
  });
}

Var sum(Var a) {
  Mat out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape->record(std::move(out), {a}, [a](Tape& t, const Mat& g) {
    t.accumulate(a, Mat::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var row_sum(Var a) {
  Mat out = a.value().rowwise().sum();
  return a.tape->record(std::move(out), {a}, [a](Tape& t, const Mat& g) {
    t.accumulate(a, g.col(0).replicate(1, a.cols()));
  });
}

Var weighted_sum(Var a, const Mat& weights) {
  if (weights.rows() != a.rows() || weights.cols() != a.cols())
    throw std::invalid_argument("weighted_sum: shape mismatch");
  Mat out(1, 1);
  out(0, 0) = a.value().cwiseProduct(weights).sum();
  return a.tape->record(std::move(out), {a}, [a, weights](Tape& t, const Mat& g) {
    t.accumulate(a, weights * g(0, 0));
  });
}

Var pick_sum(Var a, const std::vector<Pick>& picks) {
  const Mat& v = a.value();
  Mat out = Mat::Zero(1, 1);
  for (const auto& p : picks) out(0, 0) += p.weight * v(p.row, p.col);
  return a.tape->record(std::move(out), {a}, [a, picks](Tape& t, const Mat& g) {
    Mat d = Mat::Zero(a.rows(), a.cols());
    for (const auto& p : picks) d(p.row, p.col) += p.weight * g(0, 0);
    t.accumulate(a, d);
  });
}

Var pick_elements(Var a, const std::vector<std::pair<int, int>>& entries) {
  const Mat& v = a.value();
  Mat out(static_cast<Eigen::Index>(entries.size()), 1);
  for (std::size_t i = 0; i < entries.size(); ++i) out(static_cast<Eigen::Index>(i), 0) = v(entries[i].first, entries[i].second);
  return a.tape->record(std::move(out), {a}, [a, entries](Tape& t, const Mat& g) {
    Mat d = Mat::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < entries.size(); ++i) d(entries[i].first, entries[i].second) += g(static_cast<Eigen::Index>(i), 0);
    t.accumulate(a, d);
  });
}

Var slice_rows(Var a, int start, int count) {
  if (start < 0 || count < 0 || start + count > a.rows()) throw std::out_of_range("slice_rows");
  Mat out = a.value().middleRows(start, count);
  return a.tape->record(std::move(out), {a}, [a, start, count](Tape& t, const Mat& g) {
    Mat d = Mat::Zero(a.rows(), a.cols());
    d.middleRows(start, count) = g;
    t.accumulate(a, d);
  });
}

Var slice_cols(Var a, int start, int count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw std::out_of_range("slice_cols");
  Mat out = a.value().middleCols(start, count);
  return a.tape->record(std::move(out), {a}, [a, start, count](Tape& t, const Mat& g) {
    Mat d = Mat::Zero(a.rows(), a.cols());
    d.middleCols(start, count) = g;
    t.accumulate(a, d);
  });
}

Var gather_rows(Var a, const std::vector<int>& rows) {
  const Mat& v = a.value();
  Mat out(static_cast<Eigen::Index>(rows.size()), v.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= v.rows()) throw std::out_of_range("gather_rows");
    out.row(static_cast<Eigen::Index>(i)) = v.row(rows[i]);
  }
  return a.tape->record(std::move(out), {a}, [a, rows](Tape& t, const Mat& g) {
    Mat d = Mat::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) d.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(a, d);
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  for (const Var& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
    rows += p.rows();
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return parts.front().tape->record(std::move(out), parts, [parts](Tape& t, const Mat& g) {
    Eigen::Index at = 0;
    for (const Var& p : parts) {
      if (t.needs_grad(p)) t.accumulate(p, g.middleRows(at, p.rows()));
      at += p.rows();
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts.front().rows();
  for (const Var& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p.cols();
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return parts.front().tape->record(std::move(out), parts, [parts](Tape& t, const Mat& g) {
    Eigen::Index at = 0;
    for (const Var& p : parts) {
      if (t.needs_grad(p)) t.accumulate(p, g.middleCols(at, p.cols()));
      at += p.cols();
    }
  });
}

Var expand_groups(Var a, int group_size) {
  const Mat& v = a.value();
  Mat out(v.rows(), v.cols() * group_size);
  for (Eigen::Index gi = 0; gi < v.cols(); ++gi) {
    out.middleCols(gi * group_size, group_size) = v.col(gi).replicate(1, group_size);
  }
  return a.tape->record(std::move(out), {a}, [a, group_size](Tape& t, const Mat& g) {
    Mat d(a.rows(), a.cols());
    for (Eigen::Index gi = 0; gi < a.cols(); ++gi) {
      d.col(gi) = g.middleCols(gi * group_size, group_size).rowwise().sum();
    }
    t.accumulate(a, d);
  });
}

namespace {

// Output token index and column offset for every input token.
std::vector<std::pair<int, int>> space_to_depth_map(int grid_h, int grid_w, int factor, int channels) {
  std::vector<std::pair<int, int>> map(static_cast<std::size_t>(grid_h * grid_w));
  const int out_w = grid_w / factor;
  for (int y = 0; y < grid_h; ++y) {
    for (int x = 0; x < grid_w; ++x) {
      const int out_token = (y / factor) * out_w + (x / factor);
      const int block = (y % factor) * factor + (x % factor);
      map[static_cast<std::size_t>(y * grid_w + x)] = {out_token, block * channels};
    }
  }
  return map;
}

}  // namespace

Var space_to_depth(Var a, int grid_h, int grid_w, int factor) {
  if (a.rows() != grid_h * grid_w || grid_h % factor != 0 || grid_w % factor != 0)
    throw std::invalid_argument("space_to_depth: bad grid");
  const int c = static_cast<int>(a.cols());
  auto map = space_to_depth_map(grid_h, grid_w, factor, c);
  Mat out((grid_h / factor) * (grid_w / factor), c * factor * factor);
  for (std::size_t i = 0; i < map.size(); ++i) {
    out.block(map[i].first, map[i].second, 1, c) = a.value().row(static_cast<Eigen::Index>(i));
  }
  return a.tape->record(std::move(out), {a}, [a, map, c](Tape& t, const Mat& g) {
    Mat d(a.rows(), a.cols());
    for (std::size_t i = 0; i < map.size(); ++i) {
      d.row(static_cast<Eigen::Index>(i)) = g.block(map[i].first, map[i].second, 1, c);
    }
    t.accumulate(a, d);
  });
}

Var log_softmax_rows(Var a) {
  const Mat& v = a.value();
  Mat out(v.rows(), v.cols());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double m = v.row(r).maxCoeff();
    const double lse = m + std::log((v.row(r).array() - m).exp().sum());
    out.row(r) = v.row(r).array() - lse;
  }
  return a.tape->record(out, {a}, [a, out](Tape& t, const Mat& g) {
    const Mat p = out.array().exp().matrix();
    Mat d = g - (p.array().colwise() * g.rowwise().sum().array()).matrix();
    t.accumulate(a, d);
  });
}

Var softmax_rows(Var a) {
  const Mat& v = a.value();
  Mat out(v.rows(), v.cols());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const Eigen::RowVectorXd e = (v.row(r).array() - v.row(r).maxCoeff()).exp();
    out.row(r) = e / e.sum();
  }
  return a.tape->record(out, {a}, [a, out](Tape& t, const Mat& g) {
    const Eigen::VectorXd dot = g.cwiseProduct(out).rowwise().sum();
    Mat d = (out.array() * (g.array().colwise() - dot.array())).matrix();
    t.accumulate(a, d);
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Mat& v = x.value();
  const Eigen::Index n = v.rows();
  const Eigen::Index d = v.cols();
  if (gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 || bias.cols() != d)
    throw std::invalid_argument("layer_norm: parameter shape mismatch");
  Mat xhat(n, d);
  Eigen::VectorXd inv(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mu = v.row(r).mean();
    const double var = (v.row(r).array() - mu).square().mean();
    inv(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (v.row(r).array() - mu) * inv(r);
  }
  Mat out = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  return x.tape->record(std::move(out), {x, gain, bias}, [x, gain, bias, xhat, inv](Tape& t, const Mat& g) {
    const Eigen::Index d = xhat.cols();
    if (t.needs_grad(gain)) t.accumulate(gain, g.cwiseProduct(xhat).colwise().sum());
    if (t.needs_grad(bias)) t.accumulate(bias, g.colwise().sum());
    if (t.needs_grad(x)) {
      const Mat dxhat = (g.array().rowwise() * gain.value().row(0).array()).matrix();
      Mat dx(xhat.rows(), d);
      for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
        const double s1 = dxhat.row(r).sum();
        const double s2 = dxhat.row(r).dot(xhat.row(r));
        dx.row(r) = (inv(r) / static_cast<double>(d)) *
                    (static_cast<double>(d) * dxhat.row(r).array() - s1 - xhat.row(r).array() * s2);
      }
      t.accumulate(x, dx);
    }
  });
}

Var attention(Var q, Var k, Var v, const BoolMat& allow, int heads) {
  const Eigen::Index n = q.rows();
  const Eigen::Index m = k.rows();
  const Eigen::Index d = q.cols();
  if (k.cols() != d || v.cols() != d || v.rows() != m) throw std::invalid_argument("attention: shape mismatch");
  if (heads <= 0 || d % heads != 0) throw std::invalid_argument("attention: d not divisible by heads");
  const bool masked = allow.size() != 0;
  if (masked && (allow.rows() != n || allow.cols() != m)) throw std::invalid_argument("attention: mask shape mismatch");
  const Eigen::Index dh = d / heads;
  const double scale_f = 1.0 / std::sqrt(static_cast<double>(dh));

  std::vector<Mat> probs(static_cast<std::size_t>(heads));
  Mat out = Mat::Zero(n, d);
  for (int h = 0; h < heads; ++h) {
    const Mat s = q.value().middleCols(h * dh, dh) * k.value().middleCols(h * dh, dh).transpose() * scale_f;
    Mat p = Mat::Zero(n, m);
    for (Eigen::Index r = 0; r < n; ++r) {
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < m; ++c) {
        if (!masked || allow(r, c)) mx = std::max(mx, s(r, c));
      }
      if (!std::isfinite(mx)) continue;
      double z = 0.0;
      for (Eigen::Index c = 0; c < m; ++c) {
        if (!masked || allow(r, c)) {
          p(r, c) = std::exp(s(r, c) - mx);
          z += p(r, c);
        }
      }
      p.row(r) /= z;
    }
    out.middleCols(h * dh, dh) = p * v.value().middleCols(h * dh, dh);
    probs[static_cast<std::size_t>(h)] = std::move(p);
  }
  return q.tape->record(std::move(out), {q, k, v}, [q, k, v, probs, heads, dh, scale_f](Tape& t, const Mat& g) {
    Mat dq = Mat::Zero(q.rows(), q.cols());
    Mat dk = Mat::Zero(k.rows(), k.cols());
    Mat dv = Mat::Zero(v.rows(), v.cols());
    for (int h = 0; h < heads; ++h) {
      const Mat& p = probs[static_cast<std::size_t>(h)];
      const Mat gh = g.middleCols(h * dh, dh);
      dv.middleCols(h * dh, dh) = p.transpose() * gh;
      const Mat dp = gh * v.value().middleCols(h * dh, dh).transpose();
      const Eigen::VectorXd dot = dp.cwiseProduct(p).rowwise().sum();
      const Mat ds = (p.array() * (dp.array().colwise() - dot.array())).matrix() * scale_f;
      dq.middleCols(h * dh, dh) = ds * k.value().middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) = ds.transpose() * q.value().middleCols(h * dh, dh);
    }
    t.accumulate(q, dq);
    t.accumulate(k, dk);
    t.accumulate(v, dv);
  });
}

Var sine_embed(Var boxes, int dim) {
  if (boxes.cols() != 4 || dim % 8 != 0) throw std::invalid_argument("sine_embed: needs N x 4 boxes and dim % 8 == 0");
  const int per = dim / 4;
  const int pairs = per / 2;
  std::vector<double> freq(static_cast<std::size_t>(pairs));
  for (int j = 0; j < pairs; ++j) {
    freq[static_cast<std::size_t>(j)] =
        2.0 * std::numbers::pi / std::pow(20.0, 2.0 * j / static_cast<double>(per));
  }
  const Mat& b = boxes.value();
  Mat out(b.rows(), dim);
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    for (int c = 0; c < 4; ++c) {
      for (int j = 0; j < pairs; ++j) {
        const double a = b(r, c) * freq[static_cast<std::size_t>(j)];
        out(r, c * per + 2 * j) = std::sin(a);
        out(r, c * per + 2 * j + 1) = std::cos(a);
      }
    }
  }
  return boxes.tape->record(std::move(out), {boxes}, [boxes, freq, per, pairs](Tape& t, const Mat& g) {
    const Mat& b = boxes.value();
    Mat d = Mat::Zero(b.rows(), 4);
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      for (int c = 0; c < 4; ++c) {
        for (int j = 0; j < pairs; ++j) {
          const double f = freq[static_cast<std::size_t>(j)];
          const double a = b(r, c) * f;
          d(r, c) += f * (g(r, c * per + 2 * j) * std::cos(a) - g(r, c * per + 2 * j + 1) * std::sin(a));
        }
      }
    }
    t.accumulate(boxes, d);
  });
}

void ParamStore::add(const std::string& name, Mat value) {
  if (!values_.emplace(name, std::move(value)).second) throw std::invalid_argument("duplicate parameter " + name);
}

const Mat& ParamStore::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::out_of_range("unknown parameter " + name);
  return it->second;
}

Mat& ParamStore::mutable_at(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::out_of_range("unknown parameter " + name);
  return it->second;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& [_, v] : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

Var Binder::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var v = tape_.leaf(store_.at(name), requires_grad_);
  bound_.emplace(name, v);
  return v;
}

std::map<std::string, Mat> Binder::gradients() const {
  std::map<std::string, Mat> out;
  for (const auto& [name, v] : bound_) {
    const Mat& g = tape_.grad(v);
    out.emplace(name, g.size() == 0 ? Mat::Zero(v.rows(), v.cols()) : g);
  }
  return out;
}

}  // namespace histrack::ad
