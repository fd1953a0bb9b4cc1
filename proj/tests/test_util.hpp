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

#include <functional>
#include <string>
#include <vector>

#include "histrack/autodiff.hpp"
#include "histrack/rng.hpp"
#include "histrack/types.hpp"

namespace histrack::testing {

// A model small enough for finite differences: 16x16 images (4 tokens).
inline Config tiny_config() {
  Config c;
  c.feature_dim = 16;
  c.d_head = 2;
  c.ffn_dim = 16;
  c.n_det = 3;
  c.num_decoders = 2;
  c.image_width = 16;
  c.image_height = 16;
  c.n_max = 3;
  return c;
}

inline Image random_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w, 3);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return img;
}

inline Mat random_mat(int rows, int cols, Rng& rng, double scale = 1.0) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  }
  return m;
}

struct GradCheck {
  int checked = 0;
  int within_tight = 0;  // relative error < tight
  double worst = 0;
  std::string worst_name;
};

// `floor` keeps exactly-zero gradients (e.g. attention key biases) from
// turning round-off into large ratios.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

// Central differences over every parameter the objective binds.
inline GradCheck check_param_gradients(ad::ParamStore& store, const std::function<ad::Var(ad::Binder&)>& objective,
                                       double step = 1e-5, double tight = 1e-4) {
  std::map<std::string, Mat> analytic;
  double floor = 1e-6;
  {
    ad::Tape tape;
    ad::Binder binder(tape, store, true);
    ad::Var loss = objective(binder);
    tape.backward(loss);
    analytic = binder.gradients();
    // Central differences lose about eps * |f| / step to round-off.
    floor = 1e-6 * std::max(1.0, std::abs(loss.scalar()));
  }
  auto eval = [&]() {
    ad::Tape tape;
    ad::Binder binder(tape, store, false);
    return objective(binder).scalar();
  };
  GradCheck out;
  for (const auto& [name, g] : analytic) {
    Mat& p = store.mutable_at(name);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double keep = p.data()[i];
      p.data()[i] = keep + step;
      const double up = eval();
      p.data()[i] = keep - step;
      const double down = eval();
      p.data()[i] = keep;
      const double numeric = (up - down) / (2 * step);
      const double err = relative_error(g.data()[i], numeric, floor);
      ++out.checked;
      if (err < tight) ++out.within_tight;
      if (err > out.worst) {
        out.worst = err;
        out.worst_name = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

}  // namespace histrack::testing
