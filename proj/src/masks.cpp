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

#include "histrack/masks.hpp"

#include <stdexcept>

namespace histrack {

AttentionMask decoder_mask(const std::vector<int>& group_id, int num_tracking_rows) {
  const int n = static_cast<int>(group_id.size());
  if (num_tracking_rows < 0 || num_tracking_rows > n) throw std::invalid_argument("decoder_mask: bad tracking row count");
  AttentionMask m;
  m.allow = ad::BoolMat::Constant(n, n, true);
  for (int i = 0; i < num_tracking_rows; ++i) {
    for (int j = 0; j < num_tracking_rows; ++j) {
      if (i != j && group_id[static_cast<std::size_t>(i)] == group_id[static_cast<std::size_t>(j)]) m.allow(i, j) = false;
    }
  }
  return m;
}

AttentionMask irm_mask(const std::vector<int>& tracking_group_ids) {
  const int n = static_cast<int>(tracking_group_ids.size());
  AttentionMask m;
  m.allow.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m.allow(i, j) = tracking_group_ids[static_cast<std::size_t>(i)] == tracking_group_ids[static_cast<std::size_t>(j)];
    }
  }
  return m;
}

}  // namespace histrack
