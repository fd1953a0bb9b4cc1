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

#include <vector>

#include "histrack/autodiff.hpp"
#include "histrack/memory.hpp"

namespace histrack {

// allow(i, j) == true: query i may attend to query j.
struct AttentionMask {
  ad::BoolMat allow;

  int size() const { return static_cast<int>(allow.rows()); }
  bool symmetric() const { return allow == allow.transpose(); }
  bool reflexive() const { return allow.diagonal().all(); }
};

// Blocks every pair of distinct tracking rows that share a track; all other
// pairs stay open.
AttentionMask decoder_mask(const std::vector<int>& group_id, int num_tracking_rows);
inline AttentionMask decoder_mask(const QueryBatch& batch) {
  return decoder_mask(batch.group_id, batch.num_tracking_rows);
}

// Tracking rows only: attention stays within a track.
AttentionMask irm_mask(const std::vector<int>& tracking_group_ids);

}  // namespace histrack
