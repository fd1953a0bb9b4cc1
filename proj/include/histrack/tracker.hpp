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

// Inference loop: encoder, query construction, decoder stack and track
// lifecycle, one frame at a time.

#include <vector>

#include "histrack/autodiff.hpp"
#include "histrack/memory.hpp"
#include "histrack/synthgen.hpp"
#include "histrack/trackfile.hpp"
#include "histrack/types.hpp"

namespace histrack {

struct TrackerState {
  const Config* config = nullptr;
  const ad::ParamStore* params = nullptr;
  std::vector<TrackRecord> tracks;
  IdCounter ids;
  int last_frame = -1;

  TrackerState(const Config& c, const ad::ParamStore& p) : config(&c), params(&p) {}
};

// Confirmed track output for one frame, normalized coordinates.
struct TrackOutput {
  int track_id = 0;
  int class_id = 1;
  BoundingBox box;
  double score = 0;
};

struct StepStats {
  // Decoder input rows per live track (track id -> rows), before the update.
  std::vector<std::pair<int, int>> rows_per_track;
  // Bank length per live track (track id -> entries), before the update.
  std::vector<std::pair<int, int>> bank_sizes;
  int detection_rows = 0;
  std::vector<int> born;
  std::vector<int> died;
};

// Throws std::invalid_argument on an image shape mismatch or a frame index
// that does not increase.
std::vector<TrackOutput> step(TrackerState& state, const Image& image, int frame_index, StepStats* stats = nullptr);

// Rows use pixel coordinates of the video's native size. Throws
// std::invalid_argument on an empty video.
TrackFile run(const VideoItem& video, const ad::ParamStore& params, const Config& config,
              std::vector<StepStats>* stats = nullptr);

}  // namespace histrack
