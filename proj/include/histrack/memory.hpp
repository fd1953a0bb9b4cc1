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

// Per-track historical feature banks and the collaborative query batch built
// from them each frame.

#include <vector>

#include "histrack/types.hpp"

namespace histrack {

enum class TrackState { kActive, kLost };

struct BankEntry {
  int frame_index = 0;
  Vec feature;
};

struct TrackRecord {
  int track_id = 0;
  int class_id = 1;
  std::vector<BankEntry> feature_bank;  // newest first
  BoundingBox latest_anchor;
  TrackState state = TrackState::kActive;
  int lost_age = 0;
};

// Newest feature goes to the front; the oldest entries beyond n_max are
// evicted. Throws std::invalid_argument on a dimension mismatch or when
// frame_index does not exceed the newest bank entry.
void append_feature(TrackRecord& record, const Vec& feature, int frame_index, int n_max, int feature_dim);

struct QueryBatch {
  Mat content;                        // N_total x d
  std::vector<BoundingBox> anchors;   // N_total
  std::vector<int> group_id;          // track id, or detection_group(j)
  std::vector<bool> is_latest;
  std::vector<int> age;               // frames since the feature's source frame
  // Provenance of tracking rows: index into the input track list and bank slot.
  std::vector<int> track_index;
  std::vector<int> bank_slot;
  int num_tracking_rows = 0;

  int size() const { return static_cast<int>(group_id.size()); }
  bool is_tracking_row(int row) const { return row < num_tracking_rows; }
  int num_detection_rows() const { return size() - num_tracking_rows; }
  // Row of the newest query for each input track, in input order.
  std::vector<int> latest_rows() const;
};

// Detection rows use negative group ids so they never collide with track ids.
constexpr int detection_group(int j) { return -1 - j; }

// Tracking rows come first (one block per track, newest feature first), then
// the detection queries. Every row of a track carries its latest anchor.
QueryBatch build_query_batch(const std::vector<TrackRecord>& tracks, const Mat& detection_content,
                             const std::vector<BoundingBox>& detection_anchors, int frame_index);

struct QueryOutput {
  Prediction prediction;
  Vec feature;
};

struct TrackUpdate {
  std::vector<TrackRecord> tracks;
  std::vector<int> born;
  std::vector<int> died;
};

// Monotone id source; ids are never reused within a run.
class IdCounter {
 public:
  int next() { return next_++; }
  int peek() const { return next_; }

 private:
  int next_ = 1;
};

// Applies one frame of lifecycle transitions. `track_outputs[i]` is the
// output of the newest query of `tracks[i]`. Throws std::invalid_argument on
// duplicate track ids or a size mismatch.
TrackUpdate update_tracks(const std::vector<TrackRecord>& tracks, const std::vector<QueryOutput>& track_outputs,
                          const std::vector<QueryOutput>& new_detections, int frame_index, const Config& config,
                          IdCounter& ids);

}  // namespace histrack
