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

#include "histrack/memory.hpp"

#include <set>
#include <stdexcept>
#include <string>

namespace histrack {

void append_feature(TrackRecord& record, const Vec& feature, int frame_index, int n_max, int feature_dim) {
  if (feature.size() != feature_dim) {
    throw std::invalid_argument("append_feature: feature has dimension " + std::to_string(feature.size()) +
                                ", expected " + std::to_string(feature_dim));
  }
  if (!record.feature_bank.empty() && record.feature_bank.front().frame_index >= frame_index) {
    throw std::invalid_argument("append_feature: frame index must increase");
  }
  record.feature_bank.insert(record.feature_bank.begin(), BankEntry{frame_index, feature});
  if (static_cast<int>(record.feature_bank.size()) > n_max) record.feature_bank.resize(static_cast<std::size_t>(n_max));
}

std::vector<int> QueryBatch::latest_rows() const {
  std::vector<int> rows;
  for (int r = 0; r < num_tracking_rows; ++r) {
    if (is_latest[static_cast<std::size_t>(r)]) rows.push_back(r);
  }
  return rows;
}

QueryBatch build_query_batch(const std::vector<TrackRecord>& tracks, const Mat& detection_content,
                             const std::vector<BoundingBox>& detection_anchors, int frame_index) {
  if (detection_content.rows() != static_cast<Eigen::Index>(detection_anchors.size())) {
    throw std::invalid_argument("build_query_batch: detection content/anchor count mismatch");
  }
  const Eigen::Index d = detection_content.cols();
  int n_track_rows = 0;
  for (const auto& t : tracks) {
    if (t.feature_bank.empty()) throw std::invalid_argument("build_query_batch: empty feature bank");
    n_track_rows += static_cast<int>(t.feature_bank.size());
  }
  const int total = n_track_rows + static_cast<int>(detection_anchors.size());

  QueryBatch batch;
  batch.content.resize(total, d);
  batch.num_tracking_rows = n_track_rows;
  int row = 0;
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    const auto& t = tracks[ti];
    for (std::size_t slot = 0; slot < t.feature_bank.size(); ++slot) {
      const auto& entry = t.feature_bank[slot];
      if (entry.feature.size() != d) throw std::invalid_argument("build_query_batch: feature dimension mismatch");
      batch.content.row(row) = entry.feature.transpose();
      batch.anchors.push_back(t.latest_anchor);
      batch.group_id.push_back(t.track_id);
      batch.is_latest.push_back(slot == 0);
      batch.age.push_back(frame_index - entry.frame_index);
      batch.track_index.push_back(static_cast<int>(ti));
      batch.bank_slot.push_back(static_cast<int>(slot));
      ++row;
    }
  }
  for (std::size_t j = 0; j < detection_anchors.size(); ++j) {
    batch.content.row(row) = detection_content.row(static_cast<Eigen::Index>(j));
    batch.anchors.push_back(detection_anchors[j]);
    batch.group_id.push_back(detection_group(static_cast<int>(j)));
    batch.is_latest.push_back(true);
    batch.age.push_back(0);
    ++row;
  }
  return batch;
}

TrackUpdate update_tracks(const std::vector<TrackRecord>& tracks, const std::vector<QueryOutput>& track_outputs,
                          const std::vector<QueryOutput>& new_detections, int frame_index, const Config& config,
                          IdCounter& ids) {
  if (tracks.size() != track_outputs.size()) throw std::invalid_argument("update_tracks: one output per track required");
  std::set<int> seen;
  for (const auto& t : tracks) {
    if (!seen.insert(t.track_id).second) {
      throw std::invalid_argument("update_tracks: duplicate track id " + std::to_string(t.track_id));
    }
  }

  TrackUpdate result;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    TrackRecord t = tracks[i];
    const auto& out = track_outputs[i];
    if (out.prediction.score >= config.sigma) {
      append_feature(t, out.feature, frame_index, config.n_max, config.feature_dim);
      t.latest_anchor = out.prediction.box;
      t.state = TrackState::kActive;
      t.lost_age = 0;
    } else {
      t.state = TrackState::kLost;
      t.lost_age += 1;
      if (t.lost_age > config.n_keep) {
        result.died.push_back(t.track_id);
        continue;
      }
    }
    result.tracks.push_back(std::move(t));
  }
  for (const auto& det : new_detections) {
    if (det.prediction.score < config.sigma) continue;
    TrackRecord t;
    t.track_id = ids.next();
    t.class_id = det.prediction.best_class();
    t.latest_anchor = det.prediction.box;
    append_feature(t, det.feature, frame_index, config.n_max, config.feature_dim);
    result.born.push_back(t.track_id);
    result.tracks.push_back(std::move(t));
  }
  return result;
}

}  // namespace histrack
