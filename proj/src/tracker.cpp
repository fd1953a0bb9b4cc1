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

#include "histrack/tracker.hpp"

#include <algorithm>
#include <stdexcept>

#include "histrack/model.hpp"

namespace histrack {

std::vector<TrackOutput> step(TrackerState& state, const Image& image, int frame_index, StepStats* stats) {
  const Config& c = *state.config;
  if (frame_index <= state.last_frame) {
    throw std::invalid_argument("step: frame " + std::to_string(frame_index) + " does not follow frame " +
                                std::to_string(state.last_frame));
  }
  ad::Tape tape;
  ad::Binder binder(tape, *state.params, false);
  const FrameFeatures frame = encode_frame(binder, c, image);
  const QueryBatch batch =
      build_query_batch(state.tracks, frame.proposal_content.value(), frame.anchor_boxes(), frame_index);
  const std::vector<LayerOutput> layers = forward_frame(binder, c, batch, frame);
  const LayerOutput& last = layers.back();

  // Only the newest query of each track is read out; the other rows of the
  // track are dropped here.
  std::vector<QueryOutput> track_outputs;
  for (int row : batch.latest_rows()) track_outputs.push_back({last.prediction(row), last.feature(row)});
  std::vector<QueryOutput> detections;
  for (int row = batch.num_tracking_rows; row < batch.size(); ++row) {
    detections.push_back({last.prediction(row), last.feature(row)});
  }

  if (stats != nullptr) {
    *stats = {};
    for (const auto& t : state.tracks) {
      const auto rows = std::count(batch.group_id.begin(), batch.group_id.begin() + batch.num_tracking_rows, t.track_id);
      stats->rows_per_track.emplace_back(t.track_id, static_cast<int>(rows));
      stats->bank_sizes.emplace_back(t.track_id, static_cast<int>(t.feature_bank.size()));
    }
    stats->detection_rows = batch.num_detection_rows();
  }

  TrackUpdate update = update_tracks(state.tracks, track_outputs, detections, frame_index, c, state.ids);
  state.tracks = std::move(update.tracks);
  state.last_frame = frame_index;
  if (stats != nullptr) {
    stats->born = update.born;
    stats->died = update.died;
  }

  std::vector<TrackOutput> out;
  for (const auto& t : state.tracks) {
    if (t.state != TrackState::kActive) continue;
    // Confirmed this frame: the anchor holds this frame's box.
    const auto it = std::find_if(batch.group_id.begin(), batch.group_id.begin() + batch.num_tracking_rows,
                                 [&](int g) { return g == t.track_id; });
    double score = 0;
    if (it != batch.group_id.begin() + batch.num_tracking_rows) {
      score = last.prediction(static_cast<int>(it - batch.group_id.begin())).score;
    } else {
      const auto pos = std::find(update.born.begin(), update.born.end(), t.track_id) - update.born.begin();
      int k = 0;
      for (const auto& d : detections) {
        if (d.prediction.score < c.sigma) continue;
        if (k++ == pos) {
          score = d.prediction.score;
          break;
        }
      }
    }
    out.push_back({t.track_id, t.class_id, t.latest_anchor, score});
  }
  std::sort(out.begin(), out.end(), [](const TrackOutput& a, const TrackOutput& b) { return a.track_id < b.track_id; });
  return out;
}

TrackFile run(const VideoItem& video, const ad::ParamStore& params, const Config& config,
              std::vector<StepStats>* stats) {
  if (video.length() == 0) throw std::invalid_argument("run: empty video");
  TrackerState state(config, params);
  TrackFile file;
  if (stats != nullptr) stats->clear();
  for (int t = 0; t < video.length(); ++t) {
    StepStats s;
    for (const auto& o : step(state, video.frames[static_cast<std::size_t>(t)], t, &s)) {
      TrackRow row = TrackRow::from_normalized(t, o.track_id, o.box, video.native_width, video.native_height, o.score,
                                               o.class_id);
      row.w = std::max(row.w, 0.01);
      row.h = std::max(row.h, 0.01);
      file.rows.push_back(row);
    }
    if (stats != nullptr) stats->push_back(std::move(s));
  }
  return file;
}

}  // namespace histrack
