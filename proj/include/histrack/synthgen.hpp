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

// Synthetic moving-shape videos with ground truth, frame-rate downsampling,
// dataset archives and MOTChallenge ingestion.

#include <cstdint>
#include <string>
#include <vector>

#include "histrack/types.hpp"

namespace histrack {

struct SceneSpec {
  int width = 64;
  int height = 64;
  int min_objects = 1;
  int max_objects = 6;
  double min_speed = 1.0;  // px / frame
  double max_speed = 5.0;
  double turn_prob = 0.1;  // chance per frame of a new heading
  int min_size = 8;
  int max_size = 16;
  double color_jitter = 10.0;  // per-frame intensity noise, 0-255 scale
  double size_jitter = 0.05;   // per-frame relative size noise
  double background_noise = 4.0;
  double late_entry_prob = 0.2;
  double early_exit_prob = 0.2;
  int occluders = 0;
  int occluder_size = 12;
  double min_visibility = 0.25;  // fraction of visible pixels for visible = true
  int length = 60;
  std::uint64_t seed = 0;

  void validate() const;  // throws ValidationError
};

struct VideoItem {
  std::string name;
  int native_width = 0;  // pixel frame of TrackFile coordinates
  int native_height = 0;
  std::vector<Image> frames;
  std::vector<FrameAnnotations> annotations;
  std::vector<int> source_frames;  // original index of each kept frame

  int length() const { return static_cast<int>(frames.size()); }
  bool operator==(const VideoItem&) const;
};

struct Dataset {
  std::string split;
  std::vector<VideoItem> videos;
};

VideoItem generate(const SceneSpec& spec);
// Items use seeds split deterministically from `seed`.
Dataset generate_dataset(const SceneSpec& spec, int count, std::uint64_t seed, const std::string& split);

// Keeps frames 0, n, 2n, ... and renumbers them. Throws ValidationError for n < 1.
VideoItem downsample(const VideoItem& item, int n);

// Directory with img1/ frames and gt/gt.txt (seqinfo.ini optional). Frames are
// resized to width x height; boxes are normalized against the native size.
VideoItem load_motchallenge(const std::string& dir, int width, int height);

std::string serialize_dataset(const Dataset& dataset);
Dataset deserialize_dataset(const std::string& data);
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);
std::uint64_t fingerprint(const Dataset& dataset);

// Visible ground truth only.
FrameAnnotations visible_entries(const FrameAnnotations& frame);

}  // namespace histrack
