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

// MOTChallenge text exchange format:
//   frame,id,x,y,w,h,score,class,-1
// with 1-based frames, pixel top-left corners, two decimals.

#include <iosfwd>
#include <string>
#include <vector>

#include "histrack/types.hpp"

namespace histrack {

struct TrackRow {
  int frame_index = 0;  // 0-based
  int track_id = 0;
  double x = 0;  // pixel top-left corner
  double y = 0;
  double w = 0;
  double h = 0;
  double score = 1.0;
  int class_id = 1;
  double visibility = -1.0;  // -1 when absent from the source line

  BoundingBox normalized(int image_width, int image_height) const;
  static TrackRow from_normalized(int frame_index, int track_id, const BoundingBox& box, int image_width,
                                  int image_height, double score, int class_id);
};

struct TrackFile {
  std::vector<TrackRow> rows;

  // Sorted by (frame, id); throws std::invalid_argument on duplicates.
  void normalize_order();
  bool has_duplicates() const;
};

void write_trackfile(std::ostream& out, const TrackFile& file);
std::string format_trackfile(const TrackFile& file);
// Throws std::runtime_error naming `source` and the 1-based line number for
// unparsable rows or non-positive sizes. Rows with a zero confidence flag are
// dropped when `drop_zero_confidence` is set (MOTChallenge ground truth).
TrackFile read_trackfile(std::istream& in, const std::string& source, bool drop_zero_confidence = false);
TrackFile load_trackfile(const std::string& path, bool drop_zero_confidence = false);
void save_trackfile(const std::string& path, const TrackFile& file);

}  // namespace histrack
