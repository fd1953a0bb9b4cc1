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

#include "histrack/trackfile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace histrack {

BoundingBox TrackRow::normalized(int image_width, int image_height) const {
  return {(x + w / 2) / image_width, (y + h / 2) / image_height, w / image_width, h / image_height};
}

TrackRow TrackRow::from_normalized(int frame_index, int track_id, const BoundingBox& box, int image_width,
                                   int image_height, double score, int class_id) {
  TrackRow r;
  r.frame_index = frame_index;
  r.track_id = track_id;
  r.w = box.w * image_width;
  r.h = box.h * image_height;
  r.x = box.cx * image_width - r.w / 2;
  r.y = box.cy * image_height - r.h / 2;
  r.score = score;
  r.class_id = class_id;
  return r;
}

void TrackFile::normalize_order() {
  std::stable_sort(rows.begin(), rows.end(), [](const TrackRow& a, const TrackRow& b) {
    return std::tie(a.frame_index, a.track_id) < std::tie(b.frame_index, b.track_id);
  });
  if (has_duplicates()) throw std::invalid_argument("track file has duplicate (frame, id) rows");
}

bool TrackFile::has_duplicates() const {
  std::set<std::pair<int, int>> seen;
  for (const auto& r : rows) {
    if (!seen.emplace(r.frame_index, r.track_id).second) return true;
  }
  return false;
}

void write_trackfile(std::ostream& out, const TrackFile& file) {
  out << std::fixed << std::setprecision(2);
  for (const auto& r : file.rows) {
    out << r.frame_index + 1 << ',' << r.track_id << ',' << r.x << ',' << r.y << ',' << r.w << ',' << r.h << ','
        << r.score << ',' << r.class_id << ",-1\n";
  }
}

std::string format_trackfile(const TrackFile& file) {
  std::ostringstream out;
  write_trackfile(out, file);
  return out.str();
}

namespace {

double parse_number(const std::string& field, const std::string& where) {
  std::size_t a = field.find_first_not_of(" \t\r");
  std::size_t b = field.find_last_not_of(" \t\r");
  if (a == std::string::npos) throw std::runtime_error(where + ": empty field");
  const std::string t = field.substr(a, b - a + 1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw std::runtime_error(where + ": cannot parse '" + t + "'");
  }
  return v;
}

}  // namespace

TrackFile read_trackfile(std::istream& in, const std::string& source, bool drop_zero_confidence) {
  TrackFile file;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() < 6) throw std::runtime_error(where + ": expected at least 6 fields, got " + std::to_string(fields.size()));
    TrackRow r;
    const double frame = parse_number(fields[0], where);
    const double id = parse_number(fields[1], where);
    if (frame < 1 || frame != std::floor(frame)) throw std::runtime_error(where + ": frame must be a positive integer");
    if (id != std::floor(id)) throw std::runtime_error(where + ": id must be an integer");
    r.frame_index = static_cast<int>(frame) - 1;
    r.track_id = static_cast<int>(id);
    r.x = parse_number(fields[2], where);
    r.y = parse_number(fields[3], where);
    r.w = parse_number(fields[4], where);
    r.h = parse_number(fields[5], where);
    if (r.w <= 0 || r.h <= 0) throw std::runtime_error(where + ": box width and height must be positive");
    if (fields.size() > 6) r.score = parse_number(fields[6], where);
    if (fields.size() > 7) {
      const double c = parse_number(fields[7], where);
      r.class_id = c > 0 ? static_cast<int>(c) : 1;
    }
    if (fields.size() > 8) r.visibility = parse_number(fields[8], where);
    if (drop_zero_confidence && fields.size() > 6 && r.score == 0) continue;
    file.rows.push_back(r);
  }
  return file;
}

TrackFile load_trackfile(const std::string& path, bool drop_zero_confidence) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_trackfile(in, path, drop_zero_confidence);
}

void save_trackfile(const std::string& path, const TrackFile& file) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_trackfile(out, file);
}

}  // namespace histrack
