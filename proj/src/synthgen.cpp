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

#include "histrack/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <array>
#include <cstring>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "histrack/binio.hpp"
#include "histrack/rng.hpp"
#include "histrack/trackfile.hpp"

namespace fs = std::filesystem;

namespace histrack {

void SceneSpec::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError("scene: " + m); };
  if (width < 8 || height < 8) fail("image must be at least 8x8");
  if (min_objects < 0 || max_objects < min_objects) fail("object count range is invalid");
  if (min_speed < 0 || max_speed < min_speed) fail("speed range is invalid");
  if (turn_prob < 0 || turn_prob > 1) fail("turn_prob must lie in [0,1]");
  if (min_size < 1 || max_size < min_size || max_size >= std::min(width, height)) fail("size range is invalid");
  if (color_jitter < 0 || size_jitter < 0 || size_jitter >= 0.5 || background_noise < 0) fail("jitter must be >= 0");
  if (late_entry_prob < 0 || late_entry_prob > 1 || early_exit_prob < 0 || early_exit_prob > 1)
    fail("entry/exit probabilities must lie in [0,1]");
  if (occluders < 0 || occluder_size < 1) fail("occluder params are invalid");
  if (length < 1) fail("length must be >= 1");
}

bool VideoItem::operator==(const VideoItem& o) const {
  if (name != o.name || native_width != o.native_width || native_height != o.native_height ||
      frames != o.frames || source_frames != o.source_frames || annotations.size() != o.annotations.size())
    return false;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    const auto& b = o.annotations[i];
    if (a.frame_index != b.frame_index || a.entries.size() != b.entries.size()) return false;
    for (std::size_t j = 0; j < a.entries.size(); ++j) {
      const auto& x = a.entries[j];
      const auto& y = b.entries[j];
      if (x.track_id != y.track_id || x.class_id != y.class_id || !(x.box == y.box) || x.visible != y.visible)
        return false;
    }
  }
  return true;
}

namespace {

struct SceneObject {
  int class_id = 1;
  double base_w = 0, base_h = 0;
  double x = 0, y = 0, vx = 0, vy = 0;
  double speed = 0;
  double color[3] = {0, 0, 0};
  int birth = 0;
  int death = 0;  // exclusive
};

void reflect(double& p, double& v, double lo, double hi) {
  if (hi <= lo) {
    p = (lo + hi) / 2;
    return;
  }
  while (p < lo || p > hi) {
    p = p < lo ? 2 * lo - p : 2 * hi - p;
    v = -v;
  }
}

bool covers(const SceneObject& o, double w, double h, double px, double py) {
  const double dx = px - o.x;
  const double dy = py - o.y;
  if (o.class_id == 1) return std::abs(dx) < w / 2 && std::abs(dy) < h / 2;
  const double ex = dx / (w / 2);
  const double ey = dy / (h / 2);
  return ex * ex + ey * ey <= 1.0;
}

void hsv_to_rgb(double hue, double sat, double value, double* rgb) {
  const double c = value * sat;
  const double h = hue / 60.0;
  const double x = c * (1 - std::abs(std::fmod(h, 2.0) - 1));
  const int sector = static_cast<int>(h) % 6;
  const double table[6][3] = {{c, x, 0}, {x, c, 0}, {0, c, x}, {0, x, c}, {x, 0, c}, {c, 0, x}};
  for (int i = 0; i < 3; ++i) rgb[i] = table[sector][i] + value - c;
}

std::uint8_t clamp_pixel(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

VideoItem generate(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int n_objects = rng.uniform_int(spec.min_objects, spec.max_objects);
  std::vector<SceneObject> objects(static_cast<std::size_t>(n_objects));
  for (auto& o : objects) {
    o.class_id = rng.uniform_int(1, 2);
    o.base_w = rng.uniform_int(spec.min_size, spec.max_size);
    o.base_h = rng.uniform_int(spec.min_size, spec.max_size);
    o.x = rng.uniform(o.base_w / 2, spec.width - o.base_w / 2);
    o.y = rng.uniform(o.base_h / 2, spec.height - o.base_h / 2);
    o.speed = rng.uniform(spec.min_speed, spec.max_speed);
    const double heading = rng.uniform(0, 2 * std::numbers::pi);
    o.vx = o.speed * std::cos(heading);
    o.vy = o.speed * std::sin(heading);
    // Each shape class draws its hue from its own half of the colour wheel.
    const double hue = rng.uniform(0, 180) + (o.class_id == 2 ? 180 : 0);
    hsv_to_rgb(hue, rng.uniform(0.5, 1.0), rng.uniform(150, 255), o.color);
    o.birth = rng.bernoulli(spec.late_entry_prob) ? rng.uniform_int(1, std::max(1, spec.length / 2)) : 0;
    o.death = spec.length;
    if (rng.bernoulli(spec.early_exit_prob)) {
      o.death = rng.uniform_int(std::min(spec.length, o.birth + std::max(1, spec.length / 4)), spec.length);
    }
  }
  struct Occluder {
    int x, y;
  };
  std::vector<Occluder> occluders;
  for (int i = 0; i < spec.occluders; ++i) {
    occluders.push_back({rng.uniform_int(0, spec.width - spec.occluder_size),
                         rng.uniform_int(0, spec.height - spec.occluder_size)});
  }

  VideoItem item;
  item.name = "synth-" + std::to_string(spec.seed);
  item.native_width = spec.width;
  item.native_height = spec.height;
  const int n_pix = spec.width * spec.height;
  for (int t = 0; t < spec.length; ++t) {
    std::vector<double> w(objects.size()), h(objects.size());
    std::vector<std::array<double, 3>> color(objects.size());
    for (std::size_t i = 0; i < objects.size(); ++i) {
      auto& o = objects[i];
      if (t > o.birth) {
        if (rng.bernoulli(spec.turn_prob)) {
          const double heading = rng.uniform(0, 2 * std::numbers::pi);
          o.vx = o.speed * std::cos(heading);
          o.vy = o.speed * std::sin(heading);
        }
        o.x += o.vx;
        o.y += o.vy;
        reflect(o.x, o.vx, o.base_w / 2, spec.width - o.base_w / 2);
        reflect(o.y, o.vy, o.base_h / 2, spec.height - o.base_h / 2);
      }
      const double sw = 1.0 + spec.size_jitter * std::clamp(rng.normal(), -2.0, 2.0);
      const double sh = 1.0 + spec.size_jitter * std::clamp(rng.normal(), -2.0, 2.0);
      w[i] = std::max(2.0, std::min(o.base_w * sw, 2 * std::min(o.x, spec.width - o.x)));
      h[i] = std::max(2.0, std::min(o.base_h * sh, 2 * std::min(o.y, spec.height - o.y)));
      for (int c = 0; c < 3; ++c) color[i][static_cast<std::size_t>(c)] = o.color[c] + spec.color_jitter * rng.normal();
    }

    Image frame(spec.height, spec.width, 3);
    for (int p = 0; p < n_pix * 3; ++p) {
      frame.pixels[static_cast<std::size_t>(p)] = clamp_pixel(40.0 + spec.background_noise * rng.normal());
    }
    std::vector<int> owner(static_cast<std::size_t>(n_pix), -1);
    std::vector<int> drawn(objects.size(), 0);
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto& o = objects[i];
      if (t < o.birth || t >= o.death) continue;
      const int x0 = std::max(0, static_cast<int>(std::floor(o.x - w[i] / 2)));
      const int x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(o.x + w[i] / 2)));
      const int y0 = std::max(0, static_cast<int>(std::floor(o.y - h[i] / 2)));
      const int y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(o.y + h[i] / 2)));
      for (int py = y0; py <= y1; ++py) {
        for (int px = x0; px <= x1; ++px) {
          if (!covers(o, w[i], h[i], px + 0.5, py + 0.5)) continue;
          ++drawn[i];
          owner[static_cast<std::size_t>(py * spec.width + px)] = static_cast<int>(i);
          for (int c = 0; c < 3; ++c) frame.at(py, px, c) = clamp_pixel(color[i][static_cast<std::size_t>(c)]);
        }
      }
    }
    for (const auto& oc : occluders) {
      for (int py = oc.y; py < oc.y + spec.occluder_size; ++py) {
        for (int px = oc.x; px < oc.x + spec.occluder_size; ++px) {
          owner[static_cast<std::size_t>(py * spec.width + px)] = -2;
          for (int c = 0; c < 3; ++c) frame.at(py, px, c) = 128;
        }
      }
    }
    std::vector<int> owned(objects.size(), 0);
    for (int o : owner) {
      if (o >= 0) ++owned[static_cast<std::size_t>(o)];
    }

    FrameAnnotations ann;
    ann.frame_index = t;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto& o = objects[i];
      if (t < o.birth || t >= o.death) continue;
      AnnotationEntry e;
      e.track_id = static_cast<int>(i) + 1;
      e.class_id = o.class_id;
      e.box = {o.x / spec.width, o.y / spec.height, w[i] / spec.width, h[i] / spec.height};
      e.visible = drawn[i] > 0 && owned[i] >= spec.min_visibility * drawn[i];
      ann.entries.push_back(e);
    }
    item.frames.push_back(std::move(frame));
    item.annotations.push_back(std::move(ann));
    item.source_frames.push_back(t);
  }
  return item;
}

Dataset generate_dataset(const SceneSpec& spec, int count, std::uint64_t seed, const std::string& split) {
  Dataset ds;
  ds.split = split;
  for (int i = 0; i < count; ++i) {
    SceneSpec s = spec;
    s.seed = Rng::split(seed, static_cast<std::uint64_t>(i));
    ds.videos.push_back(generate(s));
  }
  return ds;
}

VideoItem downsample(const VideoItem& item, int n) {
  if (n < 1) throw ValidationError("downsample: interval must be >= 1, got " + std::to_string(n));
  VideoItem out;
  out.name = item.name;
  out.native_width = item.native_width;
  out.native_height = item.native_height;
  for (int t = 0, k = 0; t < item.length(); t += n, ++k) {
    out.frames.push_back(item.frames[static_cast<std::size_t>(t)]);
    FrameAnnotations a = item.annotations[static_cast<std::size_t>(t)];
    a.frame_index = k;
    out.annotations.push_back(std::move(a));
    out.source_frames.push_back(item.source_frames[static_cast<std::size_t>(t)]);
  }
  return out;
}

FrameAnnotations visible_entries(const FrameAnnotations& frame) {
  FrameAnnotations out;
  out.frame_index = frame.frame_index;
  for (const auto& e : frame.entries) {
    if (e.visible) out.entries.push_back(e);
  }
  return out;
}

VideoItem load_motchallenge(const std::string& dir, int width, int height) {
  const fs::path root(dir);
  const fs::path img_dir = root / "img1";
  const fs::path gt_path = root / "gt" / "gt.txt";
  if (!fs::is_directory(img_dir)) throw IoError("missing frame directory " + img_dir.string());
  if (!fs::is_regular_file(gt_path)) throw IoError("missing ground truth " + gt_path.string());

  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(img_dir)) {
    const auto ext = entry.path().extension().string();
    if (ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".bmp") images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());
  if (images.empty()) throw IoError("no frames in " + img_dir.string());

  VideoItem item;
  item.name = root.filename().string();
  const fs::path seqinfo = root / "seqinfo.ini";
  if (fs::is_regular_file(seqinfo)) {
    boost::property_tree::ptree tree;
    boost::property_tree::ini_parser::read_ini(seqinfo.string(), tree);
    item.native_width = tree.get("Sequence.imWidth", 0);
    item.native_height = tree.get("Sequence.imHeight", 0);
    item.name = tree.get("Sequence.name", item.name);
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    cv::Mat bgr = cv::imread(images[i].string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw std::runtime_error("cannot decode " + images[i].string());
    if (item.native_width <= 0 || item.native_height <= 0) {
      item.native_width = bgr.cols;
      item.native_height = bgr.rows;
    }
    cv::Mat rgb, resized;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    cv::resize(rgb, resized, cv::Size(width, height), 0, 0, cv::INTER_AREA);
    Image frame(height, width, 3);
    for (int y = 0; y < height; ++y) {
      std::memcpy(&frame.pixels[static_cast<std::size_t>(y * width * 3)], resized.ptr<std::uint8_t>(y),
                  static_cast<std::size_t>(width * 3));
    }
    item.frames.push_back(std::move(frame));
    item.source_frames.push_back(static_cast<int>(i));
    FrameAnnotations a;
    a.frame_index = static_cast<int>(i);
    item.annotations.push_back(std::move(a));
  }

  const TrackFile gt = load_trackfile(gt_path.string(), /*drop_zero_confidence=*/true);
  for (const auto& r : gt.rows) {
    if (r.frame_index >= item.length()) {
      throw std::runtime_error(gt_path.string() + ": frame " + std::to_string(r.frame_index + 1) +
                               " has no image in img1/");
    }
    AnnotationEntry e;
    e.track_id = r.track_id;
    e.class_id = r.class_id;
    e.box = r.normalized(item.native_width, item.native_height);
    e.visible = r.visibility < 0 || r.visibility >= 0.25;
    auto& frame = item.annotations[static_cast<std::size_t>(r.frame_index)];
    if (frame.find(e.track_id) != nullptr) {
      throw std::runtime_error(gt_path.string() + ": duplicate id " + std::to_string(e.track_id) + " in frame " +
                               std::to_string(r.frame_index + 1));
    }
    frame.entries.push_back(e);
  }
  return item;
}

namespace {

constexpr std::uint32_t kDatasetMagic = 0x53445448;  // "HTDS"
constexpr std::uint32_t kDatasetVersion = 1;

}  // namespace

std::string serialize_dataset(const Dataset& dataset) {
  binio::Writer w;
  w.u32(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.str(dataset.split);
  w.u32(static_cast<std::uint32_t>(dataset.videos.size()));
  for (const auto& v : dataset.videos) {
    w.str(v.name);
    w.i32(v.native_width);
    w.i32(v.native_height);
    w.u32(static_cast<std::uint32_t>(v.frames.size()));
    for (std::size_t t = 0; t < v.frames.size(); ++t) {
      const auto& f = v.frames[t];
      w.i32(f.height);
      w.i32(f.width);
      w.i32(f.channels);
      w.bytes(f.pixels.data(), f.pixels.size());
      const auto& a = v.annotations[t];
      w.i32(a.frame_index);
      w.i32(v.source_frames[t]);
      w.u32(static_cast<std::uint32_t>(a.entries.size()));
      for (const auto& e : a.entries) {
        w.i32(e.track_id);
        w.i32(e.class_id);
        w.f64(e.box.cx);
        w.f64(e.box.cy);
        w.f64(e.box.w);
        w.f64(e.box.h);
        w.u8(e.visible ? 1 : 0);
      }
    }
  }
  return w.data();
}

Dataset deserialize_dataset(const std::string& data) {
  binio::Reader r(data);
  if (r.u32() != kDatasetMagic) throw std::runtime_error("not a dataset archive");
  if (r.u32() != kDatasetVersion) throw std::runtime_error("unsupported dataset archive version");
  Dataset ds;
  ds.split = r.str();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    VideoItem v;
    v.name = r.str();
    v.native_width = r.i32();
    v.native_height = r.i32();
    const std::uint32_t frames = r.u32();
    for (std::uint32_t t = 0; t < frames; ++t) {
      const int h = r.i32();
      const int wd = r.i32();
      const int c = r.i32();
      if (h <= 0 || wd <= 0 || c <= 0 || h > 1 << 14 || wd > 1 << 14 || c > 4) throw std::runtime_error("corrupt frame header");
      Image f(h, wd, c);
      r.bytes(f.pixels.data(), f.pixels.size());
      v.frames.push_back(std::move(f));
      FrameAnnotations a;
      a.frame_index = r.i32();
      v.source_frames.push_back(r.i32());
      const std::uint32_t entries = r.u32();
      for (std::uint32_t k = 0; k < entries; ++k) {
        AnnotationEntry e;
        e.track_id = r.i32();
        e.class_id = r.i32();
        e.box.cx = r.f64();
        e.box.cy = r.f64();
        e.box.w = r.f64();
        e.box.h = r.f64();
        e.visible = r.u8() != 0;
        a.entries.push_back(e);
      }
      v.annotations.push_back(std::move(a));
    }
    ds.videos.push_back(std::move(v));
  }
  if (!r.done()) throw std::runtime_error("trailing bytes in dataset archive");
  return ds;
}

void save_dataset(const std::string& path, const Dataset& dataset) { binio::write_file(path, serialize_dataset(dataset)); }

Dataset load_dataset(const std::string& path) { return deserialize_dataset(binio::read_file(path)); }

std::uint64_t fingerprint(const Dataset& dataset) { return binio::fnv1a(serialize_dataset(dataset)); }

}  // namespace histrack
