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

#include "histrack/settings.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace histrack {

namespace {

template <typename T>
T parse_as(const std::string& key, const std::string& s) {
  std::istringstream in(s);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) throw ValidationError("settings: bad value for " + key + ": '" + s + "'");
  return v;
}

template <typename T>
std::string show(const T& v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

struct Slot {
  std::function<std::string(const Settings&)> get;
  std::function<void(Settings&, const std::string&)> set;
};

template <typename T>
Slot scene_slot(T SceneSpec::*m, const std::string& key) {
  return {[m](const Settings& s) { return show(s.scene.*m); },
          [m, key](Settings& s, const std::string& v) { s.scene.*m = parse_as<T>(key, v); }};
}

template <typename T>
Slot data_slot(T Settings::*m, const std::string& key) {
  return {[m](const Settings& s) { return show(s.*m); },
          [m, key](Settings& s, const std::string& v) { s.*m = parse_as<T>(key, v); }};
}

const std::vector<std::pair<std::string, Slot>>& extra_slots() {
  static const std::vector<std::pair<std::string, Slot>> table = [] {
    std::vector<std::pair<std::string, Slot>> t;
#define HT_SCENE(name) t.emplace_back("scene." #name, scene_slot(&SceneSpec::name, "scene." #name))
    HT_SCENE(width);
    HT_SCENE(height);
    HT_SCENE(min_objects);
    HT_SCENE(max_objects);
    HT_SCENE(min_speed);
    HT_SCENE(max_speed);
    HT_SCENE(turn_prob);
    HT_SCENE(min_size);
    HT_SCENE(max_size);
    HT_SCENE(color_jitter);
    HT_SCENE(size_jitter);
    HT_SCENE(background_noise);
    HT_SCENE(late_entry_prob);
    HT_SCENE(early_exit_prob);
    HT_SCENE(occluders);
    HT_SCENE(occluder_size);
    HT_SCENE(min_visibility);
    HT_SCENE(length);
#undef HT_SCENE
    t.emplace_back("data.train_videos", data_slot(&Settings::train_videos, "data.train_videos"));
    t.emplace_back("data.val_videos", data_slot(&Settings::val_videos, "data.val_videos"));
    t.emplace_back("data.seed", data_slot(&Settings::data_seed, "data.seed"));
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> Settings::to_pairs() const {
  auto out = config.to_pairs();
  for (const auto& [k, slot] : extra_slots()) out.emplace_back(k, slot.get(*this));
  return out;
}

void Settings::set(const std::string& key, const std::string& value) {
  for (const auto& [k, slot] : extra_slots()) {
    if (k == key) {
      slot.set(*this, value);
      return;
    }
  }
  config.set(key, value);
}

void Settings::validate() const {
  config.validate();
  scene.validate();
  if (train_videos < 0 || val_videos < 0) throw ValidationError("settings: video counts must be >= 0");
  if (scene.width != config.image_width || scene.height != config.image_height) {
    throw ValidationError("settings: scene size " + std::to_string(scene.width) + "x" + std::to_string(scene.height) +
                          " differs from model image size " + std::to_string(config.image_width) + "x" +
                          std::to_string(config.image_height));
  }
}

Settings parse_settings(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError("settings: " + std::string(e.what()));
  }
  Settings s;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ValidationError("settings: key '" + section + "' must sit inside a section");
    for (const auto& [key, value] : body) s.set(section + "." + key, value.data());
  }
  s.validate();
  return s;
}

Settings load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("settings: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_settings(ss.str());
}

std::string format_settings(const Settings& settings) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : settings.to_pairs()) {
    const std::string sec = key.substr(0, key.find('.'));
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(key.find('.') + 1) << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace histrack
