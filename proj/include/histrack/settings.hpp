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

// Run settings read from an INI document with sections [model], [tracking],
// [loss], [train], [scene] and [data]. Keys not listed in `to_pairs()` are
// rejected.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "histrack/synthgen.hpp"
#include "histrack/types.hpp"

namespace histrack {

struct Settings {
  Config config;
  SceneSpec scene;
  int train_videos = 200;
  int val_videos = 20;
  std::uint64_t data_seed = 1;

  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  void set(const std::string& key, const std::string& value);
  void validate() const;
};

// Throws ValidationError on unknown keys or bad values.
Settings parse_settings(const std::string& text);
Settings load_settings(const std::string& path);
std::string format_settings(const Settings& settings);

}  // namespace histrack
