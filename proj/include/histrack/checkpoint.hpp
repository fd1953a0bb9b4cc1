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

// Checkpoint archive: the Config plus a flat name -> array map of parameters.
// Values are stored as raw doubles and round trip bit-exactly.

#include <string>

#include "histrack/autodiff.hpp"
#include "histrack/types.hpp"

namespace histrack {

struct Checkpoint {
  Config config;
  ad::ParamStore params;
};

std::string serialize_checkpoint(const Config& config, const ad::ParamStore& params);
// Throws std::runtime_error on a malformed archive and ValidationError when
// the stored tensors do not fit the stored config.
Checkpoint deserialize_checkpoint(const std::string& data);

void save_checkpoint(const std::string& path, const Config& config, const ad::ParamStore& params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace histrack
