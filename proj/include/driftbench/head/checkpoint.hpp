// Copyright 2026 the driftbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>

#include <json.hpp>

#include "driftbench/head/head_model.hpp"

namespace driftbench {

// Binary checkpoint, all little-endian:
//   "TTAH" | version u32 | d u32 | C u32
//   norm_scale[d] norm_shift[d] weight[C*d] bias[C] prompt[d]     (f64)
//   feat_mean[d] feat_std[d] norm_running_mean[d] norm_running_var[d] (f64)
//   count u64
// A JSON sidecar at "<path>.json" carries the training configuration.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    HeadParams params;
    SourceStats stats;
    nlohmann::json train_config;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path checkpoint_sidecar(const std::filesystem::path& path);

}  // namespace driftbench
