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

#include <cstddef>
#include <cstdint>
#include <optional>

#include "driftbench/shiftgen/dataset.hpp"

namespace driftbench {

// Gaussian class clusters around means on a sphere, with a random offset per
// group (speaker/session analog).
struct WorldSpec {
    std::size_t dim = 64;
    std::size_t classes = 4;
    double radius = 3.0;
    double within_std = 1.0;
    std::size_t groups = 10;
    double group_offset_std = 0.3;
    std::size_t per_class_per_group = 150;
    // Structure seed: class means.
    std::uint64_t seed = 0;
    // Sample seed: group offsets and noise. Defaults to `seed`.
    std::optional<std::uint64_t> sample_seed;

    void validate() const;
};

struct World {
    WorldSpec spec;
    Matrix class_means;   // classes x dim
    Matrix group_offsets; // groups x dim
    Dataset data;         // rows ordered by group, then class
};

World gen_world(const WorldSpec& spec);

}  // namespace driftbench
