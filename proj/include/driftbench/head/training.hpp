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
#include <vector>

#include "driftbench/head/head_model.hpp"

namespace driftbench {

struct TrainConfig {
    std::size_t epochs = 50;
    double lr = 3e-5;
    // Linear warm-up over this fraction of all steps, then linear decay to zero.
    double warmup_fraction = 0.10;
    double weight_decay = 0.01;
    std::size_t batch_size = 32;
    // Weight matrix init is N(0, init_std^2); everything else starts at identity/zero.
    double init_std = 0.01;
    std::uint64_t seed = 0;
};

struct TrainResult {
    HeadParams params;
    SourceStats stats;
    std::vector<double> epoch_loss;
};

// Learning-rate multiplier at (0-based) step of total, warm-up then linear decay.
double warmup_linear_factor(std::size_t step, std::size_t total, std::size_t warmup);

HeadParams init_head(std::size_t dim, std::size_t classes, double init_std, std::uint64_t seed);

// Trains norm affine, weight and bias with AdamW on mini-batch cross-entropy,
// normalizing with statistics of the whole training set.
TrainResult train_source(const FeatureBatch& train, std::size_t classes, const TrainConfig& cfg);

}  // namespace driftbench
