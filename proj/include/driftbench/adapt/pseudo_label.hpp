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

#include <cstdint>
#include <optional>

#include "driftbench/adapt/prediction.hpp"
#include "driftbench/head/optimizer.hpp"
#include "driftbench/numkit/rng.hpp"

namespace driftbench {

struct PlConfig {
    double lr = 1e-5;
    // Anchor momentum: theta_a <- gamma * theta_a + (1 - gamma) * theta_m.
    double gamma = 0.999;
    // Soft targets use the anchor distribution; hard targets its argmax one-hot.
    bool soft_targets = false;
    std::optional<double> restore_rate;
    bool predict_from_anchor = true;
    NormMode norm_mode = NormMode::kSourceStats;
    ParamSet params_to_update = ParamSet::norm_affine();
    std::uint64_t seed = 0;

    void validate() const;
};

struct PlState {
    HeadParams main;
    HeadParams anchor;
    HeadParams source;
    OptState opt;
    Rng rng;
    std::uint64_t batches = 0;

    static PlState create(const HeadParams& source, const PlConfig& cfg);
};

// theta_a <- gamma * theta_a + (1 - gamma) * theta_m for every tensor.
HeadParams ema_update(const HeadParams& anchor, const HeadParams& main, double gamma);

// Resets each scalar to its source value independently with probability rate.
HeadParams stochastic_restore(const HeadParams& params, const HeadParams& source, double rate,
                              Rng& rng);

// Teacher pseudo-labels, one optimizer step of the student on the
// cross-entropy against them, EMA of the teacher, optional restore.
// Predictions are the teacher's (or student's) outputs computed before the update.
Prediction pl_adapt_batch(PlState& state, const PlConfig& cfg, const SourceStats& stats,
                          const UnlabeledBatch& batch);

}  // namespace driftbench
