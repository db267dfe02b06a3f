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

#include "driftbench/adapt/prediction.hpp"
#include "driftbench/head/optimizer.hpp"

namespace driftbench {

struct EmConfig {
    double lr = 1e-5;
    std::size_t steps_per_batch = 1;
    // Entropy threshold E0 in nats; samples with H >= E0 leave the loss.
    // Unset disables filtering. Use default_filter_threshold() for 0.4 ln C.
    std::optional<double> filter_threshold;
    // Reweight surviving samples by exp(E0 - H).
    bool filter_weighting = false;
    std::optional<double> sharpness_rho;
    ParamSet params_to_update = ParamSet::norm_affine();

    void validate(std::size_t classes) const;
};

double default_filter_threshold(std::size_t classes);

struct EmState {
    HeadParams params;
    OptState opt;
    std::uint64_t batches = 0;

    static EmState create(const HeadParams& source, const EmConfig& cfg);
};

// w_j = exp(E0 - H(p_j)) when H(p_j) < E0, otherwise 0.
Vec eata_filter(const Matrix& probs, double threshold);

// Per-sample loss weights implied by the config for the given predictions;
// empty when filtering is off.
Vec em_sample_weights(const Matrix& probs, const EmConfig& cfg);

// steps_per_batch AdamW steps on the (filtered) mean batch entropy in
// batch-stats mode, then predictions from the updated parameters.
Prediction tent_adapt_batch(EmState& state, const EmConfig& cfg, const SourceStats& stats,
                            const UnlabeledBatch& batch);

// One sharpness-aware step: ascend by rho * g / |g| over the adapted groups,
// take the gradient there, descend from the original point.
Prediction sam_adapt_batch(EmState& state, const EmConfig& cfg, const SourceStats& stats,
                           const UnlabeledBatch& batch, double rho);

}  // namespace driftbench
