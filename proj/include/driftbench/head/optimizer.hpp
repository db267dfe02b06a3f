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

#include "driftbench/head/head_model.hpp"

namespace driftbench {

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

// Decoupled-weight-decay Adam. Moments mirror the parameter layout; only the
// groups in `params` are ever updated, and decay touches weight/bias only.
struct OptState {
    AdamWConfig config;
    ParamSet params;
    HeadGrads first_moment;
    HeadGrads second_moment;
    std::uint64_t step = 0;

    static OptState create(const HeadParams& like, const AdamWConfig& config, ParamSet params);
};

// Throws NumericError, leaving params and state untouched, when any selected
// gradient is non-finite.
void optimizer_step(HeadParams& params, const HeadGrads& grads, OptState& opt);

}  // namespace driftbench
