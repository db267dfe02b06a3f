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
#include <vector>

#include "driftbench/adapt/prediction.hpp"
#include "driftbench/numkit/cmaes.hpp"

namespace driftbench {

struct FoaConfig {
    std::size_t generations_per_batch = 5;
    double sigma0 = 0.5;
    // 0 selects the CMA-ES default 4 + floor(3 ln d).
    std::size_t population = 0;
    std::uint64_t seed = 0;
};

struct FoaTerms {
    double entropy = 0.0;    // mean prediction entropy under the prompt
    double mean_gap = 0.0;   // |mean(z + prompt) - source mean|_2
    double std_gap = 0.0;    // |std(z + prompt) - source std|_2
    double total() const { return entropy + mean_gap + std_gap; }
};

// Fitness of one prompt on one batch, source-stats normalization.
FoaTerms foa_fitness(const HeadParams& params, const SourceStats& stats, const Matrix& embeddings,
                     std::span<const double> prompt);

struct FoaState {
    Vec prompt;
    std::optional<Cmaes> search;
    // Per batch: fitness of the incumbent prompt, then best-so-far after each generation.
    std::vector<std::vector<double>> history;

    static FoaState create(std::size_t dim);
};

// Runs generations_per_batch CMA-ES generations on this batch's fitness,
// adopts the best prompt seen (the incumbent included) and predicts with it.
// The search distribution carries over to the next batch.
Prediction foa_adapt_batch(FoaState& state, const HeadParams& params, const SourceStats& stats,
                           const UnlabeledBatch& batch, const FoaConfig& cfg);

}  // namespace driftbench
