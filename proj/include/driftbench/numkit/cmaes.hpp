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
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "driftbench/numkit/matrix.hpp"
#include "driftbench/numkit/rng.hpp"

namespace driftbench {

struct CmaesConfig {
    std::size_t dimension = 0;
    // 0 selects the default 4 + floor(3 ln n).
    std::size_t population = 0;
    double sigma0 = 0.5;
    std::size_t max_evaluations = 1000;
    std::uint64_t seed = 0;

    std::size_t resolved_population() const;
    void validate() const;
};

std::size_t default_population(std::size_t dimension);

// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and rank-one
// plus rank-mu covariance updates. No restarts.
//
// Ask/tell interface so callers can hold the search distribution across
// several objective functions (FOA re-targets it every batch).
class Cmaes {
public:
    Cmaes(const CmaesConfig& config, std::span<const double> x0);
    ~Cmaes();
    Cmaes(const Cmaes&);
    Cmaes& operator=(const Cmaes&);
    Cmaes(Cmaes&&) noexcept;
    Cmaes& operator=(Cmaes&&) noexcept;

    // Samples one generation of population() candidates.
    std::vector<Vec> ask();
    // Ranks the candidates from the last ask(). Non-finite fitness counts as +inf;
    // throws NumericError when the whole generation is non-finite.
    void tell(const std::vector<Vec>& candidates, std::span<const double> fitness);

    std::size_t dimension() const noexcept;
    std::size_t population() const noexcept;
    const Vec& mean() const noexcept;
    double sigma() const noexcept;
    std::size_t generation() const noexcept;

private:
    struct State;
    std::unique_ptr<State> state_;
};

struct CmaesResult {
    Vec best_x;
    double best_fitness = 0.0;
    std::size_t evaluations = 0;
    // Best-so-far fitness after each generation.
    std::vector<double> history;
};

using Fitness = std::function<double(std::span<const double>)>;

// Runs whole generations while the evaluation budget allows one more.
// Requires max_evaluations >= population.
CmaesResult cmaes_minimize(const Fitness& fitness, std::span<const double> x0,
                           CmaesConfig config);

}  // namespace driftbench
