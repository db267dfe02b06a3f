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

#include <array>
#include <cstdint>

namespace driftbench {

// xoshiro256** seeded through SplitMix64.
//
// Seeding: the four state words are consecutive SplitMix64 outputs
// (increment 0x9E3779B97F4A7C15, mix multipliers 0xBF58476D1CE4E5B9 and
// 0x94D049BB133111EB). Integer and uniform draws are bit-reproducible on every
// platform; normal() goes through libm (log, sqrt, cos) and is reproducible
// wherever those are correctly rounded.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64() noexcept;
    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n) noexcept;
    double normal() noexcept;
    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
    bool bernoulli(double p) noexcept { return uniform() < p; }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t draws() const noexcept { return counter_; }

    // Independent seed for a named sub-stream, stable across runs.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 4> s_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace driftbench
