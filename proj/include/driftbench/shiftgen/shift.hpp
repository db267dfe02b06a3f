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
#include <string_view>

#include "driftbench/shiftgen/dataset.hpp"

namespace driftbench {

enum class ShiftKind { kGroupOffset, kStyle, kCorpusAffine };

std::string_view shift_kind_name(ShiftKind kind);
ShiftKind parse_shift_kind(std::string_view name);

inline constexpr int kMaxSeverity = 5;

// Severity s in 0..5 scales every effect by s/5 unless a table says otherwise;
// severity 0 is the identity.
struct ShiftSpec {
    ShiftKind kind = ShiftKind::kCorpusAffine;
    int severity = 0;
    // group-offset: per-dimension std of each group's extra offset at severity 5.
    double offset_scale = 1.0;
    // style: within-class spread is multiplied by 1 + (s/5) * covariance_scale.
    double covariance_scale = 1.0;
    // style: class means move toward the global mean by (s/5) * contraction.
    double contraction = 0.5;
    // corpus-affine: z -> (I + eps G) z + b with G_ij ~ N(0, 1) and eps from
    // {0, .05, .1, .2, .35, .5} by severity unless overridden.
    std::optional<double> affine_eps;
    // corpus-affine: |b| at severity 5 along a random unit direction, unless b is given.
    double bias_norm = 2.0;
    std::optional<Vec> affine_bias;

    void validate() const;
};

double corpus_affine_eps(int severity);

// Labels, groups and ids pass through unchanged. Deterministic in seed; the
// random directions do not depend on severity, so effects grow monotonically.
Dataset apply_shift(const Dataset& data, const ShiftSpec& shift, std::uint64_t seed);

}  // namespace driftbench
