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
#include <span>

#include "driftbench/numkit/matrix.hpp"

namespace driftbench {

struct Scores {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

// Confusion counts, rows = truth, cols = prediction.
Matrix confusion_matrix(std::span<const int> preds, std::span<const int> truth, std::size_t classes);

// Macro-F1 averages all `classes` per-class F1 scores, including classes absent
// from both vectors; a class with P + R = 0 scores 0.
Scores score(std::span<const int> preds, std::span<const int> truth, std::size_t classes);

}  // namespace driftbench
