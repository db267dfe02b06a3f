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

#include <optional>
#include <string>
#include <vector>

#include "driftbench/head/head_model.hpp"
#include "driftbench/numkit/matrix.hpp"

namespace driftbench {

// The frozen source model an adapter starts from.
struct SourceModel {
    HeadParams params;
    SourceStats stats;
};

// What an adapter hands back for one batch.
struct Prediction {
    std::vector<int> labels;
    Matrix probs;
    // Adaptation loss (or FOA fitness) where the method defines one.
    std::optional<double> loss;
    bool incident = false;
    std::string incident_detail;
    // Non-fatal note, e.g. an iterative solver that hit its iteration cap.
    std::string warning;
};

// argmax labels (lowest index on ties) of each probability row.
std::vector<int> argmax_labels(const Matrix& probs);

Prediction prediction_from_probs(Matrix probs);

}  // namespace driftbench
