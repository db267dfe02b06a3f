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

#include "driftbench/harness/metrics.hpp"

#include <string>

#include "driftbench/errors.hpp"

namespace driftbench {

Matrix confusion_matrix(std::span<const int> preds, std::span<const int> truth, std::size_t classes) {
    if (preds.size() != truth.size()) throw DataError("score: prediction/truth length mismatch");
    if (preds.empty()) throw DataError("score: empty label vectors");
    Matrix cm(classes, classes, 0.0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int p = preds[i];
        const int t = truth[i];
        if (p < 0 || t < 0 || static_cast<std::size_t>(p) >= classes || static_cast<std::size_t>(t) >= classes) {
            throw DataError("score: label out of range at position " + std::to_string(i));
        }
        cm(static_cast<std::size_t>(t), static_cast<std::size_t>(p)) += 1.0;
    }
    return cm;
}

Scores score(std::span<const int> preds, std::span<const int> truth, std::size_t classes) {
    const Matrix cm = confusion_matrix(preds, truth, classes);
    Scores s;
    double correct = 0.0;
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        const double tp = cm(c, c);
        double predicted = 0.0;
        double actual = 0.0;
        for (std::size_t k = 0; k < classes; ++k) {
            predicted += cm(k, c);
            actual += cm(c, k);
        }
        correct += tp;
        const double precision = predicted > 0.0 ? tp / predicted : 0.0;
        const double recall = actual > 0.0 ? tp / actual : 0.0;
        if (precision + recall > 0.0) f1_sum += 2.0 * precision * recall / (precision + recall);
    }
    s.accuracy = correct / static_cast<double>(preds.size());
    s.macro_f1 = f1_sum / static_cast<double>(classes);
    return s;
}

}  // namespace driftbench
