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
#include <utility>
#include <vector>

#include "driftbench/adapt/prediction.hpp"

namespace driftbench {

struct T3aConfig {
    std::size_t support_size = 20;
};

// Per-class support lists of (embedding, entropy). Each list keeps the
// support_size lowest-entropy entries; among equal entropies the earlier entry stays.
class SupportSet {
public:
    struct Entry {
        Vec embedding;
        double entropy = 0.0;
    };

    SupportSet(std::size_t classes, std::size_t dim, std::size_t capacity);

    // One entry per class: the classifier's weight row, keyed by the entropy
    // of the head's own prediction on it.
    static SupportSet from_classifier(const HeadParams& params, std::size_t capacity);

    // Appends each row to the list of its argmax class, then truncates.
    void update(const Matrix& embeddings, const Matrix& probs);
    void add(std::size_t cls, Vec embedding, double entropy);

    // classes x dim matrix of per-class means. Throws DataError if a class is empty.
    Matrix prototypes() const;

    std::size_t classes() const noexcept { return lists_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t capacity() const noexcept { return capacity_; }
    const std::vector<Entry>& entries(std::size_t cls) const { return lists_.at(cls); }

private:
    void truncate(std::size_t cls);

    std::size_t dim_;
    std::size_t capacity_;
    std::vector<std::vector<Entry>> lists_;
};

// probs = softmax(z . mu_c); labels by argmax, ties to the lowest class.
Prediction t3a_classify(const SupportSet& support, const Matrix& embeddings);

}  // namespace driftbench
