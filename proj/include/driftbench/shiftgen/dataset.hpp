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
#include <span>
#include <vector>

#include "driftbench/head/head_model.hpp"
#include "driftbench/numkit/matrix.hpp"

namespace driftbench {

inline constexpr int kUnlabeled = -1;

// Embedding records with per-row id, group and label (kUnlabeled = -1).
struct Dataset {
    Matrix embeddings;
    std::vector<int> labels;
    std::vector<int> groups;
    std::vector<std::uint64_t> ids;

    std::size_t size() const noexcept { return embeddings.rows(); }
    std::size_t dim() const noexcept { return embeddings.cols(); }
    bool fully_labeled() const noexcept;

    // Throws DataError on ragged columns or labels outside [-1, classes).
    void validate(std::size_t classes) const;
    Dataset subset(std::span<const std::size_t> rows) const;
    // Labels and groups attach only when every row is labeled.
    FeatureBatch to_batch() const;

    bool operator==(const Dataset&) const = default;
};

}  // namespace driftbench
