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

#include "driftbench/shiftgen/world.hpp"

#include <cmath>
#include <string>

#include "driftbench/errors.hpp"
#include "driftbench/numkit/rng.hpp"

namespace driftbench {

bool Dataset::fully_labeled() const noexcept {
    if (labels.size() != size()) return false;
    for (int y : labels) {
        if (y < 0) return false;
    }
    return true;
}

void Dataset::validate(std::size_t classes) const {
    const std::size_t n = size();
    if (labels.size() != n || groups.size() != n || ids.size() != n) {
        throw DataError("dataset: labels/groups/ids length does not match row count");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < kUnlabeled || (y >= 0 && static_cast<std::size_t>(y) >= classes)) {
            throw DataError("dataset: label " + std::to_string(y) + " of record " + std::to_string(ids[i]) +
                            " outside [0, " + std::to_string(classes) + ")");
        }
    }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.embeddings = embeddings.gather_rows(rows);
    out.labels.reserve(rows.size());
    out.groups.reserve(rows.size());
    out.ids.reserve(rows.size());
    for (std::size_t r : rows) {
        out.labels.push_back(labels[r]);
        out.groups.push_back(groups[r]);
        out.ids.push_back(ids[r]);
    }
    return out;
}

FeatureBatch Dataset::to_batch() const {
    FeatureBatch b;
    b.embeddings = embeddings;
    if (fully_labeled()) b.labels = labels;
    if (groups.size() == size()) b.group_ids = groups;
    return b;
}

void WorldSpec::validate() const {
    if (dim < 2) throw UsageError("world: dim must be >= 2");
    if (classes < 2) throw UsageError("world: classes must be >= 2");
    if (groups < 1) throw UsageError("world: groups must be >= 1");
    if (per_class_per_group < 1) throw UsageError("world: samples per class per group must be >= 1");
    if (!(radius >= 0.0) || !(within_std >= 0.0) || !(group_offset_std >= 0.0)) {
        throw UsageError("world: radius and standard deviations must be >= 0");
    }
}

World gen_world(const WorldSpec& spec) {
    spec.validate();
    World w;
    w.spec = spec;
    const std::size_t d = spec.dim;
    const std::uint64_t sample_seed = spec.sample_seed.value_or(spec.seed);

    Rng mean_rng(Rng::derive(spec.seed, 1));
    w.class_means = Matrix(spec.classes, d);
    for (std::size_t c = 0; c < spec.classes; ++c) {
        auto row = w.class_means.row(c);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& v : row) {
                v = mean_rng.normal();
                norm += v * v;
            }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        for (double& v : row) v = v / norm * spec.radius;
    }

    Rng offset_rng(Rng::derive(sample_seed, 2));
    w.group_offsets = Matrix(spec.groups, d);
    for (double& v : w.group_offsets.values()) v = offset_rng.normal(0.0, spec.group_offset_std);

    Rng noise_rng(Rng::derive(sample_seed, 3));
    const std::size_t n = spec.groups * spec.classes * spec.per_class_per_group;
    w.data.embeddings = Matrix(n, d);
    w.data.labels.reserve(n);
    w.data.groups.reserve(n);
    w.data.ids.reserve(n);
    std::size_t r = 0;
    for (std::size_t g = 0; g < spec.groups; ++g) {
        for (std::size_t c = 0; c < spec.classes; ++c) {
            for (std::size_t i = 0; i < spec.per_class_per_group; ++i, ++r) {
                auto row = w.data.embeddings.row(r);
                for (std::size_t j = 0; j < d; ++j) {
                    row[j] = w.class_means(c, j) + w.group_offsets(g, j) + noise_rng.normal(0.0, spec.within_std);
                }
                w.data.labels.push_back(static_cast<int>(c));
                w.data.groups.push_back(static_cast<int>(g));
                w.data.ids.push_back(r);
            }
        }
    }
    return w;
}

}  // namespace driftbench
