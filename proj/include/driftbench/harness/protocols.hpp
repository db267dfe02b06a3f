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
#include <string>
#include <string_view>
#include <vector>

#include "driftbench/harness/episode.hpp"
#include "driftbench/head/training.hpp"
#include "driftbench/shiftgen/shift.hpp"
#include "driftbench/shiftgen/world.hpp"

namespace driftbench {

enum class ProtocolKind { kPersonalization, kStyle, kCrossCorpus };

std::string_view protocol_name(ProtocolKind kind);
ProtocolKind parse_protocol(std::string_view name);
ShiftKind protocol_shift_kind(ProtocolKind kind);

// Source-training settings used by the protocols.
TrainConfig desk_train_config();

struct ProtocolConfig {
    WorldSpec world;
    ShiftSpec shift;
    TrainConfig train = desk_train_config();
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    // Weight per-group finals by stream length instead of a plain mean.
    bool weighted_aggregate = false;
    // Fraction of samples held out (and style-shifted) by the style protocol.
    double style_holdout_fraction = 0.5;
    std::size_t jobs = 1;

    // Desk-scale defaults for one protocol, seeded consistently from `seed`.
    static ProtocolConfig defaults(ProtocolKind kind, std::uint64_t seed);
};

// Raw train/target data of one fold, before any training.
struct FoldData {
    std::optional<int> group;
    Dataset train;
    Dataset target;  // shifted and shuffled once; order is fixed for every method and batch size
};

struct TaskSplits {
    std::vector<FoldData> folds;
    std::vector<std::string> warnings;
};

// Generates the world(s), splits them per protocol and applies the shift.
TaskSplits prepare_splits(ProtocolKind kind, const ProtocolConfig& cfg);

// One source model plus the target stream it is adapted on.
struct TaskFold {
    std::optional<int> group;
    SourceModel model;
    FeatureBatch target;
};

struct PreparedTask {
    ProtocolKind kind = ProtocolKind::kCrossCorpus;
    std::size_t classes = 0;
    std::uint64_t seed = 0;
    bool weighted_aggregate = false;
    std::vector<TaskFold> folds;
    std::vector<std::string> warnings;
};

// prepare_splits followed by one train_source per fold.
PreparedTask prepare_task(ProtocolKind kind, const ProtocolConfig& cfg);

struct ProtocolResult {
    ProtocolKind kind = ProtocolKind::kCrossCorpus;
    std::string method;
    std::vector<EpisodeReport> episodes;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::string> warnings;
};

// One episode per fold; folds run on up to `jobs` threads, results in fold order.
ProtocolResult evaluate_task(const PreparedTask& task, const AdapterHandle& handle, std::size_t batch_size,
                             std::size_t jobs = 1);

// Leave-one-group-out: train on the other groups, adapt on the held-out group
// shifted by a group offset.
ProtocolResult protocol_personalization(const ProtocolConfig& cfg, const AdapterHandle& handle);
// Train on the unshifted split, adapt on the style-shifted held-out split.
ProtocolResult protocol_style(const ProtocolConfig& cfg, const AdapterHandle& handle);
// Train on corpus A, adapt on an independently sampled, affinely perturbed corpus B.
ProtocolResult protocol_cross_corpus(const ProtocolConfig& cfg, const AdapterHandle& handle);

struct SweepRow {
    std::string method;
    std::size_t batch_size = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    // The requested size exceeded the stream and was clipped to one batch.
    bool clipped = false;
};

std::vector<SweepRow> sweep_batch_size(const PreparedTask& task, const std::vector<AdapterHandle>& handles,
                                       const std::vector<std::size_t>& sizes, std::size_t jobs = 1);

const std::vector<std::size_t>& default_sweep_sizes();

}  // namespace driftbench
