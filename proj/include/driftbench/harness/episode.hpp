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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftbench/adapt/adapter.hpp"
#include "driftbench/harness/metrics.hpp"

namespace driftbench {

enum class ResetPolicy { kEpisodic, kContinual };

struct AdapterHandle {
    AdapterConfig config;
    ResetPolicy reset = ResetPolicy::kEpisodic;
};

struct BatchRow {
    std::size_t index = 0;
    std::size_t size = 0;
    std::optional<double> loss;
    double running_accuracy = 0.0;
    bool partial = false;
    bool incident = false;
    std::string incident_detail;
    std::string warning;
};

struct EpisodeReport {
    std::string protocol;
    std::string method;
    std::optional<int> group;
    std::uint64_t seed = 0;
    std::size_t batch_size = 0;
    std::vector<BatchRow> rows;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::size_t incidents = 0;
    std::size_t warnings = 0;
    double wall_time_s = 0.0;
    nlohmann::json config;
};

// Consecutive batches of batch_size; the last one may be smaller and is kept.
// A batch_size above the stream length yields a single batch.
std::vector<FeatureBatch> make_stream(const FeatureBatch& data, std::size_t batch_size);

// Owns one adapter across episodes. Episodic handles rebuild pristine state
// before each episode; continual ones carry it over.
class AdapterSession {
public:
    AdapterSession(AdapterHandle handle, const SourceModel& model);

    // Labels in the stream are used for scoring only; the adapter receives
    // UnlabeledBatch views. Throws DataError if the stream is empty or unlabeled.
    EpisodeReport run(const std::vector<FeatureBatch>& stream, std::size_t classes);

    const AdapterHandle& handle() const noexcept { return handle_; }

private:
    AdapterHandle handle_;
    std::unique_ptr<Adapter> adapter_;
    bool used_ = false;
};

EpisodeReport run_episode(const AdapterHandle& handle, const SourceModel& model,
                          const std::vector<FeatureBatch>& stream, std::size_t classes);

}  // namespace driftbench
