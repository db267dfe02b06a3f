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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftbench/adapt/adapter.hpp"
#include "driftbench/harness/episode.hpp"
#include "driftbench/harness/protocols.hpp"
#include "driftbench/harness/report.hpp"

namespace driftbench::cli {

// Fully resolved run settings. Precedence, lowest first: built-in defaults,
// the --config file, command-line flags.
struct RunConfig {
    std::string command;
    std::vector<std::uint64_t> seeds{0};
    ProtocolKind protocol = ProtocolKind::kCrossCorpus;
    std::vector<Method> methods{Method::kSource};
    std::size_t batch_size = 32;
    std::vector<std::size_t> sweep_sizes = default_sweep_sizes();
    std::string out = "driftbench-out";
    ReportFormat format = ReportFormat::kJson;
    std::size_t jobs = 1;
    bool weighted_aggregate = false;
    ResetPolicy reset = ResetPolicy::kEpisodic;
    double style_holdout_fraction = 0.5;

    WorldSpec world;
    ShiftSpec shift;
    // Unset means the protocol's own default severity.
    std::optional<int> severity;
    TrainConfig train = desk_train_config();
    // Raw [tent] [eata] [sam] [pl] [t3a] [lame] [foa] settings, applied on top of
    // the per-method defaults.
    std::map<std::string, std::map<std::string, std::string>> adapter_overrides;

    // Inputs for train/adapt on external files and for report merging.
    std::optional<std::string> data;
    std::optional<std::string> checkpoint;
    std::vector<std::string> inputs;

    ProtocolConfig protocol_config(std::uint64_t seed) const;
    AdapterConfig adapter_config(Method method, std::uint64_t seed) const;
    AdapterHandle adapter_handle(Method method, std::uint64_t seed) const;

    // Everything that influences results. Output location and --jobs are
    // left out so they do not change the config hash.
    nlohmann::json to_json() const;
};

// Applies one `key = value` setting from `section`. Throws UsageError on an
// unknown section, key or unparsable value.
void apply_setting(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value);

// Reads an INI-style file with [section] headers and applies every setting.
void load_config_file(RunConfig& cfg, const std::string& path);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace driftbench::cli
