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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "driftbench/harness/episode.hpp"
#include "driftbench/harness/protocols.hpp"

namespace driftbench {

inline constexpr std::string_view kReportSchema = "driftbench-report/1";

std::string_view tool_version();

enum class ReportFormat { kJson, kCsv };

ReportFormat parse_report_format(std::string_view name);

struct AggregateRow {
    std::string protocol;
    std::string method;
    std::size_t episodes = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

struct ReportDocument {
    std::string tool_version{driftbench::tool_version()};
    std::string config_hash;
    std::uint64_t seed = 0;
    nlohmann::json config = nlohmann::json::object();
    std::vector<EpisodeReport> episodes;
    std::vector<AggregateRow> aggregates;
    std::vector<SweepRow> sweep;
    std::vector<std::string> warnings;
};

// FNV-1a over the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

// Document whose config and hash are filled from `config`.
ReportDocument make_report(const nlohmann::json& config, std::uint64_t seed);

void add_protocol_result(ReportDocument& doc, const ProtocolResult& result);

nlohmann::json report_to_json(const ReportDocument& doc);
ReportDocument report_from_json(const nlohmann::json& j);

// Header plus one row per episode.
std::string report_csv(const ReportDocument& doc);
// Header plus one row per (method, batch size) cell.
std::string sweep_csv(const ReportDocument& doc);

// Throws DataError when the path cannot be written.
void emit_report(const ReportDocument& doc, const std::string& path, ReportFormat format);
// Reads a JSON report. Throws DataError on a missing file or foreign schema.
ReportDocument read_report(const std::string& path);

// Concatenates episodes, aggregates, sweep rows and warnings. The merged
// config lists the inputs' configs and is hashed anew.
ReportDocument merge_reports(const std::vector<ReportDocument>& docs);

}  // namespace driftbench
