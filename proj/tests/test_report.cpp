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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "driftbench/errors.hpp"
#include "driftbench/harness/report.hpp"

using namespace driftbench;
namespace fs = std::filesystem;

namespace {

fs::path TmpDir() {
    const fs::path p = fs::path(DRIFTBENCH_TEST_TMP) / "report";
    fs::create_directories(p);
    return p;
}

EpisodeReport SampleEpisode(int group, double acc) {
    EpisodeReport e;
    e.protocol = "personalization";
    e.method = "tent";
    e.group = group;
    e.seed = 3;
    e.batch_size = 16;
    e.accuracy = acc;
    e.macro_f1 = acc - 0.1;
    e.incidents = 1;
    e.wall_time_s = 0.25;
    e.config = {{"lr", 1e-3}};
    BatchRow r;
    r.index = 0;
    r.size = 16;
    r.loss = 0.5;
    r.running_accuracy = acc;
    r.incident = true;
    r.incident_detail = "skipped";
    e.rows.push_back(r);
    r.index = 1;
    r.size = 4;
    r.loss.reset();
    r.partial = true;
    r.incident = false;
    r.incident_detail.clear();
    r.warning = "slow";
    e.rows.push_back(r);
    return e;
}

ReportDocument SampleDocument() {
    ReportDocument doc = make_report({{"protocol", "personalization"}, {"seed", 3}}, 3);
    ProtocolResult res;
    res.kind = ProtocolKind::kPersonalization;
    res.method = "tent";
    res.episodes = {SampleEpisode(0, 0.8), SampleEpisode(1, 0.6)};
    res.accuracy = 0.7;
    res.macro_f1 = 0.6;
    res.warnings = {"group 2 skipped"};
    add_protocol_result(doc, res);
    doc.sweep.push_back(SweepRow{"tent", 4, 0.5, 0.4, false});
    return doc;
}

}  // namespace

TEST(Report, ConfigHashIsStableAndSensitive) {
    const nlohmann::json a = {{"x", 1}, {"y", "z"}};
    EXPECT_EQ(config_hash(a), config_hash(a));
    EXPECT_EQ(config_hash(a).size(), 16u);
    EXPECT_NE(config_hash(a), config_hash({{"x", 2}, {"y", "z"}}));
}

TEST(Report, JsonRoundTripPreservesStructure) {
    const ReportDocument doc = SampleDocument();
    const nlohmann::json j = report_to_json(doc);
    EXPECT_EQ(j.at("schema"), kReportSchema);
    EXPECT_EQ(report_to_json(report_from_json(j)), j);
    ASSERT_EQ(doc.aggregates.size(), 1u);
    EXPECT_EQ(doc.aggregates[0].episodes, 2u);
    EXPECT_DOUBLE_EQ(doc.aggregates[0].accuracy, 0.7);
}

TEST(Report, EmptyDocumentIsValid) {
    const ReportDocument doc = make_report(nlohmann::json::object(), 0);
    const auto back = report_from_json(report_to_json(doc));
    EXPECT_TRUE(back.episodes.empty());
    EXPECT_EQ(back.config_hash, doc.config_hash);
    EXPECT_EQ(back.tool_version, tool_version());
}

TEST(Report, ForeignSchemaIsRejected) {
    nlohmann::json j = report_to_json(SampleDocument());
    j["schema"] = "other/9";
    EXPECT_THROW(report_from_json(j), DataError);
    EXPECT_THROW(report_from_json(nlohmann::json::array()), DataError);
}

TEST(Report, CsvHasOneRowPerEpisode) {
    const ReportDocument doc = SampleDocument();
    std::istringstream in(report_csv(doc));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, doc.episodes.size() + 1);
    EXPECT_EQ(report_csv(doc).rfind("protocol,method,group,seed,batch_size", 0), 0u);

    std::istringstream sw(sweep_csv(doc));
    lines = 0;
    while (std::getline(sw, line)) ++lines;
    EXPECT_EQ(lines, 2u);
}

TEST(Report, EmitAndRead) {
    const ReportDocument doc = SampleDocument();
    const fs::path p = TmpDir() / "doc.json";
    emit_report(doc, p.string(), ReportFormat::kJson);
    EXPECT_EQ(report_to_json(read_report(p.string())), report_to_json(doc));
    emit_report(doc, (TmpDir() / "doc.csv").string(), ReportFormat::kCsv);
    EXPECT_TRUE(fs::exists(TmpDir() / "doc.csv"));
}

TEST(Report, UnwritablePathIsADataError) {
    const fs::path p = TmpDir() / "no-such-dir" / "deeper" / "x.json";
    EXPECT_THROW(emit_report(SampleDocument(), p.string(), ReportFormat::kJson), DataError);
    EXPECT_THROW(read_report((TmpDir() / "missing.json").string()), DataError);
}

TEST(Report, MergeConcatenates) {
    const ReportDocument a = SampleDocument();
    ReportDocument b = make_report({{"protocol", "style"}}, 4);
    b.warnings.push_back("note");
    const ReportDocument m = merge_reports({a, b});
    EXPECT_EQ(m.episodes.size(), a.episodes.size());
    EXPECT_EQ(m.aggregates.size(), 1u);
    EXPECT_EQ(m.sweep.size(), 1u);
    EXPECT_EQ(m.warnings.size(), a.warnings.size() + 1);
    EXPECT_EQ(m.config.at("merged").size(), 2u);
    EXPECT_EQ(m.config_hash, config_hash(m.config));
}

TEST(Report, FormatNames) {
    EXPECT_EQ(parse_report_format("json"), ReportFormat::kJson);
    EXPECT_EQ(parse_report_format("csv"), ReportFormat::kCsv);
    EXPECT_THROW(parse_report_format("xml"), UsageError);
}
