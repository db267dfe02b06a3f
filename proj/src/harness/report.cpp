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

#include "driftbench/harness/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "driftbench/errors.hpp"

#ifndef DRIFTBENCH_VERSION
#define DRIFTBENCH_VERSION "0.0.0"
#endif

namespace driftbench {
namespace {

using nlohmann::json;

std::string Num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json RowToJson(const BatchRow& r) {
    return json{{"index", r.index},
                {"size", r.size},
                {"loss", r.loss ? json(*r.loss) : json(nullptr)},
                {"running_accuracy", r.running_accuracy},
                {"partial", r.partial},
                {"incident", r.incident},
                {"incident_detail", r.incident_detail},
                {"warning", r.warning}};
}

BatchRow RowFromJson(const json& j) {
    BatchRow r;
    r.index = j.at("index").get<std::size_t>();
    r.size = j.at("size").get<std::size_t>();
    if (!j.at("loss").is_null()) r.loss = j.at("loss").get<double>();
    r.running_accuracy = j.at("running_accuracy").get<double>();
    r.partial = j.at("partial").get<bool>();
    r.incident = j.at("incident").get<bool>();
    r.incident_detail = j.at("incident_detail").get<std::string>();
    r.warning = j.at("warning").get<std::string>();
    return r;
}

json EpisodeToJson(const EpisodeReport& e) {
    json rows = json::array();
    for (const auto& r : e.rows) rows.push_back(RowToJson(r));
    return json{{"protocol", e.protocol},
                {"method", e.method},
                {"group", e.group ? json(*e.group) : json(nullptr)},
                {"seed", e.seed},
                {"batch_size", e.batch_size},
                {"accuracy", e.accuracy},
                {"macro_f1", e.macro_f1},
                {"incidents", e.incidents},
                {"warnings", e.warnings},
                {"wall_time_s", e.wall_time_s},
                {"config", e.config},
                {"rows", rows}};
}

EpisodeReport EpisodeFromJson(const json& j) {
    EpisodeReport e;
    e.protocol = j.at("protocol").get<std::string>();
    e.method = j.at("method").get<std::string>();
    if (!j.at("group").is_null()) e.group = j.at("group").get<int>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.batch_size = j.at("batch_size").get<std::size_t>();
    e.accuracy = j.at("accuracy").get<double>();
    e.macro_f1 = j.at("macro_f1").get<double>();
    e.incidents = j.at("incidents").get<std::size_t>();
    e.warnings = j.at("warnings").get<std::size_t>();
    e.wall_time_s = j.at("wall_time_s").get<double>();
    e.config = j.at("config");
    for (const auto& r : j.at("rows")) e.rows.push_back(RowFromJson(r));
    return e;
}

std::string CsvField(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string_view tool_version() { return DRIFTBENCH_VERSION; }

ReportFormat parse_report_format(std::string_view name) {
    if (name == "json") return ReportFormat::kJson;
    if (name == "csv") return ReportFormat::kCsv;
    throw UsageError("unknown report format '" + std::string(name) + "'");
}

std::string config_hash(const json& config) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

ReportDocument make_report(const json& config, std::uint64_t seed) {
    ReportDocument doc;
    doc.config = config;
    doc.config_hash = config_hash(config);
    doc.seed = seed;
    return doc;
}

void add_protocol_result(ReportDocument& doc, const ProtocolResult& result) {
    for (const auto& e : result.episodes) doc.episodes.push_back(e);
    doc.aggregates.push_back(AggregateRow{std::string(protocol_name(result.kind)), result.method,
                                          result.episodes.size(), result.accuracy, result.macro_f1});
    for (const auto& w : result.warnings) {
        if (std::find(doc.warnings.begin(), doc.warnings.end(), w) == doc.warnings.end()) doc.warnings.push_back(w);
    }
}

json report_to_json(const ReportDocument& doc) {
    json episodes = json::array();
    for (const auto& e : doc.episodes) episodes.push_back(EpisodeToJson(e));
    json aggregates = json::array();
    for (const auto& a : doc.aggregates) {
        aggregates.push_back(json{{"protocol", a.protocol},
                                  {"method", a.method},
                                  {"episodes", a.episodes},
                                  {"accuracy", a.accuracy},
                                  {"macro_f1", a.macro_f1}});
    }
    json sweep = json::array();
    for (const auto& s : doc.sweep) {
        sweep.push_back(json{{"method", s.method},
                             {"batch_size", s.batch_size},
                             {"accuracy", s.accuracy},
                             {"macro_f1", s.macro_f1},
                             {"clipped", s.clipped}});
    }
    return json{{"schema", std::string(kReportSchema)},
                {"tool_version", doc.tool_version},
                {"config_hash", doc.config_hash},
                {"seed", doc.seed},
                {"config", doc.config},
                {"episodes", episodes},
                {"aggregates", aggregates},
                {"sweep", sweep},
                {"warnings", doc.warnings}};
}

ReportDocument report_from_json(const json& j) {
    try {
        if (!j.is_object() || j.value("schema", "") != kReportSchema) {
            throw DataError("report: missing or unsupported schema (expected " + std::string(kReportSchema) + ")");
        }
        ReportDocument doc;
        doc.tool_version = j.at("tool_version").get<std::string>();
        doc.config_hash = j.at("config_hash").get<std::string>();
        doc.seed = j.at("seed").get<std::uint64_t>();
        doc.config = j.at("config");
        for (const auto& e : j.at("episodes")) doc.episodes.push_back(EpisodeFromJson(e));
        for (const auto& a : j.at("aggregates")) {
            doc.aggregates.push_back(AggregateRow{a.at("protocol").get<std::string>(), a.at("method").get<std::string>(),
                                                  a.at("episodes").get<std::size_t>(), a.at("accuracy").get<double>(),
                                                  a.at("macro_f1").get<double>()});
        }
        for (const auto& s : j.at("sweep")) {
            doc.sweep.push_back(SweepRow{s.at("method").get<std::string>(), s.at("batch_size").get<std::size_t>(),
                                         s.at("accuracy").get<double>(), s.at("macro_f1").get<double>(),
                                         s.at("clipped").get<bool>()});
        }
        doc.warnings = j.at("warnings").get<std::vector<std::string>>();
        return doc;
    } catch (const json::exception& e) {
        throw DataError(std::string("report: ") + e.what());
    }
}

std::string report_csv(const ReportDocument& doc) {
    std::ostringstream os;
    os << "protocol,method,group,seed,batch_size,batches,accuracy,macro_f1,incidents,warnings,wall_time_s,config_hash,"
          "tool_version\n";
    for (const auto& e : doc.episodes) {
        os << CsvField(e.protocol) << ',' << CsvField(e.method) << ',' << (e.group ? std::to_string(*e.group) : "")
           << ',' << e.seed << ',' << e.batch_size << ',' << e.rows.size() << ',' << Num(e.accuracy) << ','
           << Num(e.macro_f1) << ',' << e.incidents << ',' << e.warnings << ',' << Num(e.wall_time_s) << ',' << doc.config_hash << ','
           << CsvField(doc.tool_version) << '\n';
    }
    return os.str();
}

std::string sweep_csv(const ReportDocument& doc) {
    std::ostringstream os;
    os << "method,batch_size,accuracy,macro_f1,clipped,seed,config_hash,tool_version\n";
    for (const auto& s : doc.sweep) {
        os << CsvField(s.method) << ',' << s.batch_size << ',' << Num(s.accuracy) << ',' << Num(s.macro_f1) << ','
           << (s.clipped ? 1 : 0) << ',' << doc.seed << ',' << doc.config_hash << ',' << CsvField(doc.tool_version)
           << '\n';
    }
    return os.str();
}

void emit_report(const ReportDocument& doc, const std::string& path, ReportFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path + ": cannot open for writing");
    if (format == ReportFormat::kJson) {
        out << report_to_json(doc).dump(2) << '\n';
    } else {
        out << report_csv(doc);
    }
    out.flush();
    if (!out) throw DataError(path + ": write failed");
}

ReportDocument read_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open report");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": not valid JSON (" + e.what() + ")");
    }
    return report_from_json(j);
}

ReportDocument merge_reports(const std::vector<ReportDocument>& docs) {
    json configs = json::array();
    for (const auto& d : docs) configs.push_back(d.config);
    ReportDocument merged = make_report(json{{"merged", configs}}, docs.empty() ? 0 : docs.front().seed);
    for (const auto& d : docs) {
        merged.episodes.insert(merged.episodes.end(), d.episodes.begin(), d.episodes.end());
        merged.aggregates.insert(merged.aggregates.end(), d.aggregates.begin(), d.aggregates.end());
        merged.sweep.insert(merged.sweep.end(), d.sweep.begin(), d.sweep.end());
        for (const auto& w : d.warnings) merged.warnings.push_back(w);
    }
    return merged;
}

}  // namespace driftbench
