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

#include "driftbench/cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "driftbench/cli/config.hpp"
#include "driftbench/cli/selftest.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/head/checkpoint.hpp"
#include "driftbench/shiftgen/embedding_io.hpp"

namespace driftbench::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flag values as given; unset ones leave the file/default value alone.
struct FlagValues {
    std::optional<std::string> config;
    std::optional<std::string> seed;
    std::optional<std::string> protocol;
    std::optional<std::string> methods;
    std::optional<std::size_t> batch_size;
    std::optional<std::string> sizes;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::size_t> jobs;
    std::optional<std::string> data;
    std::optional<std::string> checkpoint;
    std::vector<std::string> inputs;
};

void AddCommonFlags(CLI::App* sub, FlagValues& f) {
    sub->add_option("--config", f.config, "INI config file; flags override its values");
    sub->add_option("--seed", f.seed, "Seed or comma-separated seed list");
    sub->add_option("--out", f.out, "Output directory (report: output file)");
    sub->add_option("--format", f.format, "json | csv");
}

void AddProtocolFlags(CLI::App* sub, FlagValues& f) {
    sub->add_option("--protocol", f.protocol, "personalization | style | cross-corpus");
    sub->add_option("--jobs", f.jobs, "Parallel episodes (default 1)");
}

RunConfig Resolve(const std::string& command, const FlagValues& f) {
    RunConfig cfg;
    cfg.command = command;
    if (f.config) load_config_file(cfg, *f.config);
    if (f.seed) cfg.seeds = parse_seed_list(*f.seed);
    if (f.protocol) cfg.protocol = parse_protocol(*f.protocol);
    if (f.methods) cfg.methods = parse_methods(*f.methods);
    if (f.batch_size) {
        if (*f.batch_size == 0) throw UsageError("--batch-size must be positive");
        cfg.batch_size = *f.batch_size;
    }
    if (f.sizes) cfg.sweep_sizes = parse_size_list(*f.sizes);
    if (f.out) cfg.out = *f.out;
    if (f.format) cfg.format = parse_report_format(*f.format);
    if (f.jobs) {
        if (*f.jobs == 0) throw UsageError("--jobs must be positive");
        cfg.jobs = *f.jobs;
    }
    if (f.data) cfg.data = *f.data;
    if (f.checkpoint) cfg.checkpoint = *f.checkpoint;
    cfg.inputs = f.inputs;
    return cfg;
}

void EnsureDir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError(dir.string() + ": cannot create directory (" + ec.message() + ")");
}

json Stamp(const json& config, std::uint64_t seed) {
    return json{{"config_hash", config_hash(config)}, {"seed", seed}, {"tool_version", std::string(tool_version())},
                {"config", config}};
}

void WriteJsonFile(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out) throw DataError(path.string() + ": write failed");
}

std::string FoldTag(ProtocolKind kind, const std::optional<int>& group, std::uint64_t seed) {
    std::string tag(protocol_name(kind));
    if (group) tag += "-g" + std::to_string(*group);
    return tag + "-s" + std::to_string(seed);
}

std::string Extension(ReportFormat f) { return f == ReportFormat::kJson ? ".json" : ".csv"; }

int CmdGen(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir(cfg.out);
    EnsureDir(dir);
    const json config = cfg.to_json();
    const EmbeddingFormat fmt = cfg.format == ReportFormat::kCsv ? EmbeddingFormat::kCsv : EmbeddingFormat::kBinary;
    const std::string ext = fmt == EmbeddingFormat::kCsv ? ".csv" : ".ttae";
    for (std::uint64_t seed : cfg.seeds) {
        const TaskSplits splits = prepare_splits(cfg.protocol, cfg.protocol_config(seed));
        for (const auto& fold : splits.folds) {
            const std::string tag = FoldTag(cfg.protocol, fold.group, seed);
            for (const auto& [role, data] : {std::pair{"train", &fold.train}, std::pair{"target", &fold.target}}) {
                const fs::path path = dir / (tag + "-" + role + ext);
                write_embeddings(path, *data, fmt);
                json stamp = Stamp(config, seed);
                stamp["role"] = role;
                stamp["rows"] = data->size();
                stamp["dim"] = data->dim();
                WriteJsonFile(path.string() + ".json", stamp);
                out << "wrote " << path.string() << " (" << data->size() << " rows)\n";
            }
        }
    }
    return kExitOk;
}

Checkpoint TrainCheckpoint(const Dataset& data, std::size_t classes, const TrainConfig& train, const json& config,
                           std::uint64_t seed) {
    TrainConfig tc = train;
    tc.seed = seed;
    TrainResult r = train_source(data.to_batch(), classes, tc);
    Checkpoint ck{std::move(r.params), std::move(r.stats), Stamp(config, seed)};
    ck.train_config["final_epoch_loss"] = r.epoch_loss.empty() ? json(nullptr) : json(r.epoch_loss.back());
    return ck;
}

std::size_t ClassesOf(const Dataset& data) {
    int top = -1;
    for (int l : data.labels) top = std::max(top, l);
    return static_cast<std::size_t>(top + 1);
}

int CmdTrain(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir(cfg.out);
    EnsureDir(dir);
    const json config = cfg.to_json();
    for (std::uint64_t seed : cfg.seeds) {
        if (cfg.data) {
            const Dataset data = read_embeddings(*cfg.data);
            if (!data.fully_labeled()) throw DataError(*cfg.data + ": training data must be fully labeled");
            const fs::path path = dir / ("model-s" + std::to_string(seed) + ".ttah");
            save_checkpoint(path, TrainCheckpoint(data, ClassesOf(data), cfg.train, config, seed));
            out << "wrote " << path.string() << '\n';
            continue;
        }
        const ProtocolConfig pc = cfg.protocol_config(seed);
        const TaskSplits splits = prepare_splits(cfg.protocol, pc);
        for (const auto& fold : splits.folds) {
            const fs::path path = dir / (FoldTag(cfg.protocol, fold.group, seed) + ".ttah");
            save_checkpoint(path, TrainCheckpoint(fold.train, pc.world.classes, pc.train, config, seed));
            out << "wrote " << path.string() << '\n';
        }
    }
    return kExitOk;
}

void WriteReport(const ReportDocument& doc, const fs::path& path, ReportFormat format, std::ostream& out) {
    emit_report(doc, path.string(), format);
    out << "wrote " << path.string() << '\n';
}

int Summarize(const ReportDocument& doc, std::ostream& out) {
    for (const auto& a : doc.aggregates) {
        out << a.protocol << ' ' << a.method << " seed=" << doc.seed << " episodes=" << a.episodes
            << " accuracy=" << a.accuracy << " macro_f1=" << a.macro_f1 << '\n';
    }
    std::size_t incidents = 0;
    for (const auto& e : doc.episodes) incidents += e.incidents;
    return incidents == 0 ? kExitOk : kExitNumeric;
}

int CmdAdaptFile(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.checkpoint || !cfg.data) throw UsageError("--checkpoint and --data must be given together");
    const Checkpoint ck = load_checkpoint(*cfg.checkpoint);
    const Dataset data = read_embeddings(*cfg.data);
    if (!data.fully_labeled()) throw DataError(*cfg.data + ": target data needs labels for scoring");
    if (data.dim() != ck.params.dim()) throw DataError(*cfg.data + ": dimension does not match the checkpoint");
    const std::size_t classes = ck.params.classes();
    const SourceModel model{ck.params, ck.stats};
    const fs::path dir(cfg.out);
    EnsureDir(dir);
    const json config = cfg.to_json();
    int code = kExitOk;
    for (std::uint64_t seed : cfg.seeds) {
        for (Method m : cfg.methods) {
            ReportDocument doc = make_report(config, seed);
            const FeatureBatch batch = data.to_batch();
            const std::size_t bs = std::min(cfg.batch_size, batch.size());
            if (cfg.batch_size > batch.size()) err << "driftbench: warning: batch size exceeds the stream\n";
            EpisodeReport r = run_episode(cfg.adapter_handle(m, seed), model, make_stream(batch, bs), classes);
            r.protocol = "file";
            r.seed = seed;
            r.batch_size = cfg.batch_size;
            doc.aggregates.push_back(AggregateRow{"file", r.method, 1, r.accuracy, r.macro_f1});
            doc.episodes.push_back(std::move(r));
            WriteReport(doc, dir / ("file-" + std::string(method_name(m)) + "-s" + std::to_string(seed) +
                                    Extension(cfg.format)),
                        cfg.format, out);
            code = std::max(code, Summarize(doc, out));
        }
    }
    return code;
}

int CmdAdapt(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.checkpoint || cfg.data) return CmdAdaptFile(cfg, out, err);
    const fs::path dir(cfg.out);
    EnsureDir(dir);
    const json config = cfg.to_json();
    int code = kExitOk;
    for (std::uint64_t seed : cfg.seeds) {
        const ProtocolConfig pc = cfg.protocol_config(seed);
        const PreparedTask task = prepare_task(cfg.protocol, pc);
        for (const auto& w : task.warnings) err << "driftbench: warning: " << w << '\n';
        for (Method m : cfg.methods) {
            const ProtocolResult result = evaluate_task(task, cfg.adapter_handle(m, seed), cfg.batch_size, cfg.jobs);
            ReportDocument doc = make_report(config, seed);
            add_protocol_result(doc, result);
            WriteReport(doc, dir / (std::string(protocol_name(cfg.protocol)) + "-" + result.method + "-s" +
                                    std::to_string(seed) + Extension(cfg.format)),
                        cfg.format, out);
            code = std::max(code, Summarize(doc, out));
        }
    }
    return code;
}

int CmdSweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const fs::path dir(cfg.out);
    EnsureDir(dir);
    const json config = cfg.to_json();
    for (std::uint64_t seed : cfg.seeds) {
        const ProtocolConfig pc = cfg.protocol_config(seed);
        const PreparedTask task = prepare_task(cfg.protocol, pc);
        for (const auto& w : task.warnings) err << "driftbench: warning: " << w << '\n';
        std::vector<AdapterHandle> handles;
        for (Method m : cfg.methods) handles.push_back(cfg.adapter_handle(m, seed));
        ReportDocument doc = make_report(config, seed);
        doc.sweep = sweep_batch_size(task, handles, cfg.sweep_sizes, cfg.jobs);
        for (const auto& row : doc.sweep) {
            if (row.clipped) {
                const std::string w = "batch size " + std::to_string(row.batch_size) +
                                      " exceeds the stream; ran as a single batch";
                if (std::find(doc.warnings.begin(), doc.warnings.end(), w) == doc.warnings.end()) {
                    doc.warnings.push_back(w);
                    err << "driftbench: warning: " << w << '\n';
                }
            }
            out << "sweep " << row.method << " batch_size=" << row.batch_size << " accuracy=" << row.accuracy
                << " macro_f1=" << row.macro_f1 << '\n';
        }
        const fs::path path =
            dir / ("sweep-" + std::string(protocol_name(cfg.protocol)) + "-s" + std::to_string(seed) +
                   Extension(cfg.format));
        if (cfg.format == ReportFormat::kJson) {
            emit_report(doc, path.string(), ReportFormat::kJson);
        } else {
            std::ofstream f(path, std::ios::trunc);
            if (!f) throw DataError(path.string() + ": cannot open for writing");
            f << sweep_csv(doc);
            if (!f) throw DataError(path.string() + ": write failed");
        }
        out << "wrote " << path.string() << '\n';
    }
    return kExitOk;
}

int CmdReport(const RunConfig& cfg, bool out_given, std::ostream& out) {
    std::vector<ReportDocument> docs;
    for (const auto& in : cfg.inputs) docs.push_back(read_report(in));
    const ReportDocument merged = merge_reports(docs);
    if (!out_given) {
        out << (cfg.format == ReportFormat::kJson ? report_to_json(merged).dump(2) + "\n" : report_csv(merged));
        return kExitOk;
    }
    WriteReport(merged, cfg.out, cfg.format, out);
    return kExitOk;
}

int CmdSelftest(const RunConfig& cfg, std::ostream& out) {
    const SelftestSummary s = run_selftest(cfg.seeds.front());
    for (const auto& c : s.checks) out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    out << "selftest: " << s.passed() << "/" << s.checks.size() << " passed\n";
    return s.failed() == 0 ? kExitOk : kExitNumeric;
}

std::string OneLine(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"driftbench: test-time adaptation benchmark on synthetic embedding shifts", "driftbench"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    FlagValues f;
    CLI::App* gen = app.add_subcommand("gen", "Write protocol train/target datasets (TTAE, or CSV with --format csv)");
    CLI::App* train = app.add_subcommand("train", "Train source heads and write checkpoints");
    CLI::App* adapt = app.add_subcommand("adapt", "Run one protocol for the chosen methods");
    CLI::App* sweep = app.add_subcommand("sweep", "Run the batch-size grid");
    CLI::App* report = app.add_subcommand("report", "Merge report files");
    CLI::App* selftest = app.add_subcommand("selftest", "Run the built-in numerical checks");
    for (CLI::App* sub : {gen, train, adapt, sweep, report, selftest}) AddCommonFlags(sub, f);
    for (CLI::App* sub : {gen, train, adapt, sweep}) AddProtocolFlags(sub, f);
    for (CLI::App* sub : {adapt, sweep}) {
        sub->add_option("--methods", f.methods, "Comma-separated: source,tent,eata,sam,pl,t3a,lame,foa or all");
        sub->add_option("--batch-size", f.batch_size, "Stream batch size (default 32)");
    }
    sweep->add_option("--sizes", f.sizes, "Comma-separated batch sizes (default 1,4,16,32,64)");
    train->add_option("--data", f.data, "Train on this embedding file instead of a protocol");
    adapt->add_option("--data", f.data, "Labeled target embedding file");
    adapt->add_option("--checkpoint", f.checkpoint, "Source checkpoint to adapt from");
    report->add_option("inputs", f.inputs, "JSON reports to merge")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "driftbench: usage-error: " << OneLine(e.what()) << '\n';
        err << app.help();
        return kExitUsage;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const RunConfig cfg = Resolve(sub->get_name(), f);
        if (sub == gen) return CmdGen(cfg, out);
        if (sub == train) return CmdTrain(cfg, out);
        if (sub == adapt) return CmdAdapt(cfg, out, err);
        if (sub == sweep) return CmdSweep(cfg, out, err);
        if (sub == report) return CmdReport(cfg, f.out.has_value(), out);
        return CmdSelftest(cfg, out);
    } catch (const UsageError& e) {
        err << "driftbench: usage-error: " << OneLine(e.what()) << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "driftbench: data-error: " << OneLine(e.what()) << '\n';
        return kExitData;
    } catch (const NumericError& e) {
        err << "driftbench: numeric-error: " << OneLine(e.what()) << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "driftbench: data-error: " << OneLine(e.what()) << '\n';
        return kExitData;
    }
}

}  // namespace driftbench::cli
