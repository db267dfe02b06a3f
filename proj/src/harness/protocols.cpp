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

#include "driftbench/harness/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "driftbench/errors.hpp"
#include "driftbench/numkit/rng.hpp"

namespace driftbench {
namespace {

constexpr std::uint64_t kShiftStream = 7;
constexpr std::uint64_t kOrderStream = 11;
constexpr std::uint64_t kTrainStream = 13;
constexpr std::uint64_t kSplitStream = 17;
constexpr std::uint64_t kCorpusStream = 99;

Dataset Shuffled(const Dataset& data, std::uint64_t seed) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    return data.subset(order);
}

SourceModel Train(const Dataset& train, std::size_t classes, TrainConfig cfg, std::uint64_t seed) {
    cfg.seed = seed;
    TrainResult r = train_source(train.to_batch(), classes, cfg);
    return SourceModel{std::move(r.params), std::move(r.stats)};
}

void ParallelFor(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

std::size_t DistinctLabels(const Dataset& d) {
    return std::set<int>(d.labels.begin(), d.labels.end()).size();
}

}  // namespace

std::string_view protocol_name(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::kPersonalization:
            return "personalization";
        case ProtocolKind::kStyle:
            return "style";
        case ProtocolKind::kCrossCorpus:
            return "cross-corpus";
    }
    return "unknown";
}

ProtocolKind parse_protocol(std::string_view name) {
    if (name == "personalization") return ProtocolKind::kPersonalization;
    if (name == "style") return ProtocolKind::kStyle;
    if (name == "cross-corpus") return ProtocolKind::kCrossCorpus;
    throw UsageError("unknown protocol '" + std::string(name) + "'");
}

ShiftKind protocol_shift_kind(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::kPersonalization:
            return ShiftKind::kGroupOffset;
        case ProtocolKind::kStyle:
            return ShiftKind::kStyle;
        case ProtocolKind::kCrossCorpus:
            return ShiftKind::kCorpusAffine;
    }
    return ShiftKind::kCorpusAffine;
}

ProtocolConfig ProtocolConfig::defaults(ProtocolKind kind, std::uint64_t seed) {
    ProtocolConfig c;
    c.seed = seed;
    c.world.seed = seed;
    c.shift.kind = protocol_shift_kind(kind);
    c.shift.severity = kind == ProtocolKind::kPersonalization ? 1 : (kind == ProtocolKind::kStyle ? 3 : 4);
    return c;
}

TrainConfig desk_train_config() { return TrainConfig{}; }

const std::vector<std::size_t>& default_sweep_sizes() {
    static const std::vector<std::size_t> kSizes{1, 4, 16, 32, 64};
    return kSizes;
}

TaskSplits prepare_splits(ProtocolKind kind, const ProtocolConfig& cfg) {
    ShiftSpec shift = cfg.shift;
    shift.kind = protocol_shift_kind(kind);
    shift.validate();
    const std::uint64_t shift_seed = Rng::derive(cfg.seed, kShiftStream);
    const std::uint64_t order_seed = Rng::derive(cfg.seed, kOrderStream);

    TaskSplits splits;
    switch (kind) {
        case ProtocolKind::kPersonalization: {
            if (cfg.world.groups < 2) throw UsageError("personalization needs at least 2 groups");
            const World world = gen_world(cfg.world);
            for (std::size_t g = 0; g < cfg.world.groups; ++g) {
                std::vector<std::size_t> train_rows, target_rows;
                for (std::size_t r = 0; r < world.data.size(); ++r) {
                    (world.data.groups[r] == static_cast<int>(g) ? target_rows : train_rows).push_back(r);
                }
                Dataset target = world.data.subset(target_rows);
                if (DistinctLabels(target) < 2) {
                    splits.warnings.push_back("group " + std::to_string(g) + " has a single class; skipped");
                    continue;
                }
                target = Shuffled(apply_shift(target, shift, shift_seed), Rng::derive(order_seed, g));
                splits.folds.push_back(FoldData{static_cast<int>(g), world.data.subset(train_rows), std::move(target)});
            }
            break;
        }
        case ProtocolKind::kStyle: {
            if (!(cfg.style_holdout_fraction > 0.0 && cfg.style_holdout_fraction < 1.0)) {
                throw UsageError("style holdout fraction must lie in (0, 1)");
            }
            const World world = gen_world(cfg.world);
            const Dataset mixed = Shuffled(world.data, Rng::derive(cfg.seed, kSplitStream));
            const auto n_target =
                static_cast<std::size_t>(cfg.style_holdout_fraction * static_cast<double>(mixed.size()));
            if (n_target == 0 || n_target == mixed.size()) throw UsageError("style split leaves an empty side");
            std::vector<std::size_t> target_rows(n_target), train_rows(mixed.size() - n_target);
            std::iota(target_rows.begin(), target_rows.end(), 0);
            std::iota(train_rows.begin(), train_rows.end(), n_target);
            Dataset target = Shuffled(apply_shift(mixed.subset(target_rows), shift, shift_seed), order_seed);
            splits.folds.push_back(FoldData{std::nullopt, mixed.subset(train_rows), std::move(target)});
            break;
        }
        case ProtocolKind::kCrossCorpus: {
            const World corpus_a = gen_world(cfg.world);
            WorldSpec spec_b = cfg.world;
            spec_b.sample_seed = Rng::derive(cfg.seed, kCorpusStream);
            const World corpus_b = gen_world(spec_b);
            Dataset target = Shuffled(apply_shift(corpus_b.data, shift, shift_seed), order_seed);
            splits.folds.push_back(FoldData{std::nullopt, corpus_a.data, std::move(target)});
            break;
        }
    }
    if (splits.folds.empty()) throw DataError("protocol produced no usable folds");
    return splits;
}

PreparedTask prepare_task(ProtocolKind kind, const ProtocolConfig& cfg) {
    TaskSplits splits = prepare_splits(kind, cfg);
    const std::uint64_t train_seed = Rng::derive(cfg.seed, kTrainStream);

    PreparedTask task;
    task.kind = kind;
    task.classes = cfg.world.classes;
    task.seed = cfg.seed;
    task.weighted_aggregate = cfg.weighted_aggregate;
    task.warnings = std::move(splits.warnings);
    task.folds.resize(splits.folds.size());
    ParallelFor(splits.folds.size(), cfg.jobs, [&](std::size_t i) {
        const FoldData& f = splits.folds[i];
        const std::uint64_t seed = Rng::derive(train_seed, static_cast<std::uint64_t>(f.group.value_or(0)));
        task.folds[i] = TaskFold{f.group, Train(f.train, task.classes, cfg.train, seed), f.target.to_batch()};
    });
    return task;
}

ProtocolResult evaluate_task(const PreparedTask& task, const AdapterHandle& handle, std::size_t batch_size,
                             std::size_t jobs) {
    ProtocolResult result;
    result.kind = task.kind;
    result.method = std::string(method_name(handle.config.method));
    result.warnings = task.warnings;
    result.episodes.resize(task.folds.size());
    ParallelFor(task.folds.size(), jobs, [&](std::size_t i) {
        const TaskFold& fold = task.folds[i];
        const std::size_t bs = std::min(batch_size, fold.target.size());
        EpisodeReport r = run_episode(handle, fold.model, make_stream(fold.target, bs), task.classes);
        r.protocol = std::string(protocol_name(task.kind));
        r.group = fold.group;
        r.seed = task.seed;
        r.batch_size = batch_size;
        result.episodes[i] = std::move(r);
    });
    if (batch_size > task.folds.front().target.size()) {
        result.warnings.push_back("batch size " + std::to_string(batch_size) +
                                  " exceeds the stream; ran as a single batch");
    }

    double wsum = 0.0;
    for (std::size_t i = 0; i < result.episodes.size(); ++i) {
        const double w = task.weighted_aggregate ? static_cast<double>(task.folds[i].target.size()) : 1.0;
        result.accuracy += w * result.episodes[i].accuracy;
        result.macro_f1 += w * result.episodes[i].macro_f1;
        wsum += w;
    }
    result.accuracy /= wsum;
    result.macro_f1 /= wsum;
    return result;
}

ProtocolResult protocol_personalization(const ProtocolConfig& cfg, const AdapterHandle& handle) {
    return evaluate_task(prepare_task(ProtocolKind::kPersonalization, cfg), handle, cfg.batch_size, cfg.jobs);
}

ProtocolResult protocol_style(const ProtocolConfig& cfg, const AdapterHandle& handle) {
    return evaluate_task(prepare_task(ProtocolKind::kStyle, cfg), handle, cfg.batch_size, cfg.jobs);
}

ProtocolResult protocol_cross_corpus(const ProtocolConfig& cfg, const AdapterHandle& handle) {
    return evaluate_task(prepare_task(ProtocolKind::kCrossCorpus, cfg), handle, cfg.batch_size, cfg.jobs);
}

std::vector<SweepRow> sweep_batch_size(const PreparedTask& task, const std::vector<AdapterHandle>& handles,
                                       const std::vector<std::size_t>& sizes, std::size_t jobs) {
    std::vector<SweepRow> rows(handles.size() * sizes.size());
    ParallelFor(rows.size(), jobs, [&](std::size_t cell) {
        const AdapterHandle& h = handles[cell / sizes.size()];
        const std::size_t bs = sizes[cell % sizes.size()];
        const ProtocolResult r = evaluate_task(task, h, bs, 1);
        SweepRow& row = rows[cell];
        row.method = r.method;
        row.batch_size = bs;
        row.accuracy = r.accuracy;
        row.macro_f1 = r.macro_f1;
        row.clipped = bs > task.folds.front().target.size();
    });
    return rows;
}

}  // namespace driftbench
