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

#include "driftbench/harness/episode.hpp"

#include <algorithm>
#include <chrono>

#include "driftbench/errors.hpp"

namespace driftbench {

std::vector<FeatureBatch> make_stream(const FeatureBatch& data, std::size_t batch_size) {
    if (batch_size == 0) throw UsageError("batch size must be positive");
    std::vector<FeatureBatch> out;
    const std::size_t n = data.size();
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t stop = std::min(n, start + batch_size);
        idx.resize(stop - start);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;
        FeatureBatch b;
        b.embeddings = data.embeddings.gather_rows(idx);
        if (data.labels) b.labels = std::vector<int>(data.labels->begin() + static_cast<std::ptrdiff_t>(start),
                                                     data.labels->begin() + static_cast<std::ptrdiff_t>(stop));
        if (data.group_ids) {
            b.group_ids = std::vector<int>(data.group_ids->begin() + static_cast<std::ptrdiff_t>(start),
                                           data.group_ids->begin() + static_cast<std::ptrdiff_t>(stop));
        }
        out.push_back(std::move(b));
    }
    return out;
}

AdapterSession::AdapterSession(AdapterHandle handle, const SourceModel& model)
    : handle_(std::move(handle)), adapter_(make_adapter(handle_.config, model)) {}

EpisodeReport AdapterSession::run(const std::vector<FeatureBatch>& stream, std::size_t classes) {
    if (stream.empty()) throw DataError("episode: empty stream");
    for (const auto& b : stream) {
        if (!b.labels) throw DataError("episode: stream batches need labels for scoring");
        b.validate(classes);
    }
    if (used_ && handle_.reset == ResetPolicy::kEpisodic) adapter_->reset();
    used_ = true;

    const auto t0 = std::chrono::steady_clock::now();
    EpisodeReport report;
    report.method = std::string(method_name(handle_.config.method));
    report.seed = handle_.config.seed;
    report.batch_size = stream.front().size();
    report.config = handle_.config.to_json();
    report.config["reset"] = handle_.reset == ResetPolicy::kEpisodic ? "episodic" : "continual";

    std::vector<int> all_preds;
    std::vector<int> all_truth;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const FeatureBatch& batch = stream[i];
        Prediction pred;
        BatchRow row;
        row.index = i;
        row.size = batch.size();
        row.partial = batch.size() < report.batch_size;
        try {
            pred = adapter_->adapt(batch.unlabeled());
        } catch (const NumericError& e) {
            // Surface the incident and fall back to a uniform guess for this batch.
            pred.labels.assign(batch.size(), 0);
            pred.incident = true;
            pred.incident_detail = e.what();
        }
        if (pred.labels.size() != batch.size()) throw DataError("adapter returned wrong number of predictions");
        for (std::size_t j = 0; j < batch.size(); ++j) {
            if (pred.labels[j] == (*batch.labels)[j]) ++correct;
        }
        all_preds.insert(all_preds.end(), pred.labels.begin(), pred.labels.end());
        all_truth.insert(all_truth.end(), batch.labels->begin(), batch.labels->end());
        row.loss = pred.loss;
        row.running_accuracy = static_cast<double>(correct) / static_cast<double>(all_truth.size());
        row.incident = pred.incident;
        row.incident_detail = pred.incident_detail;
        row.warning = pred.warning;
        if (row.incident) ++report.incidents;
        if (!row.warning.empty()) ++report.warnings;
        report.rows.push_back(std::move(row));
    }
    const Scores s = score(all_preds, all_truth, classes);
    report.accuracy = s.accuracy;
    report.macro_f1 = s.macro_f1;
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

EpisodeReport run_episode(const AdapterHandle& handle, const SourceModel& model,
                          const std::vector<FeatureBatch>& stream, std::size_t classes) {
    AdapterSession session(handle, model);
    return session.run(stream, classes);
}

}  // namespace driftbench
