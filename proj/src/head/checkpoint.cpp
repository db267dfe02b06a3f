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

#include "driftbench/head/checkpoint.hpp"

#include <fstream>

#include "../io/le_io.hpp"
#include "driftbench/errors.hpp"

namespace driftbench {
namespace {

void PutVec(io::LeWriter& w, std::span<const double> v) {
    for (double x : v) w.put<double>(x);
}

void GetVec(io::LeReader& r, std::span<double> v, const char* what) {
    for (double& x : v) x = r.get<double>(what);
}

}  // namespace

std::filesystem::path checkpoint_sidecar(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".json");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    ckpt.params.validate();
    ckpt.stats.validate();
    if (ckpt.stats.dim() != ckpt.params.dim()) throw DataError("checkpoint: stats/params dimension mismatch");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    io::LeWriter w(out);
    w.put_magic("TTAH");
    w.put<std::uint32_t>(kCheckpointVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.params.dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.params.classes()));
    for_each_tensor(ckpt.params, [&](ParamGroup, std::span<const double> t) { PutVec(w, t); });
    PutVec(w, ckpt.stats.feat_mean);
    PutVec(w, ckpt.stats.feat_std);
    PutVec(w, ckpt.stats.norm_running_mean);
    PutVec(w, ckpt.stats.norm_running_var);
    w.put<std::uint64_t>(ckpt.stats.count);
    if (!out) throw DataError("write failed: " + path.string());

    std::ofstream side(checkpoint_sidecar(path), std::ios::trunc);
    if (!side) throw DataError("cannot open " + checkpoint_sidecar(path).string() + " for writing");
    side << ckpt.train_config.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    io::LeReader r(in, path.string());
    r.expect_magic("TTAH");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kCheckpointVersion) {
        throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
    }
    const auto d = r.get<std::uint32_t>("dimension");
    const auto c = r.get<std::uint32_t>("class count");
    if (d == 0 || c == 0) throw DataError(path.string() + ": zero dimension or class count");

    Checkpoint ckpt;
    ckpt.params = HeadParams::zeros_like(d, c);
    for_each_tensor(ckpt.params, [&](ParamGroup g, std::span<double> t) {
        GetVec(r, t, std::string(param_group_name(g)).c_str());
    });
    ckpt.stats.feat_mean.resize(d);
    ckpt.stats.feat_std.resize(d);
    ckpt.stats.norm_running_mean.resize(d);
    ckpt.stats.norm_running_var.resize(d);
    GetVec(r, ckpt.stats.feat_mean, "feat_mean");
    GetVec(r, ckpt.stats.feat_std, "feat_std");
    GetVec(r, ckpt.stats.norm_running_mean, "norm_running_mean");
    GetVec(r, ckpt.stats.norm_running_var, "norm_running_var");
    ckpt.stats.count = r.get<std::uint64_t>("count");
    ckpt.params.validate();
    ckpt.stats.validate();

    const auto side_path = checkpoint_sidecar(path);
    if (std::filesystem::exists(side_path)) {
        std::ifstream side(side_path);
        try {
            ckpt.train_config = nlohmann::json::parse(side);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(side_path.string() + ": " + e.what());
        }
    }
    return ckpt;
}

}  // namespace driftbench
