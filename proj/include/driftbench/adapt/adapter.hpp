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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "driftbench/adapt/entropy_min.hpp"
#include "driftbench/adapt/foa.hpp"
#include "driftbench/adapt/lame.hpp"
#include "driftbench/adapt/prediction.hpp"
#include "driftbench/adapt/pseudo_label.hpp"
#include "driftbench/adapt/t3a.hpp"

namespace driftbench {

enum class Method { kSource, kTent, kEata, kSam, kPl, kT3a, kLame, kFoa };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
std::vector<Method> parse_methods(std::string_view comma_list);
const std::vector<Method>& all_methods();

// Every knob of every adapter. Only the block matching `method` is used.
struct AdapterConfig {
    Method method = Method::kSource;
    EmConfig tent;
    EmConfig eata;
    EmConfig sam;
    PlConfig pl;
    T3aConfig t3a;
    LameConfig lame;
    FoaConfig foa;
    std::uint64_t seed = 0;

    // Defaults per method, including the 0.4 ln C entropy filter and SAM rho.
    static AdapterConfig defaults(Method method, std::size_t classes);

    // Sets `seed` and the seeds of the stochastic blocks (pl, foa).
    AdapterConfig& reseed(std::uint64_t s);

    // The block that applies to `method`, as JSON.
    nlohmann::json to_json() const;
};

// Adapters only ever see unlabeled batches. reset() returns to the pristine
// source model.
class Adapter {
public:
    virtual ~Adapter() = default;
    virtual Method method() const = 0;
    virtual NormMode norm_mode() const = 0;
    virtual void reset() = 0;
    virtual Prediction adapt(const UnlabeledBatch& batch) = 0;
};

std::unique_ptr<Adapter> make_adapter(const AdapterConfig& cfg, const SourceModel& model);

}  // namespace driftbench
