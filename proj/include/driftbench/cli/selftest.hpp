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
#include <string>
#include <vector>

namespace driftbench::cli {

struct SelftestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestSummary {
    std::vector<SelftestCheck> checks;

    std::size_t passed() const;
    std::size_t failed() const { return checks.size() - passed(); }
};

// Gradient checks against central differences, LAME objective monotonicity,
// CMA-ES on the sphere and scalar/SIMD kernel agreement.
SelftestSummary run_selftest(std::uint64_t seed);

}  // namespace driftbench::cli
