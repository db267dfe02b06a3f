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

#include <filesystem>
#include <string_view>

#include "driftbench/shiftgen/dataset.hpp"

namespace driftbench {

// CSV: header "id,group,label,f0,...,f{d-1}", values printed with 17 significant digits.
// TTAE binary, little-endian: "TTAE" | version u32 | d u32 | n u32, then n records of
//   id u64 | group i32 | label i32 (-1 = unlabeled) | d x f64
enum class EmbeddingFormat { kCsv, kBinary };

inline constexpr std::uint32_t kEmbeddingVersion = 1;

EmbeddingFormat parse_embedding_format(std::string_view name);
// ".csv" means CSV, anything else binary.
EmbeddingFormat embedding_format_for(const std::filesystem::path& path);

void write_embeddings(const std::filesystem::path& path, const Dataset& data, EmbeddingFormat format);
// Sniffs the "TTAE" magic; otherwise parses CSV.
Dataset read_embeddings(const std::filesystem::path& path);

}  // namespace driftbench
