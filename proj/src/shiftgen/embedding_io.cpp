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

#include "driftbench/shiftgen/embedding_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "../io/le_io.hpp"
#include "driftbench/errors.hpp"

namespace driftbench {
namespace {

std::vector<std::string_view> SplitCsv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
T ParseField(std::string_view text, const std::string& where) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw DataError(where + ": cannot parse '" + std::string(text) + "'");
    }
    return value;
}

void WriteCsv(std::ostream& out, const Dataset& data) {
    out << "id,group,label";
    for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << j;
    out << '\n';
    char buf[64];
    for (std::size_t r = 0; r < data.size(); ++r) {
        out << data.ids[r] << ',' << data.groups[r] << ',' << data.labels[r];
        for (double v : data.embeddings.row(r)) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

Dataset ReadCsv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(source + ": empty CSV file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = SplitCsv(line);
    if (header.size() < 4 || header[0] != "id" || header[1] != "group" || header[2] != "label") {
        throw DataError(source + ": line 1: header must start with id,group,label,f0");
    }
    const std::size_t d = header.size() - 3;
    for (std::size_t j = 0; j < d; ++j) {
        if (header[3 + j] != "f" + std::to_string(j)) {
            throw DataError(source + ": line 1: expected column f" + std::to_string(j));
        }
    }
    Dataset data;
    Vec values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = SplitCsv(line);
        const std::string where = source + ": line " + std::to_string(line_no);
        if (fields.size() != d + 3) {
            throw DataError(where + ": expected " + std::to_string(d + 3) + " fields, got " +
                            std::to_string(fields.size()));
        }
        data.ids.push_back(ParseField<std::uint64_t>(fields[0], where));
        data.groups.push_back(ParseField<int>(fields[1], where));
        data.labels.push_back(ParseField<int>(fields[2], where));
        for (std::size_t j = 0; j < d; ++j) values.push_back(ParseField<double>(fields[3 + j], where));
    }
    data.embeddings = Matrix(data.ids.size(), d, std::move(values));
    return data;
}

void WriteBinary(std::ostream& out, const Dataset& data) {
    io::LeWriter w(out);
    w.put_magic("TTAE");
    w.put<std::uint32_t>(kEmbeddingVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(data.dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(data.size()));
    for (std::size_t r = 0; r < data.size(); ++r) {
        w.put<std::uint64_t>(data.ids[r]);
        w.put<std::int32_t>(data.groups[r]);
        w.put<std::int32_t>(data.labels[r]);
        for (double v : data.embeddings.row(r)) w.put<double>(v);
    }
}

Dataset ReadBinary(std::istream& in, const std::string& source) {
    io::LeReader r(in, source);
    r.expect_magic("TTAE");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kEmbeddingVersion) {
        throw DataError(source + ": unsupported TTAE version " + std::to_string(version));
    }
    const auto d = r.get<std::uint32_t>("dimension");
    const auto n = r.get<std::uint32_t>("record count");
    if (d == 0) throw DataError(source + ": zero embedding dimension");
    Dataset data;
    data.ids.reserve(n);
    data.groups.reserve(n);
    data.labels.reserve(n);
    Vec values;
    values.reserve(static_cast<std::size_t>(n) * d);
    for (std::uint32_t i = 0; i < n; ++i) {
        data.ids.push_back(r.get<std::uint64_t>("record id"));
        data.groups.push_back(r.get<std::int32_t>("record group"));
        data.labels.push_back(r.get<std::int32_t>("record label"));
        for (std::uint32_t j = 0; j < d; ++j) values.push_back(r.get<double>("record feature"));
    }
    data.embeddings = Matrix(n, d, std::move(values));
    return data;
}

}  // namespace

EmbeddingFormat parse_embedding_format(std::string_view name) {
    if (name == "csv") return EmbeddingFormat::kCsv;
    if (name == "ttae" || name == "binary") return EmbeddingFormat::kBinary;
    throw UsageError("unknown embedding format '" + std::string(name) + "'");
}

EmbeddingFormat embedding_format_for(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? EmbeddingFormat::kCsv : EmbeddingFormat::kBinary;
}

void write_embeddings(const std::filesystem::path& path, const Dataset& data, EmbeddingFormat format) {
    data.validate(std::numeric_limits<std::size_t>::max());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    if (format == EmbeddingFormat::kCsv) {
        WriteCsv(out, data);
    } else {
        WriteBinary(out, data);
    }
    if (!out) throw DataError("write failed: " + path.string());
}

Dataset read_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    char magic[4] = {};
    in.read(magic, 4);
    const bool binary = in.gcount() == 4 && std::string_view(magic, 4) == "TTAE";
    in.clear();
    in.seekg(0);
    Dataset data = binary ? ReadBinary(in, path.string()) : ReadCsv(in, path.string());
    if (!all_finite(data.embeddings.values())) throw DataError(path.string() + ": non-finite feature value");
    return data;
}

}  // namespace driftbench
