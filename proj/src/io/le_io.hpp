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

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "driftbench/errors.hpp"

namespace driftbench::io {

template <typename T>
T ToLittle(T value) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&value, bytes, sizeof(T));
    }
    return value;
}

class LeWriter {
public:
    explicit LeWriter(std::ostream& out) : out_(out) {}

    template <typename T>
    void put(T value) {
        value = ToLittle(value);
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }
    void put_magic(const char (&magic)[5]) { out_.write(magic, 4); }

private:
    std::ostream& out_;
};

class LeReader {
public:
    LeReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    template <typename T>
    T get(const char* what) {
        T value;
        read_raw(reinterpret_cast<char*>(&value), sizeof(T), what);
        return ToLittle(value);
    }
    void expect_magic(const char (&magic)[5]) {
        char got[4];
        read_raw(got, 4, "magic");
        if (std::memcmp(got, magic, 4) != 0) {
            throw DataError(source_ + ": bad magic at offset 0, expected \"" + std::string(magic) + "\"");
        }
    }
    std::uint64_t offset() const { return offset_; }
    const std::string& source() const { return source_; }

private:
    void read_raw(char* dst, std::size_t n, const char* what) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw DataError(source_ + ": truncated at offset " + std::to_string(offset_) +
                            " while reading " + what);
        }
        offset_ += n;
    }

    std::istream& in_;
    std::string source_;
    std::uint64_t offset_ = 0;
};

}  // namespace driftbench::io
