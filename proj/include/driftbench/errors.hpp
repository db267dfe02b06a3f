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

#include <stdexcept>
#include <string>

namespace driftbench {

// Base of every library error. The CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments or configuration.
class UsageError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent data: shape mismatches, bad files, labels out of range.
class DataError : public Error {
public:
    using Error::Error;
};

// Non-finite values, off-simplex probabilities, failed solvers.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace driftbench
