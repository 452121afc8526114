// Copyright 2026 The mdisc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace mdisc {

/// An operation was called with inputs outside its contract.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A measurement or state failed structural validation.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `offset` is the byte position when known.
struct ParseError : std::runtime_error {
    ParseError(const std::string &what, std::size_t offset)
        : std::runtime_error(what), offset(offset) {}
    std::size_t offset;
};

/// A simulated trial reached a state the scheme says is impossible.
struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mdisc
