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

#include <cstdlib>
#include <string>
#include <string_view>

namespace mdisc {

/// Numeric tolerances shared by every module.
///
/// The defaults are sized for double precision on tensor spaces of up to a
/// few thousand dimensions. `strict()` tightens everything by two orders of
/// magnitude and is selected by the CLI when MDISC_TOL=strict.
struct Tolerances {
    double norm = 1e-9;         // norms, traces, unit-vector checks
    double proj = 1e-8;         // projector and Hermiticity validation
    double sing = 1e-8;         // singularity, relative to the matrix norm
    double eig = 1e-8;          // "eigenvalue equals 1" tests
    double num = 1e-10;         // round-trip identities, zero-probability guard
    double angle = 1e-9;        // identical-observable threshold
    double overlap_one = 1e-7;  // ||PQ|| within this of 1 counts as intersecting

    static constexpr Tolerances defaults() { return {}; }

    static constexpr Tolerances strict() {
        Tolerances t;
        t.norm = 1e-11;
        t.proj = 1e-10;
        t.sing = 1e-10;
        t.eig = 1e-10;
        t.num = 1e-12;
        t.angle = 1e-11;
        return t;
    }

    /// Profile named by MDISC_TOL ("strict" or "default"); unknown values
    /// fall back to the defaults.
    static Tolerances from_environment() {
        const char *env = std::getenv("MDISC_TOL");
        if (env != nullptr && std::string_view(env) == "strict") {
            return strict();
        }
        return defaults();
    }

    std::string_view profile_name() const {
        return num == strict().num ? "strict" : "default";
    }
};

}  // namespace mdisc
