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

#include "mdisc/tolerances.hpp"
#include "mdisc/errors.hpp"
#include "mdisc/numkit.hpp"
#include "mdisc/apparatus.hpp"
#include "mdisc/schemes.hpp"
#include "mdisc/qubit_schemes.hpp"
#include "mdisc/general_schemes.hpp"
#include "mdisc/optimize.hpp"
#include "mdisc/distance.hpp"
#include "mdisc/simulator.hpp"
#include "mdisc/io.hpp"
#include "mdisc/cli.hpp"
