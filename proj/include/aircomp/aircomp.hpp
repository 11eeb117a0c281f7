// SPDX-License-Identifier: Apache-2.0
//
// aircomp-relay: two-phase amplify-and-forward relaying for hierarchical
// over-the-air computation
// Copyright (C) 2026 the aircomp-relay authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "aircomp/channel.hpp"
#include "aircomp/config.hpp"
#include "aircomp/denoise.hpp"
#include "aircomp/harness.hpp"
#include "aircomp/mse.hpp"
#include "aircomp/oracle.hpp"
#include "aircomp/relay_update.hpp"
#include "aircomp/solver.hpp"
#include "aircomp/types.hpp"
#include "aircomp/wd_update.hpp"
