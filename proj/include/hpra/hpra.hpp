// Copyright 2026 The hpra-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "hpra/assembler.hpp"
#include "hpra/bench.hpp"
#include "hpra/cli.hpp"
#include "hpra/config.hpp"
#include "hpra/dma.hpp"
#include "hpra/fabric.hpp"
#include "hpra/isa.hpp"
#include "hpra/memory_map.hpp"
#include "hpra/pe.hpp"
#include "hpra/perf.hpp"
#include "hpra/stack.hpp"
#include "hpra/thread_controller.hpp"
#include "hpra/trace.hpp"
