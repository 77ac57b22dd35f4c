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

#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "hpra/memory_map.hpp"

namespace hpra {

enum class TraceKind : std::uint8_t {
  Issue,
  Retire,
  Activate,
  Exit,
  Stall,
  StackWait,
  PacketInject,
  PacketDeliver,
  Dma,
  Watchdog,
  Trap,
};

inline const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::Issue: return "issue";
    case TraceKind::Retire: return "retire";
    case TraceKind::Activate: return "activate";
    case TraceKind::Exit: return "exit";
    case TraceKind::Stall: return "stall";
    case TraceKind::StackWait: return "stackwait";
    case TraceKind::PacketInject: return "packet-inject";
    case TraceKind::PacketDeliver: return "packet-deliver";
    case TraceKind::Dma: return "dma";
    case TraceKind::Watchdog: return "watchdog";
    case TraceKind::Trap: return "trap";
  }
  return "?";
}

struct TraceRecord {
  std::uint64_t micro_cycle = 0;
  Coord at;
  TraceKind kind = TraceKind::Issue;
  std::optional<unsigned> sid;
  std::uint32_t pc = 0;
  std::uint32_t detail = 0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using TraceSink = std::function<void(const TraceRecord&)>;

/// Column order: micro_cycle, x, y, kind, sid ("-" when none), pc, detail.
inline std::string to_tsv(const TraceRecord& r) {
  char buf[128];
  const std::string sid = r.sid ? std::to_string(*r.sid) : std::string("-");
  std::snprintf(buf, sizeof buf, "%llu\t%u\t%u\t%s\t%s\t0x%08x\t0x%08x",
                static_cast<unsigned long long>(r.micro_cycle), r.at.x, r.at.y,
                to_string(r.kind), sid.c_str(), r.pc, r.detail);
  return buf;
}

inline constexpr const char* kTraceHeader =
    "micro_cycle\tx\ty\tkind\tsid\tpc\tdetail";

}  // namespace hpra
