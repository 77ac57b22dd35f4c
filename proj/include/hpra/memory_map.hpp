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

// Local and global address spaces.
//
// Local map seen by a thread on a PE:
//
//   0x0000_0000 .. ram_size            PE-RAM (instructions and data)
//   0x4000_0000 .. 0x7FFF_FFFF         stack window (offset < range_size)
//   0x8000_0000 .. 0x8000_00FF         SFRs: thread controller + DMA engine
//   0xC000_0000 .. 0xFFFF_FFFF         remote window, write-only
//
// A remote-window address embeds a global address:
//
//   [31:30] = 0b11  [29:26] = x  [25:22] = y  [21:20] = region  [19:0] = offset

#include <cstdint>
#include <optional>

namespace hpra {

inline constexpr std::uint32_t kRamBase = 0x0000'0000u;
inline constexpr std::uint32_t kStackBase = 0x4000'0000u;
inline constexpr std::uint32_t kSfrBase = 0x8000'0000u;
inline constexpr std::uint32_t kSfrSize = 0x100u;
inline constexpr std::uint32_t kRemoteBase = 0xC000'0000u;

/// SFR word offsets, shared by the local SFR window and the TC / DMAE
/// regions of the global address space.
namespace sfr {
inline constexpr std::uint32_t kActivate = 0x00;
inline constexpr std::uint32_t kExit = 0x04;
inline constexpr std::uint32_t kStallSet = 0x08;
inline constexpr std::uint32_t kStallClr = 0x0C;
inline constexpr std::uint32_t kActivateCount = 0x10;
inline constexpr std::uint32_t kSid = 0x14;
inline constexpr std::uint32_t kStatus = 0x18;
inline constexpr std::uint32_t kDmaSa = 0x20;
inline constexpr std::uint32_t kDmaL = 0x24;
inline constexpr std::uint32_t kDmaTa = 0x28;
inline constexpr std::uint32_t kDmaStat = 0x2C;

inline constexpr std::uint32_t kNoSid = 0xFFFF'FFFFu;

constexpr bool is_tc(std::uint32_t off) { return off <= kStatus; }
constexpr bool is_dma(std::uint32_t off) {
  return off >= kDmaSa && off <= kDmaStat;
}
}  // namespace sfr

enum class Window : std::uint8_t { Ram, Stack, Sfr, Remote, Unmapped };

/// Classifies a local address. Pure function of (address, ram_size).
constexpr Window classify(std::uint32_t addr, std::uint32_t ram_size) {
  if (addr >= kRemoteBase) return Window::Remote;
  if (addr >= kSfrBase) {
    return addr - kSfrBase < kSfrSize ? Window::Sfr : Window::Unmapped;
  }
  if (addr >= kStackBase) return Window::Stack;
  return addr < ram_size ? Window::Ram : Window::Unmapped;
}

enum class Region : std::uint8_t { PeRam = 0, TcSfr = 1, DmaSfr = 2, Support = 3 };

struct Coord {
  unsigned x = 0;
  unsigned y = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

struct GlobalAddress {
  Coord at;
  Region region = Region::PeRam;
  std::uint32_t offset = 0;  // 20 bits

  friend bool operator==(const GlobalAddress&, const GlobalAddress&) = default;
};

inline constexpr unsigned kMaxGridDim = 16;
inline constexpr std::uint32_t kMaxRegionOffset = (1u << 20) - 1u;

constexpr std::uint32_t encode_global(const GlobalAddress& g) {
  return kRemoteBase | ((g.at.x & 0xFu) << 26) | ((g.at.y & 0xFu) << 22) |
         (static_cast<std::uint32_t>(g.region) << 20) |
         (g.offset & kMaxRegionOffset);
}

/// Inverse of encode_global; nullopt for words outside the remote window.
constexpr std::optional<GlobalAddress> decode_global(std::uint32_t w) {
  if (w < kRemoteBase) return std::nullopt;
  GlobalAddress g;
  g.at.x = (w >> 26) & 0xFu;
  g.at.y = (w >> 22) & 0xFu;
  g.region = static_cast<Region>((w >> 20) & 3u);
  g.offset = w & kMaxRegionOffset;
  return g;
}

/// Grid shape plus the per-region bounds needed to validate a destination.
struct Geometry {
  unsigned nx = 4;
  unsigned ny = 4;
  Coord support{0, 0};
  std::uint32_t ram_size = 64 * 1024;
  std::uint32_t ext_mem_size = 256 * 1024;

  bool contains(Coord c) const { return c.x < nx && c.y < ny; }
  std::size_t index(Coord c) const { return c.y * nx + c.x; }
  Coord coord(std::size_t i) const {
    return {static_cast<unsigned>(i % nx), static_cast<unsigned>(i / nx)};
  }

  /// A single-word write to `g` can be delivered and committed.
  bool valid_write_target(const GlobalAddress& g) const {
    if (!contains(g.at) || g.offset % 4 != 0) return false;
    const bool at_support = g.at == support;
    switch (g.region) {
      case Region::PeRam: return !at_support && g.offset < ram_size;
      case Region::TcSfr: return !at_support && sfr::is_tc(g.offset);
      case Region::DmaSfr: return !at_support && sfr::is_dma(g.offset);
      case Region::Support: return at_support && g.offset < ext_mem_size;
    }
    return false;
  }
};

/// A single-word write message routed through the mesh.
struct Packet {
  GlobalAddress dest;
  std::uint32_t data = 0;
  Coord src;
  std::uint64_t seq = 0;  // injection order, statistics only

  friend bool operator==(const Packet&, const Packet&) = default;
};

}  // namespace hpra
