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

#include <concepts>
#include <cstdint>
#include <optional>
#include <span>

#include "hpra/memory_map.hpp"

namespace hpra {

/// Something that takes packets into the local routing element. Returns false
/// when the injection queue is full this micro-cycle.
template <class I>
concept Injector = requires(I& inj, const Packet& p) {
  { inj.try_inject(p) } -> std::same_as<bool>;
};

enum class DmaWrite : std::uint8_t { Accepted, Rejected };

/// Per-PE DMA engine: streams DMAL words from local PE-RAM at DMASA to the
/// global address in DMATA, one word per micro-cycle. Writing DMATA starts
/// the transfer. The registers are frozen while a transfer is running.
class DmaEngine {
 public:
  std::uint32_t dmasa() const { return dmasa_; }
  std::uint32_t dmal() const { return dmal_; }
  std::uint32_t dmata() const { return dmata_; }
  bool active() const { return active_; }
  std::uint32_t cursor() const { return cursor_; }
  bool rejected_sticky() const { return rejected_; }

  /// `geo` validates the target range when a transfer is started; an invalid
  /// source or target range is refused like a write while active.
  DmaWrite write_sfr(std::uint32_t offset, std::uint32_t value,
                     const Geometry& geo) {
    if (offset == sfr::kDmaStat) return DmaWrite::Accepted;  // read-only
    if (active_) {
      rejected_ = true;
      return DmaWrite::Rejected;
    }
    switch (offset) {
      case sfr::kDmaSa:
        dmasa_ = value;
        return DmaWrite::Accepted;
      case sfr::kDmaL:
        dmal_ = value;
        return DmaWrite::Accepted;
      case sfr::kDmaTa:
        if (dmal_ > 0 && !range_valid(value, geo)) {
          rejected_ = true;
          return DmaWrite::Rejected;
        }
        dmata_ = value;
        cursor_ = 0;
        active_ = dmal_ > 0;
        return DmaWrite::Accepted;
      default:
        rejected_ = true;
        return DmaWrite::Rejected;
    }
  }

  std::uint32_t read_sfr(std::uint32_t offset) {
    switch (offset) {
      case sfr::kDmaSa: return dmasa_;
      case sfr::kDmaL: return dmal_;
      case sfr::kDmaTa: return dmata_;
      case sfr::kDmaStat: {
        const std::uint32_t v = (active_ ? 1u : 0u) | (rejected_ ? 2u : 0u);
        rejected_ = false;
        return v;
      }
      default: return 0;
    }
  }

  /// Sends at most one word. Holds position when the injector is full.
  template <Injector Inj>
  std::optional<Packet> step(std::span<const std::uint8_t> ram, Inj& inj,
                             Coord self) {
    if (!active_) return std::nullopt;
    const std::uint32_t src = dmasa_ + 4 * cursor_;
    std::uint32_t word = 0;
    for (unsigned b = 0; b < 4; ++b) {
      word |= static_cast<std::uint32_t>(ram[src + b]) << (8 * b);
    }
    Packet p;
    p.dest = *decode_global(dmata_ + 4 * cursor_);
    p.data = word;
    p.src = self;
    if (!inj.try_inject(p)) return std::nullopt;
    if (++cursor_ == dmal_) active_ = false;
    return p;
  }

 private:
  bool range_valid(std::uint32_t target, const Geometry& geo) const {
    if (dmasa_ % 4 != 0 || dmal_ > geo.ram_size / 4 ||
        dmasa_ > geo.ram_size - 4 * dmal_) {
      return false;
    }
    const auto first = decode_global(target);
    const auto last = decode_global(target + 4 * (dmal_ - 1));
    if (!first || !last || first->at != last->at || first->region != last->region) {
      return false;
    }
    return geo.valid_write_target(*first) && geo.valid_write_target(*last);
  }

  std::uint32_t dmasa_ = 0;
  std::uint32_t dmal_ = 0;
  std::uint32_t dmata_ = 0;
  bool active_ = false;
  std::uint32_t cursor_ = 0;
  bool rejected_ = false;
};

}  // namespace hpra
