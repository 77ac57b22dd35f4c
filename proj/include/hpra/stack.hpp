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

// Shared PE-STACK: R equally sized ranges handed out lazily to threads on
// their first stack-window access. A thread that finds every range owned is
// parked (StackWait) and retried once some owner releases its range.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpra/memory_map.hpp"
#include "hpra/thread_controller.hpp"

namespace hpra {

struct StackConfig {
  unsigned ranges = 8;
  std::uint32_t range_size = 4096;
};

enum class StackStatus : std::uint8_t { Ok, StackFull, OutOfRange };

struct StackTranslation {
  StackStatus status = StackStatus::Ok;
  std::uint32_t phys = 0;
};

class StackTlb {
 public:
  explicit StackTlb(StackConfig cfg) : range_size_(cfg.range_size), ranges_(cfg.ranges) {
    if (cfg.ranges == 0) throw std::invalid_argument("stack_ranges must be >= 1");
    if (cfg.range_size == 0 || (cfg.range_size & (cfg.range_size - 1)) != 0) {
      throw std::invalid_argument("stack_range_size must be a power of two");
    }
  }

  std::uint32_t range_size() const { return range_size_; }
  unsigned range_count() const { return static_cast<unsigned>(ranges_.size()); }
  const std::vector<std::optional<Sid>>& ranges() const { return ranges_; }
  const std::vector<Sid>& wait_set() const { return waiters_; }

  std::optional<unsigned> range_of(Sid sid) const {
    for (unsigned i = 0; i < ranges_.size(); ++i) {
      if (ranges_[i] == sid) return i;
    }
    return std::nullopt;
  }

  /// Maps a stack-window address of `sid` to a physical PE-STACK byte
  /// address, allocating the lowest free range on first use.
  StackTranslation translate(Sid sid, std::uint32_t local_addr) {
    const std::uint32_t offset = local_addr - kStackBase;
    if (local_addr < kStackBase || offset >= range_size_) {
      return {StackStatus::OutOfRange, 0};
    }
    std::optional<unsigned> r = range_of(sid);
    if (!r) {
      for (unsigned i = 0; i < ranges_.size(); ++i) {
        if (!ranges_[i]) {
          ranges_[i] = sid;
          r = i;
          break;
        }
      }
    }
    if (!r) {
      if (std::find(waiters_.begin(), waiters_.end(), sid) == waiters_.end()) {
        waiters_.push_back(sid);
      }
      return {StackStatus::StackFull, 0};
    }
    return {StackStatus::Ok, *r * range_size_ + offset};
  }

  /// Frees the range owned by `sid`, if any. Returns the threads that were
  /// waiting for a range; they all get to retry.
  std::vector<Sid> release(Sid sid) {
    const std::optional<unsigned> r = range_of(sid);
    if (!r) return {};
    ranges_[*r].reset();
    std::vector<Sid> woken;
    woken.swap(waiters_);
    return woken;
  }

  std::string check_invariants(const ThreadController* tc = nullptr) const {
    std::vector<Sid> owners;
    for (const auto& o : ranges_) {
      if (!o) continue;
      if (std::find(owners.begin(), owners.end(), *o) != owners.end()) {
        return "SID owns two ranges";
      }
      owners.push_back(*o);
    }
    if (tc) {
      for (Sid w : waiters_) {
        if (tc->slot(w).state != ThreadState::StackWait) {
          return "waiter not in StackWait";
        }
      }
    }
    return {};
  }

 private:
  std::uint32_t range_size_;
  std::vector<std::optional<Sid>> ranges_;
  std::vector<Sid> waiters_;
};

/// TLB plus the physical PE-STACK storage behind it.
class StackMemory {
 public:
  explicit StackMemory(StackConfig cfg)
      : tlb_(cfg), bytes_(static_cast<std::size_t>(cfg.ranges) * cfg.range_size) {}

  StackTlb& tlb() { return tlb_; }
  const StackTlb& tlb() const { return tlb_; }

  std::uint32_t read(std::uint32_t phys, unsigned width) const {
    std::uint32_t v = 0;
    std::memcpy(&v, bytes_.data() + phys, width);
    return v;
  }
  void write(std::uint32_t phys, unsigned width, std::uint32_t v) {
    std::memcpy(bytes_.data() + phys, &v, width);
  }

 private:
  StackTlb tlb_;
  std::vector<std::uint8_t> bytes_;
};

}  // namespace hpra
