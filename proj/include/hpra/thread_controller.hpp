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

// Barrel machinery of one PE: D thread contexts, a C-deep in-flight window
// and the thread controller operations (Activate, Activate-and-Count, Exit,
// Stall set/clear, SID).
//
// Timing: a pass issued at micro-cycle t occupies the pipeline for C
// micro-cycles and retires at t + C. Each micro-cycle first retires the
// oldest pass (its macro-cycle effects land here) and then issues the next
// eligible thread, so a thread can re-issue in the micro-cycle its previous
// pass retires.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpra/isa.hpp"
#include "hpra/memory_map.hpp"

namespace hpra {

using Sid = unsigned;

enum class ThreadState : std::uint8_t {
  Free,
  Active,
  Stalled,
  InFlight,
  StackWait,
  Halted,
};

inline const char* to_string(ThreadState s) {
  switch (s) {
    case ThreadState::Free: return "free";
    case ThreadState::Active: return "active";
    case ThreadState::Stalled: return "stalled";
    case ThreadState::InFlight: return "inflight";
    case ThreadState::StackWait: return "stackwait";
    case ThreadState::Halted: return "halted";
  }
  return "?";
}

struct ThreadSlot {
  Sid sid = 0;
  ThreadState state = ThreadState::Free;
  core::ArchState context;
  std::uint32_t ac = 0;
  std::optional<Sid> ft;
  bool stall_requested = false;
  // Result of this thread's most recent ACTIVATE / ACTIVATE_COUNT write.
  std::uint32_t last_activated = sfr::kNoSid;
  std::optional<core::Trap> trap;

  bool live() const {
    return state != ThreadState::Free && state != ThreadState::Halted;
  }
};

/// How the pass that just retired ended.
enum class PassOutcome : std::uint8_t {
  Continue,   // normal progress or a retry that keeps the thread runnable
  StackFull,  // parked until a stack range is released
  Trapped,
  Exited,     // the retire handler already called exit_thread()
};

struct IssueRecord {
  std::optional<Sid> retired;
  std::optional<Sid> issued;
};

class ThreadController {
 public:
  ThreadController(unsigned c, unsigned d) : c_(c), ring_(c) {
    if (c < 1) throw std::invalid_argument("C must be >= 1");
    if (d < c) throw std::invalid_argument("D must be >= C");
    if (d > 32) throw std::invalid_argument("D must be <= 32 (SFR mask width)");
    slots_.resize(d);
    for (Sid s = 0; s < d; ++s) slots_[s].sid = s;
  }

  unsigned c() const { return c_; }
  unsigned d() const { return static_cast<unsigned>(slots_.size()); }

  const ThreadSlot& slot(Sid s) const { return slots_.at(s); }
  ThreadSlot& slot(Sid s) { return slots_.at(s); }
  const std::vector<ThreadSlot>& slots() const { return slots_; }

  /// Starts a thread in the lowest-index free slot. nullopt on overflow, in
  /// which case the sticky overflow status bit is set.
  std::optional<Sid> activate(std::uint32_t start_addr) {
    for (ThreadSlot& s : slots_) {
      if (s.state != ThreadState::Free) continue;
      const Sid sid = s.sid;
      s = ThreadSlot{};
      s.sid = sid;
      s.state = ThreadState::Active;
      s.context.pc = start_addr;  // all registers, including sp, start at 0
      return sid;
    }
    overflow_sticky_ = true;
    return std::nullopt;
  }

  std::optional<Sid> activate_and_count(Sid caller, std::uint32_t start_addr) {
    if (!slot(caller).live()) {
      throw std::logic_error("activate_and_count from a non-live slot");
    }
    const std::optional<Sid> child = activate(start_addr);
    if (child) {
      slots_[caller].ac += 1;
      slots_[*child].ft = caller;
    }
    return child;
  }

  /// Frees `sid`. Decrements the parent's fork counter and, when it reaches
  /// zero, clears the parent's stall flag. Children of `sid` are orphaned.
  void exit_thread(Sid sid) {
    ThreadSlot& s = slot(sid);
    if (s.state == ThreadState::Free) return;
    if (s.ft) {
      ThreadSlot& parent = slots_[*s.ft];
      if (parent.ac > 0 && --parent.ac == 0 && parent.stall_requested) {
        clear_stall_bit(parent);
      }
    }
    for (ThreadSlot& other : slots_) {
      if (other.ft == sid) other.ft.reset();
    }
    s = ThreadSlot{};
    s.sid = sid;
  }

  void set_stall(std::uint32_t mask) {
    for (ThreadSlot& s : slots_) {
      if (!(mask >> s.sid & 1u) || !s.live()) continue;
      s.stall_requested = true;
      if (s.state == ThreadState::Active) s.state = ThreadState::Stalled;
    }
  }

  void clear_stall(std::uint32_t mask) {
    for (ThreadSlot& s : slots_) {
      if ((mask >> s.sid & 1u) && s.live()) clear_stall_bit(s);
    }
  }

  std::uint32_t stall_mask() const {
    std::uint32_t m = 0;
    for (const ThreadSlot& s : slots_) {
      if (s.stall_requested) m |= 1u << s.sid;
    }
    return m;
  }

  Sid read_sid(Sid executing) const { return executing; }

  /// Moves a StackWait thread back into the rotation (or to Stalled when a
  /// stall is pending).
  void wake_from_stack_wait(Sid sid) {
    ThreadSlot& s = slot(sid);
    if (s.state != ThreadState::StackWait) return;
    s.state = s.stall_requested ? ThreadState::Stalled : ThreadState::Active;
  }

  /// Reads and clears the STATUS register.
  std::uint32_t read_status() {
    const std::uint32_t v = overflow_sticky_ ? 1u : 0u;
    overflow_sticky_ = false;
    return v;
  }
  bool overflow_sticky() const { return overflow_sticky_; }

  /// Round-robin over Active slots, starting after the last issued SID.
  std::optional<Sid> select_next() {
    const unsigned n = d();
    for (unsigned i = 1; i <= n; ++i) {
      const Sid cand = (rr_cursor_ + i) % n;
      if (slots_[cand].state == ThreadState::Active) {
        rr_cursor_ = cand;
        return cand;
      }
    }
    return std::nullopt;
  }

  Sid rr_cursor() const { return rr_cursor_; }
  void set_rr_cursor(Sid s) { rr_cursor_ = s % d(); }

  const std::vector<std::optional<Sid>>& inflight_ring() const { return ring_; }
  unsigned inflight_count() const {
    unsigned n = 0;
    for (const auto& e : ring_) n += e.has_value();
    return n;
  }

  /// Advances the barrel pipeline one micro-cycle. `on_retire(sid)` executes
  /// the retiring thread's macro-cycle and reports how it ended.
  template <class RetireFn>
  IssueRecord step(RetireFn&& on_retire) {
    IssueRecord rec;
    rec.retired = ring_[head_];
    ring_[head_].reset();
    if (rec.retired) {
      const PassOutcome out = on_retire(*rec.retired);
      finish_pass(*rec.retired, out);
    }
    rec.issued = select_next();
    if (rec.issued) slots_[*rec.issued].state = ThreadState::InFlight;
    ring_[head_] = rec.issued;
    head_ = (head_ + 1) % c_;
    return rec;
  }

  unsigned live_count() const {
    unsigned n = 0;
    for (const ThreadSlot& s : slots_) n += s.live();
    return n;
  }
  unsigned occupied_count() const {
    unsigned n = 0;
    for (const ThreadSlot& s : slots_) n += s.state != ThreadState::Free;
    return n;
  }

  /// Structural invariants; returns an empty string when all hold.
  std::string check_invariants() const {
    std::vector<unsigned> seen(d(), 0);
    unsigned inflight = 0;
    for (const auto& e : ring_) {
      if (!e) continue;
      ++inflight;
      if (++seen[*e] > 1) return "SID twice in flight";
      if (slots_[*e].state != ThreadState::InFlight) {
        return "ring entry not in InFlight state";
      }
    }
    if (inflight > c_) return "more than C in flight";
    for (const ThreadSlot& s : slots_) {
      if (s.state == ThreadState::InFlight && seen[s.sid] == 0) {
        return "InFlight slot missing from ring";
      }
      if (s.state == ThreadState::Free && (s.ac != 0 || s.ft)) {
        return "free slot with fork bookkeeping";
      }
      if (s.ft && slots_[*s.ft].state == ThreadState::Free) {
        return "ft names a free slot";
      }
    }
    return {};
  }

 private:
  void clear_stall_bit(ThreadSlot& s) {
    s.stall_requested = false;
    if (s.state == ThreadState::Stalled) s.state = ThreadState::Active;
  }

  void finish_pass(Sid sid, PassOutcome out) {
    ThreadSlot& s = slots_[sid];
    switch (out) {
      case PassOutcome::Exited:
        return;
      case PassOutcome::Trapped:
        s.state = ThreadState::Halted;
        return;
      case PassOutcome::StackFull:
        s.state = ThreadState::StackWait;
        return;
      case PassOutcome::Continue:
        s.state = s.stall_requested ? ThreadState::Stalled : ThreadState::Active;
        return;
    }
  }

  unsigned c_;
  std::vector<ThreadSlot> slots_;
  std::vector<std::optional<Sid>> ring_;
  unsigned head_ = 0;
  Sid rr_cursor_ = 0;
  bool overflow_sticky_ = false;
};

}  // namespace hpra
