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

// One programming element: an RV32IM barrel core (thread controller + shared
// context memory), the shared PE-STACK, the DMA engine, and a dual-ported
// PE-RAM holding both code and data.
//
// Per micro-cycle, in this order:
//   1. barrel step: retire the oldest pass (its macro-cycle executes against
//      the execution port), then issue the next thread;
//   2. DMA step: at most one word into the local routing element;
//   3. inbound packet commit through the network port.
// A network write therefore wins a same-address collision with a thread
// store retiring in the same micro-cycle.

#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hpra/dma.hpp"
#include "hpra/isa.hpp"
#include "hpra/memory_map.hpp"
#include "hpra/stack.hpp"
#include "hpra/thread_controller.hpp"
#include "hpra/trace.hpp"

namespace hpra {

struct PeConfig {
  std::uint32_t ram_size = 64 * 1024;
  unsigned c = 4;
  unsigned d = 16;
  StackConfig stack;
  Coord at;
  // Consecutive bubble-only micro-cycles (with live threads) before a
  // watchdog event. 0 selects 10 * C * D.
  std::uint64_t watchdog_window = 0;

  void validate() const {
    if (c < 2) throw std::invalid_argument("PE config: C must be >= 2");
    if (d < c) throw std::invalid_argument("PE config: D must be >= C");
    if (d > 32) throw std::invalid_argument("PE config: D must be <= 32");
    if (ram_size < 4 || (ram_size & (ram_size - 1)) != 0 || ram_size > kStackBase) {
      throw std::invalid_argument("PE config: ram_size must be a power of two");
    }
    if (stack.ranges > d) {
      throw std::invalid_argument("PE config: stack_ranges must be <= D");
    }
  }
  std::uint64_t effective_watchdog() const {
    return watchdog_window ? watchdog_window : 10ull * c * d;
  }
};

struct PeStats {
  std::uint64_t micro_cycles = 0;
  std::uint64_t issued = 0;
  std::uint64_t bubbles = 0;
  std::uint64_t retired = 0;
  std::uint64_t stall_events = 0;
  std::uint64_t stackwait_events = 0;
  std::uint64_t traps = 0;
  std::uint64_t watchdog_events = 0;
  std::uint64_t packets_out = 0;
  std::uint64_t packets_in = 0;
  std::uint64_t network_faults = 0;
  std::uint64_t dma_rejects = 0;

  double issue_density() const {
    return micro_cycles ? static_cast<double>(issued) / micro_cycles : 0.0;
  }
};

/// Outcome of one execution-port access.
struct MmioResult {
  core::MemResult mem;
  bool exit_requested = false;
  bool stack_full = false;
};

/// Injector that refuses everything; for PEs run without a fabric.
struct NullInjector {
  bool try_inject(const Packet&) { return false; }
};

class Pe {
 public:
  Pe(PeConfig cfg, Geometry geo)
      : cfg_((cfg.validate(), cfg)), geo_(geo), tc_(cfg.c, cfg.d),
        stack_(cfg.stack), ram_(cfg.ram_size, 0) {
    geo_.ram_size = cfg.ram_size;
  }

  const PeConfig& config() const { return cfg_; }
  const Geometry& geometry() const { return geo_; }
  Coord at() const { return cfg_.at; }

  ThreadController& tc() { return tc_; }
  const ThreadController& tc() const { return tc_; }
  StackMemory& stack() { return stack_; }
  const StackMemory& stack() const { return stack_; }
  DmaEngine& dma() { return dma_; }
  const DmaEngine& dma() const { return dma_; }
  const PeStats& stats() const { return stats_; }
  std::uint64_t now() const { return stats_.micro_cycles; }

  std::span<std::uint8_t> ram() { return ram_; }
  std::span<const std::uint8_t> ram() const { return ram_; }

  std::uint32_t read_word(std::uint32_t off) const { return load_ram(off, 4); }
  void write_word(std::uint32_t off, std::uint32_t v) { store_ram(off, 4, v); }

  void load_image(std::uint32_t offset, std::span<const std::uint32_t> words) {
    if (offset % 4 != 0 || offset > cfg_.ram_size ||
        words.size() > (cfg_.ram_size - offset) / 4) {
      throw std::out_of_range("image does not fit in PE-RAM");
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      store_ram(offset + 4 * static_cast<std::uint32_t>(i), 4, words[i]);
    }
  }

  void set_trace(TraceSink sink) { trace_ = std::move(sink); }

  /// Called after every retired pass that left the thread runnable, with the
  /// thread's architectural state at the end of that macro-cycle.
  using RetireObserver = std::function<void(Sid, const core::ArchState&)>;
  void set_retire_observer(RetireObserver obs) { retire_obs_ = std::move(obs); }

  std::optional<Sid> activate(std::uint32_t start) {
    const auto sid = tc_.activate(start);
    emit(TraceKind::Activate, sid, start, sid ? *sid : sfr::kNoSid);
    return sid;
  }

  /// Execution-port access on behalf of thread `sid`.
  template <Injector Inj>
  MmioResult mmio_access(Sid sid, core::MemKind kind, std::uint32_t addr,
                         unsigned width, std::uint32_t value, Inj& inj) {
    MmioResult res;
    const bool is_load = kind == core::MemKind::Load;
    switch (classify(addr, cfg_.ram_size)) {
      case Window::Ram:
        if (addr + width > cfg_.ram_size) {
          res.mem = core::MemResult::fault();
        } else if (is_load) {
          res.mem = core::MemResult::ok(load_ram(addr, width));
        } else {
          store_ram(addr, width, value);
        }
        return res;
      case Window::Stack: {
        const StackTranslation t = stack_.tlb().translate(sid, addr);
        if (t.status == StackStatus::OutOfRange) {
          res.mem = core::MemResult::fault();
        } else if (t.status == StackStatus::StackFull) {
          res.mem = core::MemResult::retry();
          res.stack_full = true;
        } else if (is_load) {
          res.mem = core::MemResult::ok(stack_.read(t.phys, width));
        } else {
          stack_.write(t.phys, width, value);
        }
        return res;
      }
      case Window::Sfr:
        if (width != 4) {
          res.mem = core::MemResult::fault();
          return res;
        }
        return is_load ? sfr_read(sid, addr - kSfrBase)
                       : sfr_write(sid, addr - kSfrBase, value);
      case Window::Remote: {
        const auto g = decode_global(addr);
        if (is_load || width != 4 || !g || !geo_.valid_write_target(*g)) {
          res.mem = core::MemResult::fault();
          return res;
        }
        Packet p{*g, value, cfg_.at, 0};
        if (!inj.try_inject(p)) {
          res.mem = core::MemResult::retry();
          return res;
        }
        ++stats_.packets_out;
        emit(TraceKind::PacketInject, sid, addr, value);
        return res;
      }
      case Window::Unmapped:
        break;
    }
    res.mem = core::MemResult::fault();
    return res;
  }

  /// Advances the PE one micro-cycle.
  template <Injector Inj>
  IssueRecord tick(const std::optional<Packet>& inbound, Inj& inj) {
    const IssueRecord rec =
        tc_.step([&](Sid sid) { return execute_pass(sid, inj); });
    if (rec.issued) {
      ++stats_.issued;
      emit(TraceKind::Issue, rec.issued, tc_.slot(*rec.issued).context.pc, 0);
    } else {
      ++stats_.bubbles;
    }
    update_watchdog(rec);

    if (auto p = dma_.step(std::span<const std::uint8_t>(ram_), inj, cfg_.at)) {
      ++stats_.packets_out;
      emit(TraceKind::Dma, std::nullopt, encode_global(p->dest), p->data);
    }

    if (inbound) commit_inbound(*inbound);
    ++stats_.micro_cycles;
    return rec;
  }

  IssueRecord tick() {
    NullInjector none;
    return tick(std::nullopt, none);
  }

  /// No live threads and no DMA transfer in progress.
  bool idle() const { return tc_.live_count() == 0 && !dma_.active(); }

  bool watchdog_tripped() const { return bubble_streak_ >= cfg_.effective_watchdog(); }

 private:
  template <Injector Inj>
  struct ThreadPort {
    Pe& pe;
    Sid sid;
    Inj& inj;
    bool exit_requested = false;
    bool stack_full = false;

    core::MemResult load(std::uint32_t a, unsigned w) {
      return note(pe.mmio_access(sid, core::MemKind::Load, a, w, 0, inj));
    }
    core::MemResult store(std::uint32_t a, unsigned w, std::uint32_t v) {
      return note(pe.mmio_access(sid, core::MemKind::Store, a, w, v, inj));
    }
    core::MemResult note(const MmioResult& r) {
      exit_requested |= r.exit_requested;
      stack_full |= r.stack_full;
      return r.mem;
    }
  };

  template <Injector Inj>
  PassOutcome execute_pass(Sid sid, Inj& inj) {
    ThreadSlot& slot = tc_.slot(sid);
    core::ArchState& st = slot.context;
    ++stats_.retired;
    emit(TraceKind::Retire, sid, st.pc, 0);

    ThreadPort<Inj> port{*this, sid, inj};
    core::ExecEffect fx;
    if (st.div) {
      fx = core::step_macro(st, core::Instruction{}, port);
    } else if (st.pc % 4 != 0 || st.pc > cfg_.ram_size - 4) {
      fx.trap = core::Trap::FetchFault;
    } else {
      fx = core::step_macro(st, core::decode(load_ram(st.pc, 4)), port);
    }

    if (fx.trap) {
      slot.trap = fx.trap;
      ++stats_.traps;
      emit(TraceKind::Trap, sid, st.pc, static_cast<std::uint32_t>(*fx.trap));
      return PassOutcome::Trapped;
    }
    if (port.stack_full) {
      ++stats_.stackwait_events;
      emit(TraceKind::StackWait, sid, st.pc, 0);
      return PassOutcome::StackFull;
    }
    if (port.exit_requested) {
      emit(TraceKind::Exit, sid, st.pc, 0);
      tc_.exit_thread(sid);
      for (Sid w : stack_.tlb().release(sid)) tc_.wake_from_stack_wait(w);
      return PassOutcome::Exited;
    }
    if (slot.stall_requested) {
      ++stats_.stall_events;
      emit(TraceKind::Stall, sid, st.pc, 1);
    }
    if (retire_obs_) retire_obs_(sid, st);
    return PassOutcome::Continue;
  }

  MmioResult sfr_read(Sid sid, std::uint32_t off) {
    MmioResult r;
    std::uint32_t v = 0;
    switch (off) {
      case sfr::kActivate: v = tc_.slot(sid).last_activated; break;
      case sfr::kExit: v = 0; break;
      case sfr::kStallSet:
      case sfr::kStallClr: v = tc_.stall_mask(); break;
      case sfr::kActivateCount: v = tc_.slot(sid).ac; break;
      case sfr::kSid: v = tc_.read_sid(sid); break;
      case sfr::kStatus: v = tc_.read_status(); break;
      default:
        if (!sfr::is_dma(off) || off % 4 != 0) {
          r.mem = core::MemResult::fault();
          return r;
        }
        v = dma_.read_sfr(off);
    }
    r.mem = core::MemResult::ok(v);
    return r;
  }

  MmioResult sfr_write(Sid sid, std::uint32_t off, std::uint32_t v) {
    MmioResult r;
    switch (off) {
      case sfr::kActivate: {
        const auto child = activate(v);
        tc_.slot(sid).last_activated = child ? *child : sfr::kNoSid;
        break;
      }
      case sfr::kActivateCount: {
        const auto child = tc_.activate_and_count(sid, v);
        emit(TraceKind::Activate, child, v, child ? *child : sfr::kNoSid);
        tc_.slot(sid).last_activated = child ? *child : sfr::kNoSid;
        break;
      }
      case sfr::kExit: r.exit_requested = true; break;
      case sfr::kStallSet: tc_.set_stall(v); break;
      case sfr::kStallClr: tc_.clear_stall(v); break;
      case sfr::kSid:
      case sfr::kStatus: break;
      default:
        if (!sfr::is_dma(off) || off % 4 != 0) {
          r.mem = core::MemResult::fault();
          return r;
        }
        if (dma_.write_sfr(off, v, geo_) == DmaWrite::Rejected) ++stats_.dma_rejects;
    }
    return r;
  }

  void commit_inbound(const Packet& p) {
    ++stats_.packets_in;
    emit(TraceKind::PacketDeliver, std::nullopt, encode_global(p.dest), p.data);
    const std::uint32_t off = p.dest.offset;
    switch (p.dest.region) {
      case Region::PeRam:
        if (off % 4 == 0 && off < cfg_.ram_size) {
          store_ram(off, 4, p.data);
          return;
        }
        break;
      case Region::TcSfr:
        switch (off) {
          case sfr::kActivate:
          case sfr::kActivateCount: activate(p.data); return;
          case sfr::kStallSet: tc_.set_stall(p.data); return;
          case sfr::kStallClr: tc_.clear_stall(p.data); return;
          case sfr::kExit:
          case sfr::kSid:
          case sfr::kStatus: return;  // a thread can only kill itself
          default: break;
        }
        break;
      case Region::DmaSfr:
        if (sfr::is_dma(off) && off % 4 == 0) {
          if (dma_.write_sfr(off, p.data, geo_) == DmaWrite::Rejected) {
            ++stats_.dma_rejects;
          }
          return;
        }
        break;
      case Region::Support:
        break;
    }
    ++stats_.network_faults;
  }

  void update_watchdog(const IssueRecord& rec) {
    if (rec.issued || tc_.live_count() == 0) {
      bubble_streak_ = 0;
      return;
    }
    if (++bubble_streak_ == cfg_.effective_watchdog()) {
      ++stats_.watchdog_events;
      emit(TraceKind::Watchdog, std::nullopt, 0,
           static_cast<std::uint32_t>(tc_.live_count()));
    }
  }

  std::uint32_t load_ram(std::uint32_t off, unsigned width) const {
    std::uint32_t v = 0;
    std::memcpy(&v, ram_.data() + off, width);
    return v;
  }
  void store_ram(std::uint32_t off, unsigned width, std::uint32_t v) {
    std::memcpy(ram_.data() + off, &v, width);
  }

  void emit(TraceKind k, std::optional<Sid> sid, std::uint32_t pc,
            std::uint32_t detail) {
    if (trace_) trace_(TraceRecord{stats_.micro_cycles, cfg_.at, k, sid, pc, detail});
  }

  PeConfig cfg_;
  Geometry geo_;
  ThreadController tc_;
  StackMemory stack_;
  DmaEngine dma_;
  std::vector<std::uint8_t> ram_;
  PeStats stats_;
  std::uint64_t bubble_streak_ = 0;
  TraceSink trace_;
  RetireObserver retire_obs_;
};

}  // namespace hpra
