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

// The cluster array. Every grid slot pairs a routing element with either a
// PE or (at exactly one slot) the support logic: flat external memory plus a
// host bridge that streams configuration and burst traffic into the mesh.
//
// Routing is X-then-Y dimension order with one hop per micro-cycle and
// credit backpressure on depth-Q input queues. A system step is two-phase:
// every routing decision is taken from the pre-tick queue occupancies, then
// all pops, pushes, deliveries and PE ticks are committed. Each input queue
// has exactly one producer, so the commit order across clusters does not
// change the result.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hpra/memory_map.hpp"
#include "hpra/pe.hpp"
#include "hpra/trace.hpp"

namespace hpra {

class FabricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum Port : unsigned { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3, kLocal = 4 };
inline constexpr unsigned kPorts = 5;

constexpr Port opposite(Port p) {
  switch (p) {
    case kNorth: return kSouth;
    case kSouth: return kNorth;
    case kEast: return kWest;
    case kWest: return kEast;
    default: return kLocal;
  }
}

/// Output port chosen at `here` for a packet headed to `dest`. North is +y.
constexpr Port route_port(Coord here, Coord dest) {
  if (dest.x > here.x) return kEast;
  if (dest.x < here.x) return kWest;
  if (dest.y > here.y) return kNorth;
  if (dest.y < here.y) return kSouth;
  return kLocal;
}

constexpr Coord neighbor(Coord c, Port p) {
  switch (p) {
    case kNorth: return {c.x, c.y + 1};
    case kSouth: return {c.x, c.y - 1};
    case kEast: return {c.x + 1, c.y};
    case kWest: return {c.x - 1, c.y};
    default: return c;
  }
}

class RoutingElement {
 public:
  struct Grant {
    Port in;
    Port out;
  };

  RoutingElement(Coord at, unsigned depth) : at_(at), depth_(depth) {
    if (depth == 0) throw std::invalid_argument("fifo_depth must be >= 1");
    rr_.fill(kPorts - 1);
  }

  Coord at() const { return at_; }
  unsigned depth() const { return depth_; }
  const std::deque<Packet>& queue(Port p) const { return in_[p]; }
  unsigned free_space(Port p) const {
    return depth_ - static_cast<unsigned>(in_[p].size());
  }
  std::size_t occupancy() const {
    std::size_t n = 0;
    for (const auto& q : in_) n += q.size();
    return n;
  }

  void push(Port p, const Packet& pkt) {
    if (in_[p].size() >= depth_) throw std::logic_error("RE queue overflow");
    in_[p].push_back(pkt);
  }

  /// Phase A. `downstream_space(out)` is the pre-tick free space of the
  /// queue the packet would move into; the Local output always accepts.
  template <class SpaceFn>
  std::vector<Grant> arbitrate(SpaceFn&& downstream_space) const {
    std::vector<Grant> grants;
    for (unsigned o = 0; o < kPorts; ++o) {
      const Port out = static_cast<Port>(o);
      if (out != kLocal && downstream_space(out) == 0) continue;
      for (unsigned k = 1; k <= kPorts; ++k) {
        const Port in = static_cast<Port>((rr_[o] + k) % kPorts);
        if (in_[in].empty()) continue;
        if (route_port(at_, in_[in].front().dest.at) != out) continue;
        grants.push_back({in, out});
        break;
      }
    }
    return grants;
  }

  /// Phase B: pops the granted heads and returns them per output port.
  std::array<std::optional<Packet>, kPorts> apply(std::span<const Grant> grants) {
    std::array<std::optional<Packet>, kPorts> out;
    for (const Grant& g : grants) {
      out[g.out] = in_[g.in].front();
      in_[g.in].pop_front();
      rr_[g.out] = g.in;
    }
    return out;
  }

  /// Single-RE step for standalone use: arbitrates against `space` and
  /// commits immediately.
  template <class SpaceFn>
  std::array<std::optional<Packet>, kPorts> route_step(SpaceFn&& space) {
    const auto grants = arbitrate(space);
    return apply(grants);
  }

 private:
  Coord at_;
  unsigned depth_;
  std::array<std::deque<Packet>, kPorts> in_;
  std::array<unsigned, kPorts> rr_{};
};

/// External memory and host bridge occupying the support slot.
class SupportCluster {
 public:
  SupportCluster(Coord at, std::uint32_t ext_mem_size)
      : at_(at), ext_(ext_mem_size / 4, 0) {}

  Coord at() const { return at_; }
  std::span<std::uint32_t> ext_mem() { return ext_; }
  std::span<const std::uint32_t> ext_mem() const { return ext_; }
  std::uint64_t faults() const { return faults_; }
  std::size_t pending() const { return jobs_.size(); }

  /// Queues single-word writes to be injected in order.
  void enqueue_write(const GlobalAddress& dest, std::uint32_t data) {
    jobs_.push_back({dest, data, std::nullopt});
  }
  /// Queues a word that is read from external memory at send time.
  void enqueue_ext_read(const GlobalAddress& dest, std::uint32_t ext_offset) {
    if (ext_offset % 4 != 0 || ext_offset / 4 >= ext_.size()) {
      throw FabricError("external memory offset out of bounds");
    }
    jobs_.push_back({dest, 0, ext_offset});
  }

  /// Services one inbound word and at most one outbound word.
  template <Injector Inj>
  std::optional<Packet> tick(const std::optional<Packet>& inbound, Inj& inj) {
    std::optional<Packet> sent;
    if (!jobs_.empty()) {
      const Job& j = jobs_.front();
      Packet p{j.dest, j.ext_offset ? ext_[*j.ext_offset / 4] : j.data, at_, 0};
      if (inj.try_inject(p)) {
        sent = p;
        jobs_.pop_front();
      }
    }
    if (inbound) {
      const Packet& p = *inbound;
      if (p.dest.region == Region::Support && p.dest.offset % 4 == 0 &&
          p.dest.offset / 4 < ext_.size()) {
        ext_[p.dest.offset / 4] = p.data;
      } else {
        ++faults_;
      }
    }
    return sent;
  }

 private:
  struct Job {
    GlobalAddress dest;
    std::uint32_t data;
    std::optional<std::uint32_t> ext_offset;
  };

  Coord at_;
  std::vector<std::uint32_t> ext_;
  std::deque<Job> jobs_;
  std::uint64_t faults_ = 0;
};

struct SystemConfig {
  Geometry geo;
  PeConfig pe;
  unsigned fifo_depth = 4;

  void validate() const {
    if (geo.nx == 0 || geo.ny == 0 || geo.nx > kMaxGridDim || geo.ny > kMaxGridDim) {
      throw std::invalid_argument("grid dimensions must be in 1..16");
    }
    if (geo.nx * geo.ny < 2) throw std::invalid_argument("grid needs >= 2 clusters");
    if (!geo.contains(geo.support)) {
      throw std::invalid_argument("support cluster outside the grid");
    }
    if (geo.ext_mem_size == 0 || geo.ext_mem_size % 4 != 0 ||
        geo.ext_mem_size > kMaxRegionOffset + 1) {
      throw std::invalid_argument("ext_mem_size must be a multiple of 4 and <= 1 MiB");
    }
    if (pe.ram_size > kMaxRegionOffset + 1) {
      throw std::invalid_argument("ram_size must be <= 1 MiB to be globally addressable");
    }
    if (fifo_depth == 0) throw std::invalid_argument("fifo_depth must be >= 1");
    pe.validate();
  }
};

struct TickStats {
  std::uint64_t moved = 0;      // hops between routing elements
  std::uint64_t delivered = 0;  // packets handed to a PE / support endpoint
  std::uint64_t injected = 0;
  std::uint64_t issued = 0;     // barrel issues across all PEs
};

class System {
 public:
  explicit System(SystemConfig cfg) : cfg_((cfg.validate(), cfg)) {
    cfg_.geo.ram_size = cfg_.pe.ram_size;
    const std::size_t n = static_cast<std::size_t>(cfg_.geo.nx) * cfg_.geo.ny;
    clusters_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Coord c = cfg_.geo.coord(i);
      Cluster cl{RoutingElement(c, cfg_.fifo_depth), std::nullopt, {}, 0, {}};
      if (c != cfg_.geo.support) {
        PeConfig pc = cfg_.pe;
        pc.at = c;
        cl.pe.emplace(pc, cfg_.geo);
      }
      clusters_.push_back(std::move(cl));
    }
    support_.emplace(cfg_.geo.support, cfg_.geo.ext_mem_size);
  }
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  const SystemConfig& config() const { return cfg_; }
  const Geometry& geometry() const { return cfg_.geo; }
  std::uint64_t now() const { return now_; }
  std::size_t cluster_count() const { return clusters_.size(); }

  Pe& pe(Coord c) {
    auto& cl = clusters_.at(cfg_.geo.index(c));
    if (!cl.pe) throw FabricError("no PE at the support cluster");
    return *cl.pe;
  }
  const Pe& pe(Coord c) const {
    const auto& cl = clusters_.at(cfg_.geo.index(c));
    if (!cl.pe) throw FabricError("no PE at the support cluster");
    return *cl.pe;
  }
  bool has_pe(Coord c) const {
    return cfg_.geo.contains(c) && clusters_[cfg_.geo.index(c)].pe.has_value();
  }
  std::vector<Coord> pe_coords() const {
    std::vector<Coord> out;
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
      if (clusters_[i].pe) out.push_back(cfg_.geo.coord(i));
    }
    return out;
  }
  SupportCluster& support() { return *support_; }
  const RoutingElement& re(Coord c) const { return clusters_.at(cfg_.geo.index(c)).re; }

  /// PE records are buffered per cluster and flushed in cluster-index order
  /// at the end of each step.
  void set_trace(TraceSink sink) {
    trace_ = std::move(sink);
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
      if (!clusters_[i].pe) continue;
      if (trace_) {
        clusters_[i].pe->set_trace(
            [this, i](const TraceRecord& r) { clusters_[i].trace_buf.push_back(r); });
      } else {
        clusters_[i].pe->set_trace(nullptr);
      }
    }
  }

  using DeliveryObserver = std::function<void(Coord, const Packet&, std::uint64_t)>;
  void set_delivery_observer(DeliveryObserver obs) { on_deliver_ = std::move(obs); }

  /// Streams `image` from the host bridge to consecutive words at `target`,
  /// optionally followed by an ACTIVATE write of `start` to the target PE.
  void configure_stream(const GlobalAddress& target, std::span<const std::uint32_t> image,
                        std::optional<std::uint32_t> start = std::nullopt) {
    if (target.region == Region::Support) {
      throw FabricError("configure_stream: bridge cannot target the support region");
    }
    if (target.region != Region::PeRam && target.region != Region::TcSfr) {
      throw FabricError("configure_stream: target must be PE-RAM or TC-SFR");
    }
    for (std::size_t i = 0; i < image.size(); ++i) {
      GlobalAddress g = target;
      g.offset += 4 * static_cast<std::uint32_t>(i);
      if (g.offset > kMaxRegionOffset || !cfg_.geo.valid_write_target(g)) {
        throw FabricError("configure_stream: invalid target address");
      }
    }
    GlobalAddress act{target.at, Region::TcSfr, sfr::kActivate};
    if (start && !cfg_.geo.valid_write_target(act)) {
      throw FabricError("configure_stream: no thread controller at target");
    }
    for (std::size_t i = 0; i < image.size(); ++i) {
      GlobalAddress g = target;
      g.offset += 4 * static_cast<std::uint32_t>(i);
      support_->enqueue_write(g, image[i]);
    }
    if (start) support_->enqueue_write(act, *start);
  }

  /// Queues an ACTIVATE write of `start` to the PE at `at` on the host bridge.
  void start_thread(Coord at, std::uint32_t start) {
    const GlobalAddress act{at, Region::TcSfr, sfr::kActivate};
    if (!cfg_.geo.valid_write_target(act)) throw FabricError("start_thread: no PE at target");
    support_->enqueue_write(act, start);
  }

  /// Host-initiated burst: `len` words of external memory starting at
  /// `ext_offset`, streamed to consecutive words at `target`.
  void host_burst(std::uint32_t ext_offset, std::uint32_t len, const GlobalAddress& target) {
    for (std::uint32_t i = 0; i < len; ++i) {
      GlobalAddress g = target;
      g.offset += 4 * i;
      if (!cfg_.geo.valid_write_target(g) || g.region == Region::Support) {
        throw FabricError("host_burst: invalid target address");
      }
      support_->enqueue_ext_read(g, ext_offset + 4 * i);
    }
  }

  /// Traffic-generator injection at `src`: queued host-side and injected
  /// into that cluster's local port when it has room, after the PE's own
  /// traffic.
  void inject(Coord src, const GlobalAddress& dest, std::uint32_t data) {
    if (!cfg_.geo.valid_write_target(dest)) throw FabricError("inject: invalid destination");
    clusters_.at(cfg_.geo.index(src)).backlog.push_back(Packet{dest, data, src, 0});
  }

  /// One micro-cycle. `order` optionally permutes the commit order of
  /// clusters; the result must not depend on it.
  TickStats step(std::span<const std::size_t> order = {}) {
    const std::size_t n = clusters_.size();
    std::vector<std::size_t> ord(n);
    if (order.empty()) {
      std::iota(ord.begin(), ord.end(), std::size_t{0});
    } else {
      ord.assign(order.begin(), order.end());
    }

    // Phase A: decisions from pre-tick state only.
    std::vector<std::array<unsigned, kPorts>> space(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (unsigned p = 0; p < kPorts; ++p) {
        space[i][p] = clusters_[i].re.free_space(static_cast<Port>(p));
      }
    }
    std::vector<std::vector<RoutingElement::Grant>> grants(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Coord here = cfg_.geo.coord(i);
      grants[i] = clusters_[i].re.arbitrate([&](Port out) -> unsigned {
        const Coord nb = neighbor(here, out);
        if (!cfg_.geo.contains(nb)) return 0;
        return space[cfg_.geo.index(nb)][opposite(out)];
      });
    }

    // Phase B: commit.
    TickStats ts;
    std::vector<std::optional<Packet>> deliveries(n);
    std::vector<std::pair<std::size_t, std::pair<Port, Packet>>> hops;
    for (std::size_t i : ord) {
      auto out = clusters_[i].re.apply(grants[i]);
      const Coord here = cfg_.geo.coord(i);
      for (unsigned p = 0; p < kPorts; ++p) {
        if (!out[p]) continue;
        if (p == kLocal) {
          deliveries[i] = out[p];
        } else {
          const Port po = static_cast<Port>(p);
          hops.push_back({cfg_.geo.index(neighbor(here, po)), {opposite(po), *out[p]}});
        }
      }
    }
    for (const auto& [dst, pp] : hops) clusters_[dst].re.push(pp.first, pp.second);
    ts.moved = hops.size();

    for (std::size_t i : ord) {
      Cluster& cl = clusters_[i];
      const Coord here = cfg_.geo.coord(i);
      LocalInjector inj{*this, i, space[i][kLocal]};
      if (deliveries[i]) {
        ++ts.delivered;
        ++delivered_total_;
        if (on_deliver_) on_deliver_(here, *deliveries[i], now_);
      }
      if (cl.pe) {
        const IssueRecord rec = cl.pe->tick(deliveries[i], inj);
        ts.issued += rec.issued.has_value();
      } else {
        support_->tick(deliveries[i], inj);
      }
      while (!cl.backlog.empty() && inj.try_inject(cl.backlog.front())) {
        cl.backlog.pop_front();
      }
      ts.injected += inj.count;
    }

    if (trace_) {
      for (Cluster& cl : clusters_) {
        for (const TraceRecord& r : cl.trace_buf) trace_(r);
        cl.trace_buf.clear();
      }
    }
    if (ts.moved || ts.delivered || ts.injected || in_flight() == 0) {
      stagnant_cycles_ = 0;
    } else {
      ++stagnant_cycles_;
    }
    ++now_;
    return ts;
  }

  std::uint64_t injected_total() const { return injected_total_; }
  std::uint64_t delivered_total() const { return delivered_total_; }
  /// Packets inside routing-element queues.
  std::uint64_t in_flight() const { return injected_total_ - delivered_total_; }
  /// Micro-cycles since a packet last moved while packets were in flight.
  std::uint64_t stagnant_cycles() const { return stagnant_cycles_; }

  /// Nothing queued anywhere in the network or host side.
  bool network_idle() const {
    if (in_flight() != 0 || support_->pending() != 0) return false;
    for (const Cluster& cl : clusters_) {
      if (!cl.backlog.empty()) return false;
    }
    return true;
  }

  /// Network idle and every PE has no live thread and no DMA running.
  bool quiescent() const {
    if (!network_idle()) return false;
    for (const Cluster& cl : clusters_) {
      if (cl.pe && !cl.pe->idle()) return false;
    }
    return true;
  }

 private:
  struct Cluster {
    RoutingElement re;
    std::optional<Pe> pe;
    std::deque<Packet> backlog;
    std::uint64_t next_seq = 0;
    std::vector<TraceRecord> trace_buf;
  };

  struct LocalInjector {
    System& sys;
    std::size_t idx;
    unsigned budget;
    unsigned count = 0;

    bool try_inject(const Packet& p) {
      if (budget == 0) return false;
      --budget;
      ++count;
      Cluster& cl = sys.clusters_[idx];
      Packet q = p;
      q.src = sys.cfg_.geo.coord(idx);
      q.seq = cl.next_seq++;
      cl.re.push(kLocal, q);
      ++sys.injected_total_;
      return true;
    }
  };

  SystemConfig cfg_;
  std::vector<Cluster> clusters_;
  std::optional<SupportCluster> support_;
  std::uint64_t now_ = 0;
  std::uint64_t injected_total_ = 0;
  std::uint64_t delivered_total_ = 0;
  std::uint64_t stagnant_cycles_ = 0;
  TraceSink trace_;
  DeliveryObserver on_deliver_;
};

}  // namespace hpra
