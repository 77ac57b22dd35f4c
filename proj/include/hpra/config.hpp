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

// Sectioned key = value text used for system configs and run manifests.
//
//   [system]  grid_nx grid_ny support_xy fifo_depth ext_mem_size
//   [pe]      c d ram_size stack_ranges stack_range_size watchdog_window
//   [perf]    f_orig r f_csr_measured
//   [area]    pair = NAME,SIZE,PERF,NAME,SIZE,PERF  (PERF may be "-"; repeatable)
//   [manifest] config max_cycles
//   [image]   file cluster offset start threads      (repeatable section)
//
// '#' and ';' start comments. Unknown sections and keys are errors.

#include <cerrno>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hpra/fabric.hpp"
#include "hpra/perf.hpp"

namespace hpra::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<Section> parse_ini(std::string_view text, const std::string& origin = "config") {
  std::vector<Section> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  const auto err = [&](const std::string& msg) {
    return ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line;
    const auto cut = raw.find_first_of("#;");
    const std::string s = trim(raw.substr(0, cut));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw err("unterminated section header");
      out.push_back({trim(s.substr(1, s.size() - 2)), line, {}});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw err("expected key = value");
    if (out.empty()) throw err("key outside of a section");
    Entry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
    if (e.key.empty()) throw err("empty key");
    out.back().entries.push_back(std::move(e));
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace detail {

inline std::uint64_t to_uint(const Entry& e, std::uint64_t max = UINT32_MAX) {
  std::string v = e.value;
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    v = v.substr(2);
    base = 16;
  }
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (ec != std::errc{} || p != v.data() + v.size() || v.empty() || out > max) {
    throw ConfigError("line " + std::to_string(e.line) + ": bad integer for " + e.key + ": '" +
                      e.value + "'");
  }
  return out;
}

inline double to_double(const std::string& s, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": bad number for " + key + ": '" + s + "'");
  }
}

inline Coord to_coord(const Entry& e) {
  const auto comma = e.value.find(',');
  if (comma == std::string::npos) {
    throw ConfigError("line " + std::to_string(e.line) + ": " + e.key + " must be X,Y");
  }
  const Entry ex{e.key, trim(e.value.substr(0, comma)), e.line};
  const Entry ey{e.key, trim(e.value.substr(comma + 1)), e.line};
  return {static_cast<unsigned>(to_uint(ex, 255)), static_cast<unsigned>(to_uint(ey, 255))};
}

[[noreturn]] inline void unknown(const Section& s, const Entry& e) {
  throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key +
                    "' in [" + s.name + "]");
}

}  // namespace detail

/// Everything a system-level run or report needs.
struct FullConfig {
  SystemConfig system;
  perf::PerfParams perf{181.0, 4, 16, 0.93, 549.0};
  std::vector<std::pair<perf::AreaRecord, perf::AreaRecord>> area;

  FullConfig() { system.geo.ram_size = system.pe.ram_size; }

  /// Syncs derived fields and checks every invariant.
  void finalize() {
    perf.c = system.pe.c;
    perf.d = system.pe.d;
    system.geo.ram_size = system.pe.ram_size;
    try {
      system.validate();
      perf.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
};

/// Applies the config sections found in `sections` on top of `cfg`. Sections
/// not in the config vocabulary are returned for the caller.
inline std::vector<Section> apply_config(FullConfig& cfg, const std::vector<Section>& sections) {
  using detail::to_uint;
  std::vector<Section> rest;
  for (const Section& s : sections) {
    if (s.name == "system") {
      for (const Entry& e : s.entries) {
        if (e.key == "grid_nx") cfg.system.geo.nx = static_cast<unsigned>(to_uint(e, 255));
        else if (e.key == "grid_ny") cfg.system.geo.ny = static_cast<unsigned>(to_uint(e, 255));
        else if (e.key == "support_xy") cfg.system.geo.support = detail::to_coord(e);
        else if (e.key == "fifo_depth") cfg.system.fifo_depth = static_cast<unsigned>(to_uint(e, 4096));
        else if (e.key == "ext_mem_size") cfg.system.geo.ext_mem_size = static_cast<std::uint32_t>(to_uint(e));
        else detail::unknown(s, e);
      }
    } else if (s.name == "pe") {
      for (const Entry& e : s.entries) {
        if (e.key == "c") cfg.system.pe.c = static_cast<unsigned>(to_uint(e, 1024));
        else if (e.key == "d") cfg.system.pe.d = static_cast<unsigned>(to_uint(e, 1024));
        else if (e.key == "ram_size") cfg.system.pe.ram_size = static_cast<std::uint32_t>(to_uint(e));
        else if (e.key == "stack_ranges") cfg.system.pe.stack.ranges = static_cast<unsigned>(to_uint(e, 1024));
        else if (e.key == "stack_range_size") cfg.system.pe.stack.range_size = static_cast<std::uint32_t>(to_uint(e));
        else if (e.key == "watchdog_window") cfg.system.pe.watchdog_window = to_uint(e, UINT64_MAX);
        else detail::unknown(s, e);
      }
    } else if (s.name == "perf") {
      for (const Entry& e : s.entries) {
        if (e.key == "f_orig") {
          cfg.perf.f_orig = detail::to_double(e.value, e.line, e.key);
        } else if (e.key == "r") {
          cfg.perf.r = detail::to_double(e.value, e.line, e.key);
        } else if (e.key == "f_csr_measured") {
          if (e.value == "-" || e.value == "none") {
            cfg.perf.f_csr_measured.reset();
          } else {
            cfg.perf.f_csr_measured = detail::to_double(e.value, e.line, e.key);
          }
        } else {
          detail::unknown(s, e);
        }
      }
    } else if (s.name == "area") {
      for (const Entry& e : s.entries) {
        if (e.key != "pair") detail::unknown(s, e);
        std::vector<std::string> f;
        std::stringstream ss(e.value);
        for (std::string item; std::getline(ss, item, ',');) f.push_back(trim(item));
        if (f.size() != 6) {
          throw ConfigError("line " + std::to_string(e.line) +
                            ": pair needs NAME,SIZE,PERF,NAME,SIZE,PERF");
        }
        const auto rec = [&](std::size_t i) {
          perf::AreaRecord r{f[i], detail::to_double(f[i + 1], e.line, "size"), std::nullopt};
          if (!(r.size > 0)) throw ConfigError("line " + std::to_string(e.line) + ": size must be > 0");
          if (f[i + 2] != "-") r.perf = detail::to_double(f[i + 2], e.line, "perf");
          return r;
        };
        cfg.area.emplace_back(rec(0), rec(3));
      }
    } else {
      rest.push_back(s);
    }
  }
  return rest;
}

inline FullConfig load_config_text(std::string_view text, const std::string& origin = "config") {
  FullConfig cfg;
  const auto rest = apply_config(cfg, parse_ini(text, origin));
  if (!rest.empty()) {
    throw ConfigError(origin + ":" + std::to_string(rest.front().line) + ": unknown section [" +
                      rest.front().name + "]");
  }
  cfg.finalize();
  return cfg;
}

inline FullConfig load_config_file(const std::filesystem::path& p) {
  return load_config_text(read_file(p), p.string());
}

struct ImageSpec {
  std::filesystem::path file;  // .s is assembled at `offset`; anything else is raw words
  Coord cluster{1, 0};
  std::uint32_t offset = 0;
  std::optional<std::string> start;  // number or symbol of an assembled image
  unsigned threads = 1;
  int line = 0;
};

struct Manifest {
  FullConfig config;
  std::vector<ImageSpec> images;
  std::optional<std::uint64_t> max_cycles;
};

/// Parses a manifest. `base_dir` resolves relative paths; `config_override`
/// replaces any `config =` reference.
inline Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                               const std::optional<std::filesystem::path>& config_override = {},
                               const std::string& origin = "manifest") {
  using detail::to_uint;
  const auto sections = parse_ini(text, origin);
  Manifest m;

  std::optional<std::filesystem::path> cfg_path = config_override;
  for (const Section& s : sections) {
    if (s.name != "manifest") continue;
    for (const Entry& e : s.entries) {
      if (e.key == "config") {
        if (!config_override) cfg_path = base_dir / e.value;
      } else if (e.key == "max_cycles") {
        m.max_cycles = to_uint(e, UINT64_MAX);
      } else {
        detail::unknown(s, e);
      }
    }
  }
  if (cfg_path) {
    const auto cs = parse_ini(read_file(*cfg_path), cfg_path->string());
    const auto extra = apply_config(m.config, cs);
    if (!extra.empty()) throw ConfigError(cfg_path->string() + ": unknown section [" + extra.front().name + "]");
  }
  const auto rest = apply_config(m.config, sections);
  m.config.finalize();

  for (const Section& s : rest) {
    if (s.name == "manifest") continue;
    if (s.name != "image") {
      throw ConfigError(origin + ":" + std::to_string(s.line) + ": unknown section [" + s.name + "]");
    }
    ImageSpec img;
    img.line = s.line;
    bool have_file = false;
    for (const Entry& e : s.entries) {
      if (e.key == "file") {
        img.file = base_dir / e.value;
        have_file = true;
      } else if (e.key == "cluster") {
        img.cluster = detail::to_coord(e);
      } else if (e.key == "offset") {
        img.offset = static_cast<std::uint32_t>(to_uint(e));
      } else if (e.key == "start") {
        img.start = e.value;
      } else if (e.key == "threads") {
        img.threads = static_cast<unsigned>(to_uint(e, 1024));
      } else {
        detail::unknown(s, e);
      }
    }
    const std::string where = origin + ":" + std::to_string(s.line) + ": ";
    if (!have_file) throw ConfigError(where + "[image] needs file =");
    const Geometry& g = m.config.system.geo;
    if (!g.contains(img.cluster) || img.cluster == g.support) {
      throw ConfigError(where + "image target is not a PE cluster");
    }
    if (img.offset % 4 != 0 || img.offset >= m.config.system.pe.ram_size) {
      throw ConfigError(where + "image offset must be word aligned and inside PE-RAM");
    }
    if (img.threads == 0 || img.threads > m.config.system.pe.d) {
      throw ConfigError(where + "threads must be in 1..D");
    }
    m.images.push_back(std::move(img));
  }
  return m;
}

inline Manifest load_manifest_file(const std::filesystem::path& p,
                                   const std::optional<std::filesystem::path>& config_override = {}) {
  return parse_manifest(read_file(p), p.parent_path(), config_override, p.string());
}

}  // namespace hpra::config
