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

// hpra: assemble programs, run manifests, benchmark, and print reports.
//
// Exit status: 0 success, 1 trap / watchdog / limit, 2 bad input or config.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hpra/hpra.hpp"

namespace {

namespace fs = std::filesystem;
using namespace hpra;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write " + p.string());
  f << data;
}

config::FullConfig config_or_default(const std::string& path) {
  if (path.empty()) {
    config::FullConfig c;
    c.finalize();
    return c;
  }
  return config::load_config_file(path);
}

int cmd_asm(const std::string& input, std::string output, std::uint32_t base, bool listing) {
  const assembler::Program prog = assembler::assemble(config::read_file(input), base);
  if (output.empty()) output = fs::path(input).replace_extension(".bin").string();
  write_file(output, cli::bytes_from_words(prog.words));
  if (listing) {
    for (std::size_t i = 0; i < prog.words.size(); ++i) {
      const std::uint32_t addr = base + 4 * static_cast<std::uint32_t>(i);
      std::printf("%08x  %08x  %s\n", addr, prog.words[i],
                  core::disassemble(core::decode(prog.words[i])).c_str());
    }
  }
  std::fprintf(stderr, "%zu words -> %s\n", prog.words.size(), output.c_str());
  return cli::kExitOk;
}

struct Dump {
  Coord at;
  std::uint32_t offset = 0;
  std::uint32_t count = 0;
};

Dump parse_dump(const std::string& s) {
  const auto colon1 = s.find(':');
  const auto colon2 = s.find(':', colon1 == std::string::npos ? 0 : colon1 + 1);
  const auto comma = s.find(',');
  if (colon1 == std::string::npos || colon2 == std::string::npos || comma > colon1) {
    throw InputError("--dump expects X,Y:OFFSET:COUNT");
  }
  const auto num = [&](const std::string& t) {
    const auto v = cli::parse_number(t);
    if (!v) throw InputError("--dump: bad number '" + t + "'");
    return *v;
  };
  return {{num(s.substr(0, comma)), num(s.substr(comma + 1, colon1 - comma - 1))},
          num(s.substr(colon1 + 1, colon2 - colon1 - 1)),
          num(s.substr(colon2 + 1))};
}

int cmd_run(const std::string& manifest_path, const std::string& config_path,
            const std::string& trace_path, std::optional<std::uint64_t> limit,
            std::optional<std::uint64_t> seed, const std::vector<std::string>& dumps) {
  std::optional<fs::path> override_cfg;
  if (!config_path.empty()) override_cfg = config_path;
  const config::Manifest m = config::load_manifest_file(manifest_path, override_cfg);

  std::ofstream trace;
  cli::RunOptions opt;
  opt.limit = limit;
  opt.permute_seed = seed;
  if (!trace_path.empty()) {
    trace.open(trace_path, std::ios::binary);
    if (!trace) throw InputError("cannot write " + trace_path);
    trace << kTraceHeader << '\n';
    opt.trace = [&trace](const TraceRecord& r) { trace << to_tsv(r) << '\n'; };
  }
  const cli::RunResult r = cli::run_manifest(m, opt);
  std::cout << cli::render_summary(r, m.config.perf);
  for (const std::string& d : dumps) {
    const Dump dump = parse_dump(d);
    if (!r.system->has_pe(dump.at)) throw InputError("--dump: no PE at target");
    const Pe& pe = r.system->pe(dump.at);
    for (std::uint32_t i = 0; i < dump.count; ++i) {
      const std::uint32_t a = dump.offset + 4 * i;
      if (a + 4 > pe.config().ram_size) break;
      std::printf("(%u,%u) %08x: %08x\n", dump.at.x, dump.at.y, a, pe.read_word(a));
    }
  }
  return r.exit_code();
}

std::vector<perf::MatmulRow> run_bench(const config::FullConfig& cfg, unsigned n_min,
                                       unsigned n_max, unsigned threads, std::uint64_t seed,
                                       bool verbose) {
  bench::BenchConfig bc;
  bc.pe = cfg.system.pe;
  bc.perf = cfg.perf;
  bc.seed = seed;
  std::vector<perf::MatmulRow> rows;
  for (unsigned n = n_min; n <= n_max; ++n) {
    const bench::MatmulComparison cmp = bench::compare_matmul(n, threads, bc);
    if (cmp.sequential.c != cmp.forkjoin.c) {
      throw std::runtime_error("matmul: sequential and fork-join results differ at n=" +
                               std::to_string(n));
    }
    if (verbose) {
      std::fprintf(stderr, "n=%u children=%u baseline=%llu cycles forkjoin=%llu micro-cycles\n", n,
                   cmp.forkjoin.children,
                   static_cast<unsigned long long>(cmp.sequential.cycles),
                   static_cast<unsigned long long>(cmp.forkjoin.cycles));
    }
    rows.push_back(cmp.row());
  }
  return rows;
}

int cmd_bench(const std::string& config_path, unsigned n_min, unsigned n_max, unsigned threads,
              std::uint64_t seed, const std::string& csv) {
  if (n_min < 1 || n_min > n_max) throw InputError("--n-min must be in 1..--n-max");
  const config::FullConfig cfg = config_or_default(config_path);
  const auto rows = run_bench(cfg, n_min, n_max, threads, seed, true);
  std::cout << cli::render_text(cli::matmul_table(rows));
  if (!csv.empty()) write_file(csv, cli::render_csv(cli::matmul_csv_table(rows)));
  return cli::kExitOk;
}

int cmd_report(const std::string& config_path, const std::string& which, std::uint64_t seed,
               const std::string& csv_dir) {
  const config::FullConfig cfg = config_or_default(config_path);
  const bool all = which == "all";
  if (!all && which != "1" && which != "2" && which != "3") {
    throw InputError("--table must be 1, 2, 3 or all");
  }
  const auto emit = [&](const std::string& title, const cli::Table& text, const cli::Table& csv,
                        const std::string& csv_name) {
    std::cout << title << '\n' << cli::render_text(text) << '\n';
    if (!csv_dir.empty()) write_file(fs::path(csv_dir) / csv_name, cli::render_csv(csv));
  };
  if (all || which == "1") {
    const auto pairs = cfg.area.empty() ? perf::reference_area_records() : cfg.area;
    const auto rows = perf::ppa_report(pairs);
    const auto t = cli::area_table(rows);
    emit("Area and performance per area", t, t, "area.csv");
  }
  if (all || which == "2") {
    const auto rows = run_bench(cfg, 4, 10, cfg.system.pe.d, seed, false);
    emit("Local matrix multiplication", cli::matmul_table(rows), cli::matmul_csv_table(rows),
         "matmul.csv");
  }
  if (all || which == "3") {
    const auto rows = perf::partition_table(cfg.perf, cli::pe_cluster_count(cfg.system));
    emit("Partitioning options", cli::partition_text_table(rows, cfg.perf),
         cli::partition_csv_table(rows), "partition.csv");
  }
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hpra: hyper-pipelined reconfigurable array simulator"};
  app.require_subcommand(1);

  std::string input, output, config_path, trace_path, csv, csv_dir, table = "all";
  std::uint32_t base = 0;
  bool listing = false;
  std::optional<std::uint64_t> limit, seed_opt;
  std::uint64_t seed = 1;
  std::vector<std::string> dumps;
  unsigned n_min = 4, n_max = 10, threads = 16;

  auto* asm_cmd = app.add_subcommand("asm", "Assemble a source file into a raw little-endian image");
  asm_cmd->add_option("input", input, "Assembly source")->required();
  asm_cmd->add_option("-o,--output", output, "Output .bin (default: input with .bin)");
  asm_cmd->add_option("--base", base, "Load address of the first word");
  asm_cmd->add_flag("--list", listing, "Print an address / word / disassembly listing");

  auto* run_cmd = app.add_subcommand("run", "Run a manifest on the simulated array");
  run_cmd->add_option("manifest", input, "Manifest file")->required();
  run_cmd->add_option("-c,--config", config_path, "System config (overrides the manifest's)");
  run_cmd->add_option("-t,--trace", trace_path, "Write a TSV event trace");
  run_cmd->add_option("-l,--limit", limit, "Micro-cycle limit");
  run_cmd->add_option("-s,--seed", seed_opt, "Shuffle the cluster commit order with this seed");
  run_cmd->add_option("--dump", dumps, "Print PE-RAM words after the run: X,Y:OFFSET:COUNT");

  auto* bench_cmd = app.add_subcommand("bench", "Matrix multiplication: unsliced core vs fork-join");
  bench_cmd->add_option("-c,--config", config_path, "System config");
  bench_cmd->add_option("--n-min", n_min, "Smallest matrix dimension");
  bench_cmd->add_option("--n-max", n_max, "Largest matrix dimension");
  bench_cmd->add_option("--threads", threads, "Thread budget for the fork-join run");
  bench_cmd->add_option("-s,--seed", seed, "Operand seed");
  bench_cmd->add_option("--csv", csv, "Write the rows as CSV");

  auto* report_cmd = app.add_subcommand("report", "Area, matmul and partitioning tables");
  report_cmd->add_option("-c,--config", config_path, "System config (may carry [area] pairs)");
  report_cmd->add_option("--table", table, "1, 2, 3 or all");
  report_cmd->add_option("-s,--seed", seed, "Operand seed for the matmul table");
  report_cmd->add_option("--csv-dir", csv_dir, "Also write CSV files into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitConfigError;
  }

  try {
    if (*asm_cmd) return cmd_asm(input, output, base, listing);
    if (*run_cmd) return cmd_run(input, config_path, trace_path, limit, seed_opt, dumps);
    if (*bench_cmd) return cmd_bench(config_path, n_min, n_max, threads, seed, csv);
    if (*report_cmd) return cmd_report(config_path, table, seed, csv_dir);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfigError;
  } catch (const assembler::AsmError& e) {
    std::cerr << "assembly error: " << e.what() << '\n';
    return cli::kExitConfigError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfigError;
  } catch (const FabricError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitProgramError;
  }
  return cli::kExitOk;
}
