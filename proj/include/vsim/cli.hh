#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vsim/config.hh"
#include "vsim/engine.hh"
#include "vsim/program.hh"

namespace vsim {

/// What to simulate: a generated kernel, a random program, or a file.
struct Workload {
  std::string kernel;  // kernel name, "random" or "program"
  KernelSize size;
  unsigned sew = 32;
  unsigned lmul = 1;
  uint64_t seed = 0;
  std::string path;

  std::string label() const;
  std::string size_text() const;
};

/// Suite defaults: datatype and LMUL follow the usual choice for each kernel
/// shape; sizes are scaled to run in well under a second.
Workload default_workload(Kernel kernel);
const std::vector<Workload>& kernel_suite();

/// "name", "name:size", "name:size:sew:lmul", "random:seed" or a path.
Workload parse_workload(const std::string& text);
Program load_workload(const Workload& w, const MachineConfig& machine);

struct SweepSpec {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  std::vector<Workload> workloads;
  size_t cap = 1024;
  unsigned jobs = 1;
};

struct SweepRow {
  SimConfig cfg;
  Workload workload;
  std::vector<size_t> point;  // value index per axis
  SimMetrics metrics;
  bool trapped = false;
  std::vector<std::optional<double>> speedup;  // pct vs previous value, per axis
};

/// Runs the cross product (first axis slowest, workloads fastest). Throws
/// ConfigError when the run count exceeds the cap.
std::vector<SweepRow> run_sweep(const SimConfig& base, const SweepSpec& spec);

std::vector<std::string> csv_header(const std::vector<std::string>& extra_keys,
                                    const std::vector<std::string>& axes);
std::string csv_row(const SimConfig& cfg, const Workload& w, const SimMetrics& m,
                    bool trapped, const std::vector<std::string>& extra_keys,
                    const std::vector<std::optional<double>>& speedup);
std::string join_csv(const std::vector<std::string>& cells);

/// Entry point for the `vsim` tool. Returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace vsim
