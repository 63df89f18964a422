#include "vsim/cli.hh"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "vsim/oracle.hh"

namespace vsim {

std::string Workload::label() const {
  if (kernel == "program") return std::filesystem::path(path).filename().string();
  return kernel;
}

std::string Workload::size_text() const {
  if (kernel == "random") return std::to_string(seed);
  return format_size(size);
}

Workload default_workload(Kernel kernel) {
  Workload w;
  w.kernel = std::string(kernel_name(kernel));
  switch (kernel) {
    case Kernel::Axpy: w.size = {30720}; w.sew = 64; w.lmul = 8; break;
    case Kernel::Memcpy: w.size = {16384}; w.sew = 32; w.lmul = 8; break;
    case Kernel::GemmTile: w.size = {87, 87, 87}; w.sew = 32; w.lmul = 4; break;
    case Kernel::Transpose: w.size = {4050, 8}; w.sew = 32; w.lmul = 1; break;
    case Kernel::Gather: w.size = {9830}; w.sew = 32; w.lmul = 8; break;
    case Kernel::StreamLoad: w.size = {262144}; w.sew = 32; w.lmul = 8; break;
  }
  return w;
}

const std::vector<Workload>& kernel_suite() {
  static const std::vector<Workload> suite = {
      default_workload(Kernel::Axpy), default_workload(Kernel::Memcpy),
      default_workload(Kernel::GemmTile), default_workload(Kernel::Transpose),
      default_workload(Kernel::Gather)};
  return suite;
}

namespace {

unsigned to_unsigned(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const unsigned long v = std::stoul(s, &pos, 0);
    if (pos != s.size()) throw std::invalid_argument(s);
    return unsigned(v);
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " '" + s + "'");
  }
}

uint64_t to_u64(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos, 0);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

const std::vector<std::string>& fixed_keys() {
  static const std::vector<std::string> keys = {
      "vlen",          "dlen",           "features",       "dispatch_q_depth",
      "load_iq_depth", "store_iq_depth", "arith_iq_depth", "num_arith_seqs",
      "mem_base_latency", "inject_latency"};
  return keys;
}

}  // namespace

Workload parse_workload(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty() || parts[0].empty()) throw ConfigError("empty workload");
  if (parts[0] == "random") {
    Workload w;
    w.kernel = "random";
    if (parts.size() > 2) throw ConfigError("random takes one seed: '" + text + "'");
    w.seed = parts.size() == 2 ? to_u64(parts[1], "seed") : 0;
    return w;
  }
  Kernel k;
  try {
    k = kernel_from_name(parts[0]);
  } catch (const ConfigError&) {
    if (parts.size() == 1 && std::filesystem::exists(text)) {
      Workload w;
      w.kernel = "program";
      w.path = text;
      return w;
    }
    throw;
  }
  Workload w = default_workload(k);
  if (parts.size() >= 2) w.size = parse_size(parts[1]);
  if (parts.size() >= 3) w.sew = to_unsigned(parts[2], "sew");
  if (parts.size() >= 4) w.lmul = to_unsigned(parts[3], "lmul");
  if (parts.size() > 4) throw ConfigError("malformed workload '" + text + "'");
  return w;
}

Program load_workload(const Workload& w, const MachineConfig& machine) {
  if (w.kernel == "program") {
    std::ifstream in(w.path);
    if (!in) throw ConfigError("cannot open program '" + w.path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }
  if (w.kernel == "random") return gen_random(w.seed, {}, machine);
  return gen_kernel(kernel_from_name(w.kernel), w.size, w.sew, w.lmul, machine);
}

std::string join_csv(const std::vector<std::string>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

std::vector<std::string> csv_header(const std::vector<std::string>& extra_keys,
                                    const std::vector<std::string>& axes) {
  std::vector<std::string> h = fixed_keys();
  h.insert(h.end(), extra_keys.begin(), extra_keys.end());
  for (const char* c : {"kernel", "size", "sew", "lmul", "cycles", "element_ops",
                        "bytes_moved", "uops_issued", "compute_util", "mem_util",
                        "util", "trapped"})
    h.push_back(c);
  for (unsigned s = 1; s < kStallKinds; ++s)
    h.push_back("stall_" + std::string(stall_name(Stall(s))) + "_pct");
  for (const auto& a : axes) h.push_back("pct_speedup_vs_prev_" + a);
  return h;
}

std::string csv_row(const SimConfig& cfg, const Workload& w, const SimMetrics& m,
                    bool trapped, const std::vector<std::string>& extra_keys,
                    const std::vector<std::optional<double>>& speedup) {
  std::vector<std::string> c;
  for (const auto& k : fixed_keys()) c.push_back(cfg.get(k));
  for (const auto& k : extra_keys) c.push_back(cfg.get(k));
  const bool generated = w.kernel != "program" && w.kernel != "random";
  c.push_back(w.label());
  c.push_back(w.size_text());
  c.push_back(std::to_string(generated ? w.sew : 0));
  c.push_back(std::to_string(generated ? w.lmul : 0));
  const unsigned dlen = cfg.machine.dlen;
  for (uint64_t v : {m.cycles, m.element_ops, m.bytes_moved, m.uops_issued})
    c.push_back(std::to_string(v));
  c.push_back(fmt(m.compute_util(dlen)));
  c.push_back(fmt(m.mem_util(dlen)));
  c.push_back(fmt(m.util(dlen)));
  c.push_back(trapped ? "1" : "0");
  for (unsigned s = 1; s < kStallKinds; ++s) c.push_back(fmt(m.stall_pct(Stall(s))));
  for (const auto& s : speedup) c.push_back(s ? fmt(*s) : "");
  return join_csv(c);
}

std::vector<SweepRow> run_sweep(const SimConfig& base, const SweepSpec& spec) {
  if (spec.workloads.empty()) throw ConfigError("sweep needs at least one workload");
  size_t points = 1;
  for (const auto& [key, values] : spec.axes) {
    if (values.empty()) throw ConfigError("axis '" + key + "' has no values");
    points *= values.size();
    if (points > spec.cap) break;
  }
  const size_t total = points * spec.workloads.size();
  if (points > spec.cap || total > spec.cap)
    throw ConfigError("sweep has more than " + std::to_string(spec.cap) +
                      " runs; narrow the axes or raise --max-runs");

  std::vector<SweepRow> rows(total);
  for (size_t p = 0; p < points; ++p) {
    std::vector<size_t> point(spec.axes.size());
    size_t rem = p;
    for (size_t a = spec.axes.size(); a-- > 0;) {
      point[a] = rem % spec.axes[a].second.size();
      rem /= spec.axes[a].second.size();
    }
    SimConfig cfg = base;
    for (size_t a = 0; a < spec.axes.size(); ++a)
      cfg.set(spec.axes[a].first, spec.axes[a].second[point[a]]);
    cfg.validate();
    for (size_t w = 0; w < spec.workloads.size(); ++w) {
      SweepRow& r = rows[p * spec.workloads.size() + w];
      r.cfg = cfg;
      r.workload = spec.workloads[w];
      r.point = point;
    }
  }

  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(total);
  auto worker = [&] {
    for (size_t i = next++; i < total; i = next++) {
      try {
        SweepRow& r = rows[i];
        const Program prog = load_workload(r.workload, r.cfg.machine);
        EngineOptions opts;
        opts.monitor = false;
        const RunResult res = simulate(r.cfg, prog, opts);
        r.metrics = res.metrics;
        r.trapped = res.trap.has_value();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, unsigned(total)));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Speedup along each axis relative to the previous value of that axis.
  std::vector<size_t> stride(spec.axes.size(), 1);
  for (size_t a = spec.axes.size(); a-- > 1;)
    stride[a - 1] = stride[a] * spec.axes[a].second.size();
  for (size_t i = 0; i < total; ++i) {
    SweepRow& r = rows[i];
    r.speedup.assign(spec.axes.size(), std::nullopt);
    const size_t p = i / spec.workloads.size(), w = i % spec.workloads.size();
    for (size_t a = 0; a < spec.axes.size(); ++a) {
      if (r.point[a] == 0) continue;
      const SweepRow& prev = rows[(p - stride[a]) * spec.workloads.size() + w];
      if (r.metrics.cycles)
        r.speedup[a] = (double(prev.metrics.cycles) / double(r.metrics.cycles) - 1.0) * 100.0;
    }
  }
  return rows;
}

namespace {

struct CommonOpts {
  std::string kernel;
  std::string size;
  unsigned sew = 0;
  unsigned lmul = 0;
  uint64_t seed = 0;
  std::string program;
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::string> fault_pages;
};

void add_config_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "Config file (key = value lines)");
  cmd->add_option("--set", o.sets, "Override one config key: key=value");
  cmd->add_option("--fault-page", o.fault_pages, "Page index that faults on access");
}

void add_workload_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--kernel", o.kernel, "Kernel name, or 'random'");
  cmd->add_option("--size", o.size, "Problem size, e.g. 4096 or 32x32x32");
  cmd->add_option("--sew", o.sew, "Element width in bits");
  cmd->add_option("--lmul", o.lmul, "Register grouping");
  cmd->add_option("--seed", o.seed, "Seed for --kernel random");
  cmd->add_option("--program", o.program, "Program file");
}

SimConfig make_config(const CommonOpts& o) {
  SimConfig cfg;
  std::string path = o.config;
  if (path.empty())
    if (const char* env = std::getenv("VSIM_CONFIG")) path = env;
  if (!path.empty()) apply_config_file(cfg, path);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& p : o.fault_pages)
    cfg.frontend.fault_pages.insert(to_u64(p, "fault page"));
  cfg.validate();
  return cfg;
}

Workload make_workload(const CommonOpts& o) {
  if (!o.program.empty()) {
    if (!o.kernel.empty()) throw ConfigError("give --kernel or --program, not both");
    Workload w;
    w.kernel = "program";
    w.path = o.program;
    return w;
  }
  if (o.kernel.empty()) throw ConfigError("need --kernel or --program");
  if (o.kernel == "random") {
    Workload w;
    w.kernel = "random";
    w.seed = o.seed;
    return w;
  }
  Workload w = o.kernel.find(':') != std::string::npos
                   ? parse_workload(o.kernel)
                   : default_workload(kernel_from_name(o.kernel));
  if (!o.size.empty()) w.size = parse_size(o.size);
  if (o.sew) w.sew = o.sew;
  if (o.lmul) w.lmul = o.lmul;
  return w;
}

void report_trap(std::ostream& err, const Trap& t) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "trap: instruction %llu element %llu address 0x%llx\n",
                static_cast<unsigned long long>(t.seq_id),
                static_cast<unsigned long long>(t.element),
                static_cast<unsigned long long>(t.addr));
  err << buf;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cycle-level short-vector backend simulator"};
  app.require_subcommand(1);

  CommonOpts run_o;
  std::string trace_path, dump_path;
  bool no_header = false;
  auto* run = app.add_subcommand("run", "Simulate one workload and print a CSV row");
  add_workload_opts(run, run_o);
  add_config_opts(run, run_o);
  run->add_option("--trace", trace_path, "Write the per-cycle sequencer trace here");
  run->add_option("--dump-arch", dump_path, "Write the final architectural state here");
  run->add_flag("--no-header", no_header, "Omit the CSV header");

  CommonOpts sweep_o;
  std::vector<std::string> axes_text, workloads_text;
  size_t cap = 1024;
  unsigned jobs = 1;
  bool suite = false;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and print CSV");
  add_config_opts(sweep, sweep_o);
  sweep->add_option("--axis", axes_text, "Sweep axis: key=v1,v2,...");
  sweep->add_option("--kernel", workloads_text,
                    "Workload: name[:size[:sew:lmul]], random:seed, or a program path");
  sweep->add_flag("--suite", suite, "Add the default five-kernel suite");
  sweep->add_option("--max-runs", cap, "Refuse sweeps with more runs than this");
  sweep->add_option("--jobs", jobs, "Parallel simulations");

  CommonOpts snap_o;
  uint64_t at_cycle = 0;
  auto* snap = app.add_subcommand("snapshot", "Print scoreboard rows at a cycle");
  add_workload_opts(snap, snap_o);
  add_config_opts(snap, snap_o);
  snap->add_option("--cycle", at_cycle, "Cycle to capture (end of cycle)")->required();

  CommonOpts dump_o;
  bool use_oracle = false;
  auto* dump = app.add_subcommand("dump-arch", "Print the final architectural state");
  add_workload_opts(dump, dump_o);
  add_config_opts(dump, dump_o);
  dump->add_flag("--oracle", use_oracle, "Use the functional reference model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const SimConfig cfg = make_config(run_o);
      const Workload w = make_workload(run_o);
      const Program prog = load_workload(w, cfg.machine);
      EngineOptions opts;
      opts.trace = !trace_path.empty();
      const RunResult res = simulate(cfg, prog, opts);
      if (opts.trace) {
        std::ofstream t(trace_path);
        if (!t) throw ConfigError("cannot write trace '" + trace_path + "'");
        for (const auto& l : res.trace) t << l << '\n';
      }
      if (!dump_path.empty()) {
        std::ofstream d(dump_path);
        if (!d) throw ConfigError("cannot write dump '" + dump_path + "'");
        dump_arch(d, res.state, cfg.machine);
      }
      if (!no_header) out << join_csv(csv_header({}, {})) << '\n';
      out << csv_row(cfg, w, res.metrics, res.trap.has_value(), {}, {}) << '\n';
      if (res.trap) {
        report_trap(err, *res.trap);
        return 2;
      }
      return 0;
    }
    if (*sweep) {
      const SimConfig base = make_config(sweep_o);
      SweepSpec spec;
      spec.cap = cap;
      spec.jobs = jobs;
      for (const auto& a : axes_text) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ConfigError("--axis expects key=v1,v2,...");
        const std::string key = a.substr(0, eq);
        base.get(key);  // rejects unknown keys early
        spec.axes.emplace_back(key, split(a.substr(eq + 1), ','));
      }
      if (suite) spec.workloads = kernel_suite();
      for (const auto& t : workloads_text) spec.workloads.push_back(parse_workload(t));
      const auto rows = run_sweep(base, spec);
      std::vector<std::string> extra, axis_names;
      for (const auto& [key, values] : spec.axes) {
        axis_names.push_back(key);
        if (std::find(fixed_keys().begin(), fixed_keys().end(), key) == fixed_keys().end() &&
            std::find(extra.begin(), extra.end(), key) == extra.end())
          extra.push_back(key);
      }
      out << join_csv(csv_header(extra, axis_names)) << '\n';
      for (const auto& r : rows)
        out << csv_row(r.cfg, r.workload, r.metrics, r.trapped, extra, r.speedup) << '\n';
      return 0;
    }
    if (*snap) {
      const SimConfig cfg = make_config(snap_o);
      const Program prog = load_workload(make_workload(snap_o), cfg.machine);
      EngineOptions opts;
      opts.snapshot_cycles = {at_cycle};
      const RunResult res = simulate(cfg, prog, opts);
      auto it = res.snapshots.find(at_cycle);
      if (it == res.snapshots.end()) {
        err << "error: cycle " << at_cycle << " is past the end of the run ("
            << res.metrics.cycles << " cycles)\n";
        return 1;
      }
      for (const auto& row : it->second) out << row.render() << '\n';
      return 0;
    }
    if (*dump) {
      const SimConfig cfg = make_config(dump_o);
      const Program prog = load_workload(make_workload(dump_o), cfg.machine);
      std::optional<Trap> trap;
      if (use_oracle) {
        const OracleResult r = exec_program(bind(prog, cfg.machine), cfg.machine,
                                            cfg.frontend.faults());
        dump_arch(out, r.state, cfg.machine);
        trap = r.trap;
      } else {
        const RunResult r = simulate(cfg, prog);
        dump_arch(out, r.state, cfg.machine);
        trap = r.trap;
      }
      if (trap) {
        report_trap(err, *trap);
        return 2;
      }
      return 0;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace vsim
