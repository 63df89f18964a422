// Acceptance checks. Prints one PASS/FAIL line per criterion, with indented
// detail lines underneath, and exits non-zero if any criterion fails.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vsim/cli.hh"
#include "vsim/engine.hh"

using namespace vsim;

namespace {

// Tolerances.
constexpr unsigned kRandomPrograms = 10000;
constexpr unsigned kRandomConfigs = 12;
constexpr double kKneeKeep = 0.95;          // fraction of zero-latency throughput
constexpr double kKneeTarget = 128.0;       // analytic bound, cycles
constexpr double kKneeTolerance = 0.25;     // relative
constexpr unsigned kKneeStep = 16;
constexpr unsigned kKneeMax = 256;
constexpr double kOooSlack = 0.01;          // utilization, absolute
constexpr double kFullGain = 0.10;          // utilization, absolute
constexpr unsigned kFullGainKernels = 3;
constexpr double kChimeGainLow = 5.0;       // percent, 1 -> 2
constexpr double kChimeFlatHigh = 5.0;      // percent, 4 -> 8
constexpr double kIqStepGain = 10.0;        // percent, some kernel 0 -> 1
constexpr double kIqFlat = 5.0;             // percent, 2 -> 4
constexpr double kPeakFraction = 0.90;
constexpr uint64_t kFullAvlLimit = 32;
constexpr uint64_t kBaseAvlFloor = 48;
constexpr unsigned kRepeats = 3;

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string data_path(const std::string& name) {
  return std::string(VSIM_TEST_DATA) + "/" + name;
}

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<SweepRow> sweep(const SimConfig& base,
                            std::vector<std::pair<std::string, std::vector<std::string>>> axes,
                            std::vector<Workload> workloads) {
  SweepSpec spec;
  spec.axes = std::move(axes);
  spec.workloads = std::move(workloads);
  spec.jobs = jobs();
  return run_sweep(base, spec);
}

double util(const SweepRow& r) { return r.metrics.util(r.cfg.machine.dlen); }

// Cycles of each workload at each value of a single axis.
std::map<std::string, std::vector<uint64_t>> cycles_by_kernel(const std::vector<SweepRow>& rows,
                                                              size_t values) {
  std::map<std::string, std::vector<uint64_t>> out;
  for (const auto& r : rows) {
    auto& v = out[r.workload.label()];
    v.resize(values);
    v[r.point.at(0)] = r.metrics.cycles;
  }
  return out;
}

double pct_speedup(uint64_t before, uint64_t after) {
  return (double(before) / double(after) - 1.0) * 100.0;
}

// 1: scoreboard table reproduction through the snapshot command.
Outcome table_snapshot() {
  Outcome o;
  auto snap = [](const char* cycle) {
    const std::vector<std::string> args{"vsim", "snapshot", "--program",
                                        data_path("table2.vasm"), "--config",
                                        data_path("table2.cfg"), "--cycle", cycle};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    cli_main(int(argv.size()), argv.data(), out, err);
    std::vector<std::string> lines;
    std::istringstream is(out.str());
    std::string l;
    while (std::getline(is, l)) {
      l.erase(std::remove_if(l.begin(), l.end(), [](char c) { return c == ' '; }), l.end());
      if (!l.empty()) lines.push_back(l);
    }
    return lines;
  };
  const std::vector<std::string> expect{
      "vadd.2v0,v0,v2,0,PRSb=8'b00000000,PWSb=8'b00001100",
      "vle.2v2,1,PRSb=8'b00000000,PWSb=8'b11100000",
      "vadd.2v0,v0,v2,2,PRSb=8'b11111111,PWSb=8'b00001111",
      "vle.2v2,3,PRSb=8'b00000000,PWSb=8'b11110000",
      "vadd.2v0,v0,v2,4,PRSb=8'b11111111,PWSb=8'b00001111",
  };
  const auto c5 = snap("5");
  const bool rows_ok = c5 == expect;
  if (!rows_ok)
    for (const auto& l : c5) o.details.push_back("got " + l);

  // One cycle later the underlined bits clear.
  SimConfig cfg;
  apply_config_file(cfg, data_path("table2.cfg"));
  EngineOptions opts;
  opts.snapshot_cycles = {5, 6};
  const RunResult r = simulate(cfg, parse(read_file(data_path("table2.vasm"))), opts);
  const auto& a = r.snapshots.at(5);
  const auto& b = r.snapshots.at(6);
  bool clear_ok = a.size() >= 3 && b.size() >= 3;
  if (clear_ok) {
    clear_ok = a[0].pwsb.test(2) && !b[0].pwsb.test(2) && a[1].pwsb.test(5) &&
               !b[1].pwsb.test(5) && a[2].prsb.test(4) && !b[2].prsb.test(4) &&
               a[2].prsb.test(0) && !b[2].prsb.test(0);
  }
  o.pass = rows_ok && clear_ok;
  o.summary = std::string("cycle-5 rows ") + (rows_ok ? "exact" : "differ") +
              ", cycle-6 clears " + (clear_ok ? "ok" : "wrong");
  return o;
}

std::vector<SimConfig> random_configs() {
  std::vector<SimConfig> c(kRandomConfigs);
  c[1].features = features_from_name("sv-base");
  c[2].features = features_from_name("sv-base+dae");
  c[3].features = features_from_name("sv-base+ooo");
  c[4].machine.vlen = 256;
  c[4].machine.dlen = 128;
  c[4].num_arith_seqs = 1;
  c[5].machine.vlen = 1024;
  c[5].machine.dlen = 64;
  c[5].num_arith_seqs = 3;
  c[6].arith_iq_depth = c[6].load_iq_depth = c[6].store_iq_depth = 0;
  c[6].no_bypass = true;
  c[7].arith_iq_depth = 1;
  c[7].load_iq_depth = 3;
  c[7].store_iq_depth = 2;
  c[7].vrf.dedicated_load_wport = true;
  c[8].lsu.inflight_loads = c[8].lsu.inflight_stores = 1;
  c[8].lsu.store_buffer_rows = 1;
  c[8].mem.inject_latency = 30;
  c[9].mem.bank_queue_depth = 1;
  c[9].mem.rw_turnaround = true;
  c[9].features = features_from_name("sv-base+ooo");
  c[10].frontend.page_bytes = 256;
  c[10].frontend.fault_pages = {0x103};
  c[10].machine.dlen = 128;
  c[11].frontend.dispatch_ipc = 2;
  c[11].arith_iq_depth = c[11].load_iq_depth = c[11].store_iq_depth = 4;
  c[11].num_arith_seqs = 2;
  c[11].fu_latency = {1, 5, 7};
  return c;
}

// 2 and 3: random programs against the reference model, with the monitor.
std::pair<Outcome, Outcome> random_equivalence() {
  const auto cfgs = random_configs();
  std::atomic<unsigned> next{0};
  std::mutex mu;
  uint64_t runs = 0, mismatches = 0, traps = 0, errors = 0;
  uint64_t violations = 0, oldest = 0, composition = 0;
  std::vector<std::string> notes;
  auto worker = [&] {
    for (unsigned i; (i = next++) < kRandomPrograms;) {
      for (unsigned k = 0; k < cfgs.size(); ++k) {
        const SimConfig& cfg = cfgs[k];
        const Program p = gen_random(i, RandomProgramOptions{}, cfg.machine);
        EngineOptions opts;
        opts.check_composition = true;
        std::string err;
        bool same = false, trapped = false;
        uint64_t v = 0, ow = 0, cm = 0;
        try {
          const RunResult r = simulate(cfg, p, opts);
          const OracleResult ref =
              exec_program(bind(p, cfg.machine), cfg.machine, cfg.frontend.faults());
          same = r.trap == ref.trap && r.state == ref.state;
          trapped = bool(ref.trap);
          v = r.metrics.monitor_violations;
          ow = r.metrics.oldest_write_violations;
          cm = r.metrics.composition_mismatches;
        } catch (const std::exception& e) {
          err = e.what();
        }
        std::lock_guard<std::mutex> lock(mu);
        ++runs;
        traps += trapped;
        violations += v;
        oldest += ow;
        composition += cm;
        if (!err.empty()) {
          ++errors;
          if (notes.size() < 5)
            notes.push_back("seed " + std::to_string(i) + " cfg " + std::to_string(k) + ": " + err);
        } else if (!same) {
          ++mismatches;
          if (notes.size() < 5)
            notes.push_back("seed " + std::to_string(i) + " cfg " + std::to_string(k) +
                            ": state differs");
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs(); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  Outcome eq;
  eq.pass = mismatches == 0 && errors == 0 && runs == uint64_t(kRandomPrograms) * cfgs.size();
  eq.summary = std::to_string(kRandomPrograms) + " programs x " + std::to_string(cfgs.size()) +
               " configs: " + std::to_string(mismatches) + " mismatches, " +
               std::to_string(errors) + " errors (" + std::to_string(traps) + " runs trapped)";
  eq.details = notes;
  Outcome mon;
  mon.pass = violations == 0 && oldest == 0 && composition == 0 && errors == 0;
  mon.summary = std::to_string(violations) + " hazard violations, " + std::to_string(oldest) +
                " oldest-write violations, " + std::to_string(composition) +
                " window-composition mismatches over " + std::to_string(runs) + " runs";
  return {eq, mon};
}

// 4: two independent ops down one arithmetic path.
Outcome dead_time() {
  Outcome o;
  o.pass = true;
  std::string spans;
  for (unsigned lmul : {1u, 2u, 4u, 8u}) {
    SimConfig cfg;
    cfg.machine.vlen = cfg.machine.dlen = 256;
    cfg.num_arith_seqs = 1;
    const std::string text = "vsetvli 1000, e32, m" + std::to_string(lmul) +
                             "\nvadd v0, v8, v16\nvadd v24, v8, v16\n";
    EngineOptions opts;
    opts.record_events = true;
    const RunResult r = simulate(cfg, parse(text), opts);
    std::map<uint64_t, std::vector<uint64_t>> by_age;
    for (const auto& e : r.issues) by_age[e.age].push_back(e.cycle);
    bool ok = by_age.size() == 2;
    uint64_t span = 0, gap = 0;
    if (ok) {
      const auto& a = by_age.begin()->second;
      const auto& b = by_age.rbegin()->second;
      span = b.back() - a.front() + 1;
      gap = b.front() - a.back() - 1;
      ok = a.size() == lmul && b.size() == lmul && span == 2 * lmul && gap == 0;
    }
    o.pass = o.pass && ok;
    spans += " L=" + std::to_string(lmul) + ":" + std::to_string(span);
  }
  o.summary = "issue spans" + spans + " (want 2L, no gap)";
  return o;
}

// 5: chained load -> add at chime 2.
Outcome chaining() {
  SimConfig cfg;
  cfg.machine.vlen = 512;
  cfg.machine.dlen = 256;
  EngineOptions opts;
  opts.record_events = true;
  const RunResult r =
      simulate(cfg, parse("vsetvli 16, e32, m1\nvle32 v0, 0x1000\nvadd v8, v0, v0\n"), opts);
  std::map<uint64_t, std::vector<uint64_t>> by_age;
  for (const auto& e : r.issues) by_age[e.age].push_back(e.cycle);
  Outcome o;
  if (by_age.size() != 2) {
    o.summary = "unexpected issue stream";
    return o;
  }
  const uint64_t load = by_age.begin()->first;
  const uint64_t add_first = by_age.rbegin()->second.front();
  uint64_t first_wb = ~uint64_t(0), last_wb = 0;
  for (const auto& w : r.writebacks)
    if (w.age == load) {
      first_wb = std::min(first_wb, w.cycle);
      last_wb = std::max(last_wb, w.cycle);
    }
  o.pass = add_first <= first_wb + 1 && add_first <= last_wb && first_wb < last_wb;
  o.summary = "load writebacks at " + std::to_string(first_wb) + ".." + std::to_string(last_wb) +
              ", dependent add issues at " + std::to_string(add_first);
  return o;
}

// 6: latency knee of a long load stream.
Outcome latency_knee() {
  SimConfig cfg;
  cfg.machine.vlen = 512;
  cfg.machine.dlen = 256;
  cfg.dispatch_q_depth = 4;
  cfg.load_iq_depth = 4;
  std::vector<std::string> values;
  for (unsigned l = 0; l <= kKneeMax; l += kKneeStep) values.push_back(std::to_string(l));
  const auto rows =
      sweep(cfg, {{"inject_latency", values}}, {default_workload(Kernel::StreamLoad)});
  std::vector<uint64_t> cycles(values.size());
  for (const auto& r : rows) cycles[r.point[0]] = r.metrics.cycles;
  Outcome o;
  uint64_t knee = 0;
  bool holding = true;
  std::string curve;
  for (size_t i = 0; i < values.size(); ++i) {
    const double rel = double(cycles[0]) / double(cycles[i]);
    holding = holding && rel >= kKneeKeep;
    if (holding) knee = i * kKneeStep;
    curve += " " + values[i] + ":" + fmt("%.3f", rel);
  }
  const double bound = double(latency_bound(cfg));
  o.pass = std::fabs(double(knee) - kKneeTarget) <= kKneeTolerance * kKneeTarget;
  o.summary = "knee at " + std::to_string(knee) + " cycles (analytic " + fmt("%.0f", bound) +
              ", accept " + fmt("%.0f", kKneeTarget * (1 - kKneeTolerance)) + ".." +
              fmt("%.0f", kKneeTarget * (1 + kKneeTolerance)) + ")";
  o.details.push_back("relative throughput:" + curve);
  return o;
}

// 7: feature ablation over the kernel suite.
Outcome ablation() {
  const std::vector<std::string> presets{"sv-base", "sv-base+dae", "sv-base+ooo", "sv-full"};
  const auto rows = sweep(SimConfig{}, {{"features", presets}}, kernel_suite());
  std::map<std::string, std::vector<double>> u;
  for (const auto& r : rows) {
    auto& v = u[r.workload.label()];
    v.resize(presets.size());
    v[r.point[0]] = util(r);
  }
  Outcome o;
  bool full_ge_dae = true, ooo_ge_base = true;
  unsigned gains = 0;
  for (const auto& [k, v] : u) {
    const bool a = v[3] >= v[1];
    const bool b = v[2] >= v[0] - kOooSlack;
    const bool c = v[3] >= v[0] + kFullGain;
    full_ge_dae = full_ge_dae && a;
    ooo_ge_base = ooo_ge_base && b;
    gains += c;
    o.details.push_back(k + ": base " + fmt("%.3f", v[0]) + " +dae " + fmt("%.3f", v[1]) +
                        " +ooo " + fmt("%.3f", v[2]) + " full " + fmt("%.3f", v[3]) +
                        (a ? "" : "  [full < +dae]") + (b ? "" : "  [+ooo < base-1%]"));
  }
  o.pass = full_ge_dae && ooo_ge_base && gains >= kFullGainKernels;
  o.summary = std::string("full>=+dae ") + (full_ge_dae ? "yes" : "NO") + ", +ooo>=base-1% " +
              (ooo_ge_base ? "yes" : "NO") + ", full>=base+10pp on " + std::to_string(gains) +
              "/5 kernels";
  return o;
}

// Mean and per-kernel percent speedups between two axis positions.
struct Step {
  double mean = 0;
  double max = -1e9;
  std::string text;
};
Step step_between(const std::map<std::string, std::vector<uint64_t>>& cyc, size_t from, size_t to) {
  Step s;
  for (const auto& [k, v] : cyc) {
    const double p = pct_speedup(v[from], v[to]);
    s.mean += p / double(cyc.size());
    s.max = std::max(s.max, p);
    s.text += " " + k.substr(0, k.find(':')) + ":" + fmt("%+.1f%%", p);
  }
  return s;
}

// 8: VLEN:DLEN ratio sweep at fixed DLEN.
Outcome chime_trend() {
  const std::vector<std::string> vlens{"256", "512", "1024", "2048"};
  const auto rows = sweep(SimConfig{}, {{"vlen", vlens}}, kernel_suite());
  const auto cyc = cycles_by_kernel(rows, vlens.size());
  const Step low = step_between(cyc, 0, 1), high = step_between(cyc, 2, 3);
  Outcome o;
  o.pass = low.mean >= kChimeGainLow && std::fabs(high.mean) < kChimeFlatHigh;
  o.summary = "1->2 mean " + fmt("%+.1f%%", low.mean) + " (want >= 5%), 4->8 mean " +
              fmt("%+.1f%%", high.mean) + " (want |x| < 5%)";
  o.details.push_back("1->2:" + low.text);
  o.details.push_back("4->8:" + high.text);

  // Same sweep with every kernel at LMUL 1, for reference only.
  std::vector<Workload> unit = kernel_suite();
  for (auto& w : unit) w.lmul = 1;
  const auto cyc1 = cycles_by_kernel(sweep(SimConfig{}, {{"vlen", vlens}}, unit), vlens.size());
  const Step l1 = step_between(cyc1, 0, 1), h1 = step_between(cyc1, 2, 3);
  o.details.push_back("info, all kernels at LMUL 1: 1->2 mean " + fmt("%+.1f%%", l1.mean) +
                      ", 4->8 mean " + fmt("%+.1f%%", h1.mean));
  return o;
}

// 9: issue-queue depth sweep.
Outcome iq_trend() {
  const std::vector<std::string> depths{"0", "1", "2", "4"};
  const auto rows = sweep(SimConfig{}, {{"iq_depth", depths}}, kernel_suite());
  const auto cyc = cycles_by_kernel(rows, depths.size());
  const Step first = step_between(cyc, 0, 1), last = step_between(cyc, 2, 3);
  Outcome o;
  o.pass = first.mean >= 0 && first.max >= kIqStepGain && std::fabs(last.mean) < kIqFlat;
  o.summary = "0->1 mean " + fmt("%+.1f%%", first.mean) + " max " + fmt("%+.1f%%", first.max) +
              " (want mean >= 0, max >= 10%), 2->4 mean " + fmt("%+.1f%%", last.mean) +
              " (want |x| < 5%)";
  o.details.push_back("0->1:" + first.text);
  o.details.push_back("2->4:" + last.text);
  return o;
}

// 10: gemm utilization against application vector length.
Outcome avl_trend() {
  const std::vector<uint64_t> avls{8, 16, 24, 32, 40, 48, 64, 96, 128};
  std::vector<Workload> ws;
  for (uint64_t n : avls) {
    Workload w = default_workload(Kernel::GemmTile);
    w.size = {16, n, 32};
    ws.push_back(w);
  }
  const auto rows = sweep(SimConfig{}, {{"features", {"sv-full", "sv-base"}}}, ws);
  std::vector<double> full(avls.size()), base(avls.size());
  for (const auto& r : rows) {
    const size_t i = size_t(std::find(avls.begin(), avls.end(), r.workload.size[1]) - avls.begin());
    (r.point[0] == 0 ? full : base).at(i) = util(r);
  }
  auto reach = [&](const std::vector<double>& u) {
    for (size_t i = 0; i < avls.size(); ++i)
      if (u[i] >= kPeakFraction * u.back()) return avls[i];
    return avls.back();
  };
  const uint64_t rf = reach(full), rb = reach(base);
  Outcome o;
  o.pass = rf <= kFullAvlLimit && rb >= kBaseAvlFloor;
  o.summary = "90% of asymptote: sv-full at n=" + std::to_string(rf) + " (want <= 32), sv-base at n=" +
              std::to_string(rb) + " (want >= 48)";
  std::string f = "sv-full:", b = "sv-base:";
  for (size_t i = 0; i < avls.size(); ++i) {
    f += " " + std::to_string(avls[i]) + ":" + fmt("%.3f", full[i]);
    b += " " + std::to_string(avls[i]) + ":" + fmt("%.3f", base[i]);
  }
  o.details = {f, b};
  return o;
}

// 11: repeated runs are byte-identical.
Outcome determinism() {
  std::vector<std::string> traces, metrics, csvs;
  for (unsigned i = 0; i < kRepeats; ++i) {
    const Workload w = default_workload(Kernel::Gather);
    SimConfig cfg;
    EngineOptions opts;
    opts.trace = true;
    const RunResult r = simulate(cfg, load_workload(w, cfg.machine), opts);
    std::string t;
    for (const auto& l : r.trace) t += l + "\n";
    traces.push_back(t);
    metrics.push_back(csv_row(cfg, w, r.metrics, bool(r.trap), {}, {}));

    const std::vector<std::string> args{"vsim", "sweep", "--suite", "--axis", "iq_depth=1,2"};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    cli_main(int(argv.size()), argv.data(), out, err);
    csvs.push_back(out.str());
  }
  auto same = [](const std::vector<std::string>& v) {
    return std::all_of(v.begin(), v.end(), [&](const std::string& s) { return s == v[0]; });
  };
  Outcome o;
  o.pass = same(traces) && same(metrics) && same(csvs) && !csvs[0].empty();
  o.summary = std::to_string(kRepeats) + " repeats: trace " + (same(traces) ? "same" : "DIFFERS") +
              " (" + std::to_string(traces[0].size()) + " bytes), metrics " +
              (same(metrics) ? "same" : "DIFFERS") + ", sweep CSV " + (same(csvs) ? "same" : "DIFFERS");
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<const char*, std::function<Outcome()>>> checks;
  Outcome c2, c3;
  bool ran_random = false;
  auto random_pair = [&] {
    if (!ran_random) {
      std::tie(c2, c3) = random_equivalence();
      ran_random = true;
    }
  };
  checks.emplace_back("scoreboard table snapshot", table_snapshot);
  checks.emplace_back("oracle equivalence", [&] { random_pair(); return c2; });
  checks.emplace_back("hazard monitor", [&] { random_pair(); return c3; });
  checks.emplace_back("zero dead time", dead_time);
  checks.emplace_back("chaining precision", chaining);
  checks.emplace_back("latency tolerance knee", latency_knee);
  checks.emplace_back("feature ablation", ablation);
  checks.emplace_back("chime-length trend", chime_trend);
  checks.emplace_back("issue-queue trend", iq_trend);
  checks.emplace_back("vector-length trend", avl_trend);
  checks.emplace_back("determinism", determinism);

  unsigned failed = 0;
  for (size_t i = 0; i < checks.size(); ++i) {
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %2zu %s: %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", checks[i].first,
                o.summary.c_str());
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("%u of %zu criteria failed\n", failed, checks.size());
  return failed ? 1 : 0;
}
