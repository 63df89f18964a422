#include <gtest/gtest.h>

#include <numeric>

#include "test_util.hh"
#include "vsim/engine.hh"

using namespace vsim;

namespace {

struct Case {
  Kernel kernel;
  KernelSize size;
  unsigned sew;
  unsigned lmul;
};

const std::vector<Case>& cases() {
  static const std::vector<Case> c{
      {Kernel::Axpy, {700}, 32, 4},          {Kernel::Memcpy, {900}, 8, 8},
      {Kernel::GemmTile, {6, 40, 5}, 32, 2}, {Kernel::Transpose, {150, 4}, 16, 2},
      {Kernel::Gather, {300}, 32, 1},        {Kernel::StreamLoad, {1000}, 64, 2},
  };
  return c;
}

const std::vector<std::string> kPresets{"sv-base", "sv-base+dae", "sv-base+ooo", "sv-full"};

uint64_t arith_elements(const Program& bound) {
  uint64_t n = 0;
  for (const auto& i : bound.insts)
    if (is_arith(i.opcode)) n += i.vtype.vl;
  return n;
}

}  // namespace

TEST(Properties, KernelsMatchOracleUnderEveryFeatureSet) {
  for (const auto& c : cases())
    for (const auto& preset : kPresets) {
      SimConfig cfg;
      cfg.features = features_from_name(preset);
      const Program p = gen_kernel(c.kernel, c.size, c.sew, c.lmul, cfg.machine);
      EngineOptions o;
      o.check_composition = true;
      const RunResult r = simulate(cfg, p, o);
      const OracleResult ref = exec_program(bind(p, cfg.machine), cfg.machine);
      EXPECT_TRUE(r.state == ref.state) << kernel_name(c.kernel) << " " << preset;
      EXPECT_EQ(r.metrics.monitor_violations, 0u) << kernel_name(c.kernel) << " " << preset;
      EXPECT_EQ(r.metrics.composition_mismatches, 0u);
    }
}

TEST(Properties, StallAccountingCoversEveryBusySequencerCycle) {
  for (const auto& c : cases())
    for (const auto& preset : kPresets) {
      SimConfig cfg;
      cfg.features = features_from_name(preset);
      const RunResult r =
          simulate(cfg, gen_kernel(c.kernel, c.size, c.sew, c.lmul, cfg.machine));
      const auto& m = r.metrics;
      const uint64_t stalled = std::accumulate(m.stalls.begin(), m.stalls.end(), uint64_t(0));
      EXPECT_EQ(stalled + m.uops_issued, m.sequencer_cycles)
          << kernel_name(c.kernel) << " " << preset;
      EXPECT_EQ(m.stalls[size_t(Stall::None)], 0u);
      double pct = 0;
      for (unsigned s = 0; s < kStallKinds; ++s) pct += m.stall_pct(Stall(s));
      EXPECT_LE(pct, 100.0 + 1e-9);
    }
}

TEST(Properties, WorkIsIndependentOfMicroarchitecture) {
  for (const auto& c : cases()) {
    std::vector<uint64_t> ops, bytes;
    const Program p = gen_kernel(c.kernel, c.size, c.sew, c.lmul, MachineConfig{});
    for (const auto& preset : kPresets)
      for (unsigned iq : {0u, 2u}) {
        SimConfig cfg;
        cfg.features = features_from_name(preset);
        cfg.arith_iq_depth = cfg.load_iq_depth = cfg.store_iq_depth = iq;
        const auto m = simulate(cfg, p).metrics;
        ops.push_back(m.element_ops);
        bytes.push_back(m.bytes_moved);
      }
    EXPECT_EQ(std::count(ops.begin(), ops.end(), ops[0]), long(ops.size()));
    EXPECT_EQ(std::count(bytes.begin(), bytes.end(), bytes[0]), long(bytes.size()));
    EXPECT_EQ(ops[0], arith_elements(bind(p, MachineConfig{}))) << kernel_name(c.kernel);
  }
}

TEST(Properties, UtilizationNeverExceedsOne) {
  for (const auto& c : cases()) {
    SimConfig cfg;
    for (unsigned vlen : {256u, 512u, 2048u}) {
      cfg.machine.vlen = vlen;
      const auto m =
          simulate(cfg, gen_kernel(c.kernel, c.size, c.sew, c.lmul, cfg.machine)).metrics;
      EXPECT_LE(m.compute_util(cfg.machine.dlen), 1.0);
      EXPECT_LE(m.mem_util(cfg.machine.dlen), 1.0);
      EXPECT_GE(m.cycles, m.uops_issued / 3);
    }
  }
}
