#include <gtest/gtest.h>

#include <numeric>

#include "test_util.hh"
#include "vsim/oracle.hh"
#include "vsim/program.hh"

using namespace vsim;

TEST(Parse, ThreeInstructions) {
  const Program p = parse("vsetvli 16, e32, m2\nvle32 v2, 0x1000\nvadd v0, v0, v2");
  ASSERT_EQ(p.insts.size(), 3u);
  EXPECT_EQ(p.insts[0].opcode, Opcode::Vsetvli);
  EXPECT_EQ(p.insts[1].opcode, Opcode::Vle);
  EXPECT_EQ(p.insts[1].vd, 2);
  EXPECT_EQ(p.insts[1].base, 0x1000u);
  EXPECT_EQ(p.insts[2].opcode, Opcode::Vadd);
  EXPECT_EQ(p.insts[2].vtype, (VType{32, 2, 16}));
  EXPECT_EQ(p.insts[2].line, 3u);
}

TEST(Parse, EmptyText) {
  EXPECT_TRUE(parse("").insts.empty());
  EXPECT_TRUE(parse("# only a comment\n\n").insts.empty());
}

TEST(Parse, DiagnosticsCarryLineAndColumn) {
  try {
    parse("vsetvli 4, e32, m1\nvfoo v0, v1, v2\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 1u);
  }
  try {
    parse("vsetvli 4, e32, m1\nvadd v0, v40, v2\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 1u);
  }
  EXPECT_THROW(parse("vsetvli 4, e32, m1\nvadd v0 v1, v2\n"), ParseError);
  EXPECT_THROW(parse("vsetvli 4, e24, m1\n"), ParseError);
}

TEST(Parse, Table2ProgramGroupsMatchTableColumns) {
  const MachineConfig m = test::small_machine();
  const Program p = bind(test::table2_program(), m);
  ASSERT_EQ(p.insts.size(), 6u);
  const auto& vadd = p.insts[1];
  const auto& vle = p.insts[2];
  EgScoreboard w(m.total_egs()), r(m.total_egs());
  w.set(element_groups_of(vadd, Operand::Vd, m));
  r.set(element_groups_of(vadd, Operand::Vs1, m));
  r.set(element_groups_of(vadd, Operand::Vs2, m));
  EXPECT_EQ(w.render(), "8'b00001111");
  EXPECT_EQ(r.render(), "8'b11111111");
  EgScoreboard lw(m.total_egs());
  lw.set(element_groups_of(vle, Operand::Vd, m));
  EXPECT_EQ(lw.render(), "8'b11110000");
}

TEST(Parse, DataDirectiveAndMetadata) {
  const Program p = parse(".name demo\n.size 4\n.data 0x2000 0102ff\nscalar 3\n");
  EXPECT_EQ(p.name, "demo");
  EXPECT_EQ(p.size, "4");
  ASSERT_EQ(p.data_init.size(), 1u);
  EXPECT_EQ(p.data_init[0].addr, 0x2000u);
  EXPECT_EQ(p.data_init[0].bytes, (std::vector<uint8_t>{1, 2, 0xff}));
  ASSERT_EQ(p.insts.size(), 1u);
  EXPECT_EQ(p.insts[0].count, 3u);
}

TEST(Parse, MemoryForms) {
  const Program p = parse(
      "vsetvli 8, e16, m1\n"
      "vlse16 v1, 0x100, -4\n"
      "vsxe16 v2, 0x200, v3\n"
      "vlseg3e16 v4, 0x300\n"
      "vmacc.vx v8, -3, v9\n");
  EXPECT_EQ(p.insts[1].stride, -4);
  EXPECT_EQ(p.insts[2].opcode, Opcode::Vsxe);
  EXPECT_EQ(p.insts[2].vs2, 3);
  EXPECT_EQ(p.insts[3].nf, 3);
  EXPECT_TRUE(p.insts[4].scalar_src);
  EXPECT_EQ(p.insts[4].scalar, -3);
  EXPECT_THROW(parse("vsetvli 8, e16, m1\nvle32 v1, 0x100\n"), ParseError);
}

TEST(Render, RoundTripOnKernelsAndRandomPrograms) {
  const MachineConfig m;
  for (Kernel k : {Kernel::Axpy, Kernel::Memcpy, Kernel::GemmTile, Kernel::Transpose,
                   Kernel::Gather, Kernel::StreamLoad}) {
    KernelSize size = k == Kernel::GemmTile ? KernelSize{4, 20, 3}
                      : k == Kernel::Transpose ? KernelSize{40, 3}
                                               : KernelSize{100};
    const Program p = gen_kernel(k, size, 32, 1, m);
    Program back = parse(render(p));
    EXPECT_EQ(back.insts, p.insts) << kernel_name(k);
    EXPECT_EQ(back.data_init, p.data_init) << kernel_name(k);
  }
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const Program p = gen_random(seed, {}, m);
    const Program back = parse(render(p));
    EXPECT_EQ(back.insts, p.insts) << "seed " << seed;
    EXPECT_EQ(back.data_init, p.data_init) << "seed " << seed;
  }
}

TEST(Stripmine, Examples) {
  const MachineConfig m;
  const VType vt{32, 4, 0};
  ASSERT_EQ(vlmax(vt, m), 64u);
  EXPECT_EQ(stripmine(100, vt, m), (std::vector<uint64_t>{64, 36}));
  EXPECT_TRUE(stripmine(0, vt, m).empty());
  EXPECT_EQ(stripmine(64, vt, m), (std::vector<uint64_t>{64}));
}

TEST(Stripmine, SumAndBoundProperty) {
  const MachineConfig m;
  for (uint64_t n = 0; n < 700; n += 7) {
    const VType vt{16, 2, 0};
    const auto vls = stripmine(n, vt, m);
    EXPECT_EQ(std::accumulate(vls.begin(), vls.end(), uint64_t(0)), n);
    for (size_t i = 0; i < vls.size(); ++i) {
      EXPECT_LE(vls[i], vlmax(vt, m));
      if (i + 1 < vls.size()) EXPECT_EQ(vls[i], vlmax(vt, m));
    }
  }
}

namespace {
size_t count_op(const Program& p, Opcode op) {
  size_t n = 0;
  for (const auto& i : p.insts) n += i.opcode == op;
  return n;
}
}  // namespace

TEST(GenKernel, AxpyIterationCount) {
  const MachineConfig m;
  const Program p = gen_kernel(Kernel::Axpy, {30720}, 64, 8, m);
  const uint64_t vm = 512 / 64 * 8;
  EXPECT_EQ(count_op(p, Opcode::Vsetvli), (30720 + vm - 1) / vm);
  EXPECT_EQ(count_op(p, Opcode::Vmacc), (30720 + vm - 1) / vm);
  EXPECT_EQ(count_op(p, Opcode::Vle), 2 * count_op(p, Opcode::Vmacc));
}

TEST(GenKernel, EmptyMemcpy) {
  const Program p = gen_kernel(Kernel::Memcpy, {0}, 32, 1, MachineConfig{});
  ASSERT_EQ(p.insts.size(), 1u);
  EXPECT_EQ(p.insts[0].opcode, Opcode::Vsetvli);
}

TEST(GenKernel, UnsupportedNameIsRejected) {
  EXPECT_THROW(kernel_from_name("conv9d"), ConfigError);
  EXPECT_THROW(gen_kernel(Kernel::Axpy, {1, 2}, 32, 1, MachineConfig{}), ConfigError);
}

TEST(GenKernel, ElementOpCountMatchesAnalyticCount) {
  const MachineConfig m;
  const uint64_t n = 1000;
  const Program p = bind(gen_kernel(Kernel::Axpy, {n}, 32, 2, m), m);
  uint64_t macc = 0, loaded = 0, stored = 0;
  for (const auto& i : p.insts) {
    if (i.opcode == Opcode::Vmacc) macc += i.vtype.vl;
    if (i.opcode == Opcode::Vle) loaded += i.vtype.vl;
    if (i.opcode == Opcode::Vse) stored += i.vtype.vl;
  }
  EXPECT_EQ(macc, n);
  EXPECT_EQ(loaded, 2 * n);
  EXPECT_EQ(stored, n);
}

namespace {

std::vector<uint64_t> words_at(const ByteMemory& mem, uint64_t addr, uint64_t n,
                               unsigned w) {
  std::vector<uint64_t> out(n);
  for (uint64_t i = 0; i < n; ++i) {
    uint64_t v = 0;
    for (unsigned b = 0; b < w; ++b) v |= uint64_t(mem.read8(addr + i * w + b)) << (8 * b);
    out[i] = v;
  }
  return out;
}

std::vector<uint64_t> words_of(const DataInit& d, unsigned w) {
  std::vector<uint64_t> out(d.bytes.size() / w);
  for (size_t i = 0; i < out.size(); ++i) out[i] = load_le(d.bytes, i * w, w);
  return out;
}

uint64_t first_base(const Program& p, Opcode op) {
  for (const auto& i : p.insts)
    if (i.opcode == op) return i.base;
  return 0;
}

}  // namespace

TEST(GenKernel, GemmMatchesScalarTripleLoop) {
  const MachineConfig m;
  const uint64_t M = 8, N = 8, K = 8;
  const Program p = bind(gen_kernel(Kernel::GemmTile, {M, N, K}, 32, 4, m), m);
  ASSERT_GE(p.data_init.size(), 2u);
  const auto a = words_of(p.data_init[0], 4), b = words_of(p.data_init[1], 4);
  const uint64_t c_addr = first_base(p, Opcode::Vse);
  const OracleResult r = exec_program(p, m);
  ASSERT_FALSE(r.trap);
  const auto c = words_at(r.state.mem, c_addr, M * N, 4);
  for (uint64_t i = 0; i < M; ++i)
    for (uint64_t j = 0; j < N; ++j) {
      uint32_t acc = 0;
      for (uint64_t k = 0; k < K; ++k) acc += uint32_t(a[i * K + k]) * uint32_t(b[k * N + j]);
      EXPECT_EQ(c[i * N + j], acc) << i << "," << j;
    }
}

TEST(GenKernel, MemcpyCopiesBytes) {
  const MachineConfig m;
  const uint64_t n = 333;
  const Program p = bind(gen_kernel(Kernel::Memcpy, {n}, 16, 2, m), m);
  const uint64_t src = first_base(p, Opcode::Vle), dst = first_base(p, Opcode::Vse);
  const OracleResult r = exec_program(p, m);
  for (uint64_t i = 0; i < n * 2; ++i)
    ASSERT_EQ(r.state.mem.read8(dst + i), r.state.mem.read8(src + i)) << i;
  EXPECT_EQ(r.state.mem.read8(dst + n * 2), 0);
}

TEST(GenKernel, GatherMatchesIndexWiseCopy) {
  const MachineConfig m;
  const uint64_t n = 150;
  const Program p = bind(gen_kernel(Kernel::Gather, {n}, 32, 2, m), m);
  const auto table = words_of(p.data_init[0], 4);
  const auto idx = words_of(p.data_init[1], 4);
  const uint64_t y = first_base(p, Opcode::Vse);
  const OracleResult r = exec_program(p, m);
  const auto out = words_at(r.state.mem, y, n, 4);
  for (uint64_t i = 0; i < n; ++i) EXPECT_EQ(out[i], table[idx[i] / 4]) << i;
}

TEST(GenKernel, AxpyMatchesScalarReference) {
  const MachineConfig m;
  const uint64_t n = 200;
  const Program p = bind(gen_kernel(Kernel::Axpy, {n}, 32, 4, m), m);
  const auto x = words_of(p.data_init[0], 4), y0 = words_of(p.data_init[1], 4);
  int64_t a = 0;
  for (const auto& i : p.insts)
    if (i.opcode == Opcode::Vmacc) a = i.scalar;
  const OracleResult r = exec_program(p, m);
  const auto y = words_at(r.state.mem, p.data_init[1].addr, n, 4);
  for (uint64_t i = 0; i < n; ++i)
    EXPECT_EQ(y[i], uint32_t(y0[i] + uint32_t(a) * x[i])) << i;
}

TEST(GenKernel, TransposeDeinterleavesFields) {
  const MachineConfig m;
  const uint64_t rows = 70, cols = 3;
  const Program p = bind(gen_kernel(Kernel::Transpose, {rows, cols}, 32, 2, m), m);
  const auto src = words_of(p.data_init[0], 4);
  const uint64_t dst = first_base(p, Opcode::Vse);
  const OracleResult r = exec_program(p, m);
  const auto out = words_at(r.state.mem, dst, rows * cols, 4);
  for (uint64_t i = 0; i < rows; ++i)
    for (uint64_t f = 0; f < cols; ++f)
      EXPECT_EQ(out[f * rows + i], src[i * cols + f]) << i << "," << f;
}
