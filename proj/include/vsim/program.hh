#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vsim/isa.hh"

namespace vsim {

struct DataInit {
  uint64_t addr = 0;
  std::vector<uint8_t> bytes;
  bool operator==(const DataInit&) const = default;
};

struct Program {
  std::vector<VectorInstruction> insts;
  std::vector<DataInit> data_init;
  std::string name;
  std::string size;

  bool operator==(const Program&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(unsigned line, unsigned column, const std::string& msg);
  unsigned line() const { return line_; }
  unsigned column() const { return column_; }

 private:
  unsigned line_;
  unsigned column_;
};

/// Parses the textual mini-assembly format:
///
///   # comment
///   .data 0x1000 00112233...        initial memory bytes (hex string)
///   vsetvli <avl>, e<sew>, m<lmul>
///   vadd|vmul|vmacc|vfma vd, vs1, vs2
///   vadd.vx|vmul.vx|vmacc.vx|vfma.vx vd, <imm>, vs2
///   vle[<eew>] vd, <addr>          vse[<eew>] vs3, <addr>
///   vlse[<eew>] vd, <addr>, <stride>  vsse[<eew>] vs3, <addr>, <stride>
///   vlxe[<eew>] vd, <addr>, vs2    vsxe[<eew>] vs3, <addr>, vs2
///   vlseg<nf>e[<eew>] vd, <addr>   vsseg<nf>e[<eew>] vs3, <addr>
///   scalar <n>
///
/// Instructions carry the vtype of the preceding vsetvli with vl holding the
/// requested AVL; `bind` resolves it against a machine.
Program parse(std::string_view text);

/// Inverse of `parse` for unbound programs.
std::string render(const Program& program);

/// Renders one instruction in the textual format.
std::string render_inst(const VectorInstruction& inst);

/// Clamps every vl to VLMAX for `machine`, renumbers seq_ids and validates
/// every instruction. Idempotent.
Program bind(Program program, const MachineConfig& machine);

/// Per-iteration vl values of a stripmined loop over `total_elems`.
std::vector<uint64_t> stripmine(uint64_t total_elems, const VType& vtype,
                                const MachineConfig& machine);

enum class Kernel { Axpy, Memcpy, GemmTile, Transpose, Gather, StreamLoad };

Kernel kernel_from_name(std::string_view name);
std::string_view kernel_name(Kernel kernel);

/// Problem dimensions: {n} for vector kernels, {m, n, k} for gemm_tile,
/// {rows, cols} for transpose.
using KernelSize = std::vector<uint64_t>;
KernelSize parse_size(std::string_view text);
std::string format_size(const KernelSize& size);

/// Stripmined kernel program. Arrays start at 0x1000 and are page aligned.
Program gen_kernel(Kernel kernel, const KernelSize& size, unsigned sew,
                   unsigned lmul, const MachineConfig& machine);

struct RandomProgramOptions {
  unsigned max_insts = 64;
  unsigned hot_regs = 8;
  bool allow_indexed = true;
  bool allow_strided = true;
  bool allow_segmented = true;
  bool allow_scalar = true;
};

/// Hazard-dense random program over a small overlapping memory window.
Program gen_random(uint64_t seed, const RandomProgramOptions& opts,
                   const MachineConfig& machine);

}  // namespace vsim
