#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vsim {

/// Raised for malformed machine parameters or instructions that do not fit
/// the configured machine.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Architectural shape of the vector unit.
struct MachineConfig {
  unsigned vlen = 512;  // bits per architectural register
  unsigned dlen = 256;  // datapath bits, one element group
  unsigned num_arch_regs = 32;

  unsigned egs_per_reg() const { return vlen / dlen; }
  unsigned total_egs() const { return egs_per_reg() * num_arch_regs; }
  unsigned row_bytes() const { return dlen / 8; }
  unsigned reg_bytes() const { return vlen / 8; }
  unsigned vrf_bytes() const { return reg_bytes() * num_arch_regs; }

  void validate() const;
};

struct VType {
  unsigned sew = 8;   // 8|16|32|64
  unsigned lmul = 1;  // 1|2|4|8
  uint64_t vl = 0;

  unsigned elem_bytes() const { return sew / 8; }
  bool operator==(const VType&) const = default;
};

enum class Opcode : uint8_t {
  Vadd,
  Vmul,
  Vmacc,
  VfmaOpaque,
  Vle,
  Vse,
  Vlse,
  Vsse,
  Vlxe,
  Vsxe,
  Vlseg,
  Vsseg,
  Vsetvli,
  Scalar,  // host-core work between vector instructions
};

enum class Operand : uint8_t { Vd, Vs1, Vs2 };

struct VectorInstruction {
  Opcode opcode = Opcode::Vadd;
  uint8_t vd = 0;   // destination, or store-data source (vs3)
  uint8_t vs1 = 0;
  uint8_t vs2 = 0;  // second source, or index register for indexed ops
  bool scalar_src = false;  // .vx form: vs1 replaced by `scalar`
  int64_t scalar = 0;
  uint64_t base = 0;
  int64_t stride = 0;
  uint8_t nf = 1;
  // For vector ops: the effective vtype; vl holds the requested AVL until
  // the program is bound to a machine. For vsetvli: the requested vtype.
  VType vtype;
  uint64_t count = 0;  // Scalar: number of host instructions
  uint64_t seq_id = 0;
  unsigned line = 0;  // source line, 0 when generated

  /// Field-wise equality ignoring the diagnostic source line.
  bool operator==(const VectorInstruction& o) const;
};

struct ElementGroupId {
  unsigned index = 0;
  auto operator<=>(const ElementGroupId&) const = default;
};

using GroupSet = std::vector<ElementGroupId>;  // sorted, unique

bool is_vector(Opcode op);
bool is_arith(Opcode op);
bool is_memory(Opcode op);
bool is_load(Opcode op);
bool is_store(Opcode op);
bool is_indexed(Opcode op);
bool is_strided(Opcode op);
bool is_segmented(Opcode op);

/// True when `operand` is a register specifier of `inst`.
bool has_operand(const VectorInstruction& inst, Operand operand);
bool operand_is_written(const VectorInstruction& inst, Operand operand);
uint8_t operand_reg(const VectorInstruction& inst, Operand operand);

std::string_view mnemonic(Opcode op);

/// Element groups of register group `reg` touched by elements [begin, end).
GroupSet groups_in_range(unsigned reg, unsigned sew, uint64_t begin,
                         uint64_t end, const MachineConfig& machine);

/// Element groups an operand touches over elements [0, vl). Segmented
/// destinations cover all nf fields.
GroupSet element_groups_of(const VectorInstruction& inst, Operand operand,
                           const MachineConfig& machine);

/// Same, restricted to elements [begin, end).
GroupSet element_groups_of(const VectorInstruction& inst, Operand operand,
                           uint64_t begin, uint64_t end,
                           const MachineConfig& machine);

uint64_t vlmax(const VType& vtype, const MachineConfig& machine);
unsigned native_chime(const MachineConfig& machine);

void validate_vtype(const VType& vtype, const MachineConfig& machine);

/// Checks register ranges, lmul alignment and memory alignment.
void validate_instruction(const VectorInstruction& inst,
                          const MachineConfig& machine);

/// Byte offset in the flat VRF of element `elem` of register group `reg`.
inline uint64_t vrf_offset(unsigned reg, uint64_t elem, unsigned sew,
                           const MachineConfig& machine) {
  return uint64_t(reg) * machine.reg_bytes() + elem * (sew / 8);
}

inline uint64_t load_le(std::span<const uint8_t> bytes, uint64_t offset,
                        unsigned width) {
  uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i)
    v |= uint64_t(bytes[offset + i]) << (8 * i);
  return v;
}

inline void store_le(std::span<uint8_t> bytes, uint64_t offset,
                     unsigned width, uint64_t value) {
  for (unsigned i = 0; i < width; ++i)
    bytes[offset + i] = uint8_t(value >> (8 * i));
}

inline uint64_t sew_mask(unsigned sew) {
  return sew == 64 ? ~uint64_t(0) : ((uint64_t(1) << sew) - 1);
}

/// Integer element semantics shared by every arithmetic opcode. `acc` is
/// the old destination element (used by multiply-accumulate forms).
uint64_t alu(Opcode op, uint64_t a, uint64_t b, uint64_t acc, unsigned sew);

}  // namespace vsim
