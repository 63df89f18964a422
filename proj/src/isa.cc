#include "vsim/isa.hh"

#include <algorithm>
#include <bit>

namespace vsim {

namespace {

bool pow2(unsigned v) { return v != 0 && std::has_single_bit(v); }

}  // namespace

void MachineConfig::validate() const {
  if (!pow2(vlen) || !pow2(dlen))
    throw ConfigError("VLEN and DLEN must be powers of two");
  if (dlen < 64) throw ConfigError("DLEN must be at least 64 bits");
  if (vlen % dlen != 0)
    throw ConfigError("VLEN (" + std::to_string(vlen) +
                      ") is not divisible by DLEN (" + std::to_string(dlen) +
                      ")");
  if (num_arch_regs == 0 || num_arch_regs > 32)
    throw ConfigError("num_arch_regs must be in 1..32");
}

bool VectorInstruction::operator==(const VectorInstruction& o) const {
  return opcode == o.opcode && vd == o.vd && vs1 == o.vs1 && vs2 == o.vs2 &&
         scalar_src == o.scalar_src && scalar == o.scalar && base == o.base &&
         stride == o.stride && nf == o.nf && vtype == o.vtype &&
         count == o.count && seq_id == o.seq_id;
}

bool is_vector(Opcode op) {
  return op != Opcode::Vsetvli && op != Opcode::Scalar;
}

bool is_arith(Opcode op) {
  return op == Opcode::Vadd || op == Opcode::Vmul || op == Opcode::Vmacc ||
         op == Opcode::VfmaOpaque;
}

bool is_memory(Opcode op) { return is_load(op) || is_store(op); }

bool is_load(Opcode op) {
  return op == Opcode::Vle || op == Opcode::Vlse || op == Opcode::Vlxe ||
         op == Opcode::Vlseg;
}

bool is_store(Opcode op) {
  return op == Opcode::Vse || op == Opcode::Vsse || op == Opcode::Vsxe ||
         op == Opcode::Vsseg;
}

bool is_indexed(Opcode op) { return op == Opcode::Vlxe || op == Opcode::Vsxe; }
bool is_strided(Opcode op) { return op == Opcode::Vlse || op == Opcode::Vsse; }
bool is_segmented(Opcode op) {
  return op == Opcode::Vlseg || op == Opcode::Vsseg;
}

bool has_operand(const VectorInstruction& inst, Operand operand) {
  const Opcode op = inst.opcode;
  if (!is_vector(op)) return false;
  switch (operand) {
    case Operand::Vd:
      return true;
    case Operand::Vs1:
      return is_arith(op) && !inst.scalar_src;
    case Operand::Vs2:
      return is_arith(op) || is_indexed(op);
  }
  return false;
}

bool operand_is_written(const VectorInstruction& inst, Operand operand) {
  return operand == Operand::Vd &&
         (is_arith(inst.opcode) || is_load(inst.opcode));
}

uint8_t operand_reg(const VectorInstruction& inst, Operand operand) {
  switch (operand) {
    case Operand::Vd:
      return inst.vd;
    case Operand::Vs1:
      return inst.vs1;
    case Operand::Vs2:
      return inst.vs2;
  }
  return 0;
}

std::string_view mnemonic(Opcode op) {
  switch (op) {
    case Opcode::Vadd: return "vadd";
    case Opcode::Vmul: return "vmul";
    case Opcode::Vmacc: return "vmacc";
    case Opcode::VfmaOpaque: return "vfma";
    case Opcode::Vle: return "vle";
    case Opcode::Vse: return "vse";
    case Opcode::Vlse: return "vlse";
    case Opcode::Vsse: return "vsse";
    case Opcode::Vlxe: return "vlxe";
    case Opcode::Vsxe: return "vsxe";
    case Opcode::Vlseg: return "vlseg";
    case Opcode::Vsseg: return "vsseg";
    case Opcode::Vsetvli: return "vsetvli";
    case Opcode::Scalar: return "scalar";
  }
  return "?";
}

GroupSet groups_in_range(unsigned reg, unsigned sew, uint64_t begin,
                         uint64_t end, const MachineConfig& machine) {
  GroupSet out;
  if (end <= begin) return out;
  const uint64_t first_bit = begin * sew;
  const uint64_t last_bit = end * sew;  // exclusive
  const uint64_t g0 = first_bit / machine.dlen;
  const uint64_t g1 = (last_bit + machine.dlen - 1) / machine.dlen;
  const unsigned base = reg * machine.egs_per_reg();
  for (uint64_t g = g0; g < g1; ++g)
    out.push_back(ElementGroupId{unsigned(base + g)});
  return out;
}

GroupSet element_groups_of(const VectorInstruction& inst, Operand operand,
                           const MachineConfig& machine) {
  return element_groups_of(inst, operand, 0, inst.vtype.vl, machine);
}

GroupSet element_groups_of(const VectorInstruction& inst, Operand operand,
                           uint64_t begin, uint64_t end,
                           const MachineConfig& machine) {
  if (!has_operand(inst, operand))
    throw ConfigError("operand not present for " +
                      std::string(mnemonic(inst.opcode)));
  const unsigned reg = operand_reg(inst, operand);
  const unsigned sew = inst.vtype.sew;
  const unsigned lmul = inst.vtype.lmul;
  const unsigned fields =
      (operand == Operand::Vd && is_segmented(inst.opcode)) ? inst.nf : 1;
  if (reg + fields * lmul > machine.num_arch_regs)
    throw ConfigError("register v" + std::to_string(reg) +
                      " group exceeds the architectural register count");
  GroupSet out;
  for (unsigned f = 0; f < fields; ++f) {
    GroupSet part = groups_in_range(reg + f * lmul, sew, begin, end, machine);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

uint64_t vlmax(const VType& vtype, const MachineConfig& machine) {
  return uint64_t(machine.vlen / vtype.sew) * vtype.lmul;
}

unsigned native_chime(const MachineConfig& machine) {
  if (machine.dlen == 0 || machine.vlen % machine.dlen != 0)
    throw ConfigError("VLEN is not divisible by DLEN");
  return machine.vlen / machine.dlen;
}

void validate_vtype(const VType& vtype, const MachineConfig& machine) {
  if (vtype.sew != 8 && vtype.sew != 16 && vtype.sew != 32 && vtype.sew != 64)
    throw ConfigError("unsupported SEW " + std::to_string(vtype.sew));
  if (vtype.lmul != 1 && vtype.lmul != 2 && vtype.lmul != 4 &&
      vtype.lmul != 8)
    throw ConfigError("unsupported LMUL " + std::to_string(vtype.lmul));
  if (vtype.sew > machine.dlen)
    throw ConfigError("SEW exceeds DLEN");
  if (vtype.vl > vlmax(vtype, machine))
    throw ConfigError("vl exceeds VLMAX");
}

void validate_instruction(const VectorInstruction& inst,
                          const MachineConfig& machine) {
  if (!is_vector(inst.opcode)) return;
  validate_vtype(inst.vtype, machine);
  const unsigned lmul = inst.vtype.lmul;
  for (Operand o : {Operand::Vd, Operand::Vs1, Operand::Vs2}) {
    if (!has_operand(inst, o)) continue;
    const unsigned reg = operand_reg(inst, o);
    const unsigned fields =
        (o == Operand::Vd && is_segmented(inst.opcode)) ? inst.nf : 1;
    if (reg % lmul != 0)
      throw ConfigError("register v" + std::to_string(reg) +
                        " is not aligned to LMUL " + std::to_string(lmul));
    if (reg + fields * lmul > machine.num_arch_regs)
      throw ConfigError("register v" + std::to_string(reg) + " out of range");
  }
  if (is_segmented(inst.opcode)) {
    if (inst.nf < 1 || inst.nf > 8)
      throw ConfigError("segment field count must be 1..8");
    if (inst.nf * lmul > 8) throw ConfigError("nf * LMUL exceeds 8");
  }
  if (is_memory(inst.opcode)) {
    const unsigned w = inst.vtype.elem_bytes();
    if (inst.base % w != 0)
      throw ConfigError("memory base is not element aligned");
    if (is_strided(inst.opcode) && inst.stride % int64_t(w) != 0)
      throw ConfigError("stride is not element aligned");
  }
}

uint64_t alu(Opcode op, uint64_t a, uint64_t b, uint64_t acc, unsigned sew) {
  uint64_t r = 0;
  switch (op) {
    case Opcode::Vadd:
      r = a + b;
      break;
    case Opcode::Vmul:
      r = a * b;
      break;
    case Opcode::Vmacc:
    case Opcode::VfmaOpaque:
      r = acc + a * b;
      break;
    default:
      break;
  }
  return r & sew_mask(sew);
}

}  // namespace vsim
