#include "vsim/oracle.hh"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace vsim {

bool FaultMap::faults(uint64_t addr, uint64_t bytes) const {
  if (pages.empty() || bytes == 0) return false;
  for (uint64_t p = addr / page_bytes; p <= (addr + bytes - 1) / page_bytes; ++p)
    if (pages.count(p)) return true;
  return false;
}

ArchState ArchState::initial(const Program& program, const MachineConfig& m) {
  ArchState s;
  s.vrf.assign(m.vrf_bytes(), 0);
  for (const auto& d : program.data_init) s.mem.write(d.addr, d.bytes);
  return s;
}

uint64_t element_addr(const VectorInstruction& inst, uint64_t e, unsigned f,
                      std::span<const uint8_t> vrf,
                      const MachineConfig& machine) {
  const unsigned w = inst.vtype.elem_bytes();
  switch (inst.opcode) {
    case Opcode::Vlse:
    case Opcode::Vsse:
      return inst.base + uint64_t(int64_t(e) * inst.stride);
    case Opcode::Vlxe:
    case Opcode::Vsxe:
      return inst.base +
             load_le(vrf, vrf_offset(inst.vs2, e, inst.vtype.sew, machine), w);
    case Opcode::Vlseg:
    case Opcode::Vsseg:
      return inst.base + (e * inst.nf + f) * w;
    default:
      return inst.base + e * w;
  }
}

std::optional<Trap> exec_one(ArchState& s, const VectorInstruction& inst,
                             const MachineConfig& machine,
                             const FaultMap& faults) {
  if (inst.opcode == Opcode::Vsetvli) {
    VType req = inst.vtype;
    s.vtype = VType{req.sew, req.lmul,
                    std::min(req.vl, vlmax(VType{req.sew, req.lmul, 0}, machine))};
    return std::nullopt;
  }
  if (inst.opcode == Opcode::Scalar) return std::nullopt;

  const unsigned sew = inst.vtype.sew;
  const unsigned w = sew / 8;
  const uint64_t vl = inst.vtype.vl;

  if (is_arith(inst.opcode)) {
    for (uint64_t e = 0; e < vl; ++e) {
      const uint64_t a =
          inst.scalar_src
              ? uint64_t(inst.scalar) & sew_mask(sew)
              : load_le(s.vrf, vrf_offset(inst.vs1, e, sew, machine), w);
      const uint64_t b = load_le(s.vrf, vrf_offset(inst.vs2, e, sew, machine), w);
      const uint64_t d_off = vrf_offset(inst.vd, e, sew, machine);
      store_le(s.vrf, d_off, w, alu(inst.opcode, a, b, load_le(s.vrf, d_off, w), sew));
    }
    return std::nullopt;
  }

  const unsigned fields = is_segmented(inst.opcode) ? inst.nf : 1;
  const unsigned lmul = inst.vtype.lmul;
  for (uint64_t e = 0; e < vl; ++e) {
    for (unsigned f = 0; f < fields; ++f) {
      const uint64_t addr = element_addr(inst, e, f, s.vrf, machine);
      if (faults.faults(addr, w)) return Trap{inst.seq_id, e, addr};
    }
    for (unsigned f = 0; f < fields; ++f) {
      const uint64_t addr = element_addr(inst, e, f, s.vrf, machine);
      const uint64_t off = vrf_offset(inst.vd + f * lmul, e, sew, machine);
      if (is_load(inst.opcode))
        s.mem.read(addr, std::span<uint8_t>(s.vrf).subspan(off, w));
      else
        s.mem.write(addr, std::span<const uint8_t>(s.vrf).subspan(off, w));
    }
  }
  return std::nullopt;
}

OracleResult exec_program(const Program& program, const MachineConfig& machine,
                          const FaultMap& faults) {
  OracleResult r{ArchState::initial(program, machine), std::nullopt};
  for (const auto& inst : program.insts) {
    r.trap = exec_one(r.state, inst, machine, faults);
    if (r.trap) break;
  }
  return r;
}

void dump_arch(std::ostream& os, const ArchState& state,
               const MachineConfig& machine) {
  const unsigned rb = machine.reg_bytes();
  char buf[8];
  for (unsigned r = 0; r < machine.num_arch_regs; ++r) {
    auto reg = std::span<const uint8_t>(state.vrf).subspan(r * rb, rb);
    if (std::none_of(reg.begin(), reg.end(), [](uint8_t b) { return b; }))
      continue;
    os << 'v' << r << ':';
    // Highest byte first, so elements read as numbers.
    for (size_t i = rb; i-- > 0;) {
      std::snprintf(buf, sizeof(buf), "%02x", reg[i]);
      if ((i + 1) % 8 == 0 && i + 1 != rb) os << '_';
      else if (i + 1 == rb) os << ' ';
      os << buf;
    }
    os << '\n';
  }
  write_image(os, state.mem);
}

}  // namespace vsim
