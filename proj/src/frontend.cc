#include "vsim/frontend.hh"

#include <algorithm>

namespace vsim {

std::optional<ByteRange> bound_of(const VectorInstruction& inst) {
  if (is_indexed(inst.opcode)) return std::nullopt;
  const uint64_t vl = inst.vtype.vl;
  const uint64_t w = inst.vtype.elem_bytes();
  if (vl == 0) return ByteRange{inst.base, inst.base};
  if (is_strided(inst.opcode)) {
    const int64_t last = int64_t(vl - 1) * inst.stride;
    if (last >= 0) return ByteRange{inst.base, inst.base + uint64_t(last) + w};
    return ByteRange{inst.base + uint64_t(last), inst.base + w};
  }
  const uint64_t fields = is_segmented(inst.opcode) ? inst.nf : 1;
  return ByteRange{inst.base, inst.base + vl * fields * w};
}

bool pipelined(const VectorInstruction& inst) {
  if (!is_memory(inst.opcode)) return true;
  if (is_indexed(inst.opcode)) return false;
  if (is_strided(inst.opcode))
    return inst.stride == int64_t(inst.vtype.elem_bytes());
  return true;
}

VectorInstruction canonicalize(const VectorInstruction& inst) {
  VectorInstruction out = inst;
  if (is_strided(inst.opcode) && inst.stride == int64_t(inst.vtype.elem_bytes())) {
    out.opcode = is_load(inst.opcode) ? Opcode::Vle : Opcode::Vse;
    out.stride = 0;
  }
  return out;
}

namespace {

Trap record_trap(const VectorInstruction& inst, uint64_t rec,
                 const FaultMap& faults) {
  const uint64_t w = inst.vtype.elem_bytes();
  const unsigned fields = is_segmented(inst.opcode) ? inst.nf : 1;
  const uint64_t first = inst.base + rec * fields * w;
  for (unsigned f = 0; f < fields; ++f)
    if (faults.faults(first + f * w, w)) return Trap{inst.seq_id, rec, first + f * w};
  return Trap{inst.seq_id, rec, first};
}

}  // namespace

CrackResult check_and_dispatch(const VectorInstruction& raw,
                               const FrontendConfig& fe,
                               const MachineConfig& machine) {
  (void)machine;
  CrackResult out;
  const VectorInstruction inst = canonicalize(raw);
  const uint64_t vl = inst.vtype.vl;
  if (!is_memory(inst.opcode) || vl == 0) {
    DispatchOp op;
    op.inst = inst;
    op.begin = 0;
    op.end = vl;
    if (is_memory(inst.opcode)) op.phys_slice = ByteRange{inst.base, inst.base};
    out.ops.push_back(op);
    return out;
  }

  const FaultMap faults = fe.faults();
  const uint64_t page = fe.page_bytes;
  const uint64_t w = inst.vtype.elem_bytes();
  const uint64_t rec = (is_segmented(inst.opcode) ? inst.nf : 1) * w;
  auto rec_begin = [&](uint64_t r) { return inst.base + r * rec; };

  uint64_t r = 0;
  unsigned index = 0;
  while (r < vl) {
    const uint64_t lo = rec_begin(r);
    const uint64_t page_end = (lo / page + 1) * page;
    uint64_t r_end;
    unsigned checks = 1;
    if (lo + rec > page_end) {
      // Record straddles the boundary: isolate it, checking both pages.
      r_end = r + 1;
      checks = unsigned((lo + rec - 1) / page - lo / page + 1);
    } else {
      r_end = std::min(vl, r + (page_end - lo) / rec);
    }
    const ByteRange slice{lo, rec_begin(r_end)};
    out.tlb_checks += checks;
    if (faults.faults(slice.begin, slice.size())) {
      out.trap = record_trap(inst, r, faults);
      return out;
    }
    DispatchOp op;
    op.inst = inst;
    op.begin = r;
    op.end = r_end;
    op.phys_slice = slice;
    op.crack_index = index++;
    op.cost = checks;
    out.ops.push_back(op);
    r = r_end;
  }
  return out;
}

CrackResult iterative_expand(const VectorInstruction& inst,
                             std::span<const uint8_t> vrf,
                             const FrontendConfig& fe,
                             const MachineConfig& machine) {
  CrackResult out;
  const FaultMap faults = fe.faults();
  const uint64_t w = inst.vtype.elem_bytes();
  uint64_t prev_page = 0;
  for (uint64_t e = 0; e < inst.vtype.vl; ++e) {
    const uint64_t addr = element_addr(inst, e, 0, vrf, machine);
    const uint64_t pg = addr / fe.page_bytes;
    const bool change = e == 0 || pg != prev_page;
    prev_page = pg;
    out.tlb_checks += change;
    if (faults.faults(addr, w)) {
      out.trap = Trap{inst.seq_id, e, addr};
      return out;
    }
    DispatchOp op;
    op.inst = inst;
    op.begin = e;
    op.end = e + 1;
    op.phys_slice = ByteRange{addr, addr + w};
    op.crack_index = unsigned(e);
    op.cost = 1 + change;
    op.elem_addr = addr;
    out.ops.push_back(op);
  }
  return out;
}

}  // namespace vsim
