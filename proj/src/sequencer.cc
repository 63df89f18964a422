#include "vsim/sequencer.hh"

#include <algorithm>

#include "vsim/lsu.hh"

namespace vsim {

BackendOp make_backend_op(const DispatchOp& dop, AgeTag age,
                          const MachineConfig& machine) {
  BackendOp op;
  op.dop = dop;
  op.age = age;
  op.path = is_load(dop.inst.opcode)    ? Path::Load
            : is_store(dop.inst.opcode) ? Path::Store
                                        : Path::Arith;
  auto [r, w] = coarse_from_range(dop.inst, dop.begin, dop.end, machine);
  op.prsb = std::move(r);
  op.pwsb = std::move(w);
  return op;
}

IrregularPolicy irregular_policy(const VectorInstruction& inst) {
  return is_indexed(inst.opcode) ? IrregularPolicy::HoldUntilDone
                                 : IrregularPolicy::ClearOnIssue;
}

std::vector<MicroOp> crack(const BackendOp& op, const MachineConfig& machine,
                           unsigned fu_latency) {
  std::vector<MicroOp> out;
  const DispatchOp& d = op.dop;
  const VectorInstruction& inst = d.inst;
  if (d.end <= d.begin) return out;

  if (is_arith(inst.opcode)) {
    const GroupSet vd = groups_in_range(inst.vd, inst.vtype.sew, d.begin, d.end, machine);
    const GroupSet vs2 = groups_in_range(inst.vs2, inst.vtype.sew, d.begin, d.end, machine);
    GroupSet vs1;
    if (!inst.scalar_src)
      vs1 = groups_in_range(inst.vs1, inst.vtype.sew, d.begin, d.end, machine);
    const bool acc = inst.opcode == Opcode::Vmacc || inst.opcode == Opcode::VfmaOpaque;
    for (size_t k = 0; k < vd.size(); ++k) {
      MicroOp u;
      if (!vs1.empty()) u.reads.push_back(vs1[k]);
      u.reads.push_back(vs2[k]);
      if (acc) u.reads.push_back(vd[k]);
      std::sort(u.reads.begin(), u.reads.end());
      u.reads.erase(std::unique(u.reads.begin(), u.reads.end()), u.reads.end());
      u.write = vd[k];
      u.fu = FuKind::Alu;
      u.wb_delay = fu_latency;
      out.push_back(std::move(u));
    }
  } else {
    const MemLayout layout = build_layout(d, machine);
    const bool load = is_load(inst.opcode);
    GroupSet index;
    if (is_indexed(inst.opcode))
      index = groups_in_range(inst.vs2, inst.vtype.sew, d.begin, d.end, machine);
    for (const MemRow& row : layout.rows) {
      MicroOp u;
      if (load) {
        u.write = row.eg;
        u.fu = FuKind::LoadWrite;
      } else {
        u.reads.push_back(row.eg);
        u.fu = FuKind::StoreRead;
      }
      u.reads.insert(u.reads.end(), index.begin(), index.end());
      std::sort(u.reads.begin(), u.reads.end());
      u.reads.erase(std::unique(u.reads.begin(), u.reads.end()), u.reads.end());
      out.push_back(std::move(u));
    }
  }
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].age = op.age;
    out[i].index = uint32_t(i);
    out[i].last = i + 1 == out.size();
  }
  return out;
}

void SequencerState::load(BackendOp next, const MachineConfig& machine,
                          unsigned fu_latency) {
  uops = crack(next, machine, fu_latency);
  prsb = next.prsb;
  pwsb = next.pwsb;
  next_index = 0;
  op = std::move(next);
}

std::optional<MicroOp> next_microop(const SequencerState& seq) {
  if (!seq.busy() || seq.next_index >= seq.uops.size()) return std::nullopt;
  return seq.uops[seq.next_index];
}

void retire_microop(SequencerState& seq, const MicroOp& uop) {
  if (irregular_policy(seq.op->dop.inst) == IrregularPolicy::HoldUntilDone) {
    if (uop.last) {
      seq.prsb.clear();
      seq.pwsb.clear();
    }
    return;
  }
  auto later_reads = [&](ElementGroupId g) {
    for (size_t i = uop.index + 1; i < seq.uops.size(); ++i)
      for (auto r : seq.uops[i].reads)
        if (r == g) return true;
    return false;
  };
  auto later_writes = [&](ElementGroupId g) {
    for (size_t i = uop.index + 1; i < seq.uops.size(); ++i)
      if (seq.uops[i].write == g) return true;
    return false;
  };
  for (auto g : uop.reads)
    if (!later_reads(g)) seq.prsb.reset(g.index);
  if (uop.write && !later_writes(*uop.write)) seq.pwsb.reset(uop.write->index);
  if (uop.last) {
    seq.prsb.clear();
    seq.pwsb.clear();
  }
}

std::string_view stall_name(Stall s) {
  switch (s) {
    case Stall::None: return "issue";
    case Stall::Empty: return "empty";
    case Stall::Raw: return "raw";
    case Stall::Waw: return "waw";
    case Stall::War: return "war";
    case Stall::ReadPort: return "read_port";
    case Stall::WritePort: return "write_port";
    case Stall::FuPort: return "fu_port";
    case Stall::LoadData: return "load_data";
    case Stall::StoreBuffer: return "store_buffer";
    case Stall::InOrder: return "in_order";
  }
  return "?";
}

Stall stall_of(Hazard h) {
  switch (h) {
    case Hazard::Raw: return Stall::Raw;
    case Hazard::Waw: return Stall::Waw;
    case Hazard::War: return Stall::War;
    case Hazard::Clear: return Stall::None;
  }
  return Stall::None;
}

}  // namespace vsim
