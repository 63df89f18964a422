#include "vsim/lsu.hh"

#include <algorithm>
#include <stdexcept>

namespace vsim {

namespace {

uint64_t align_down(uint64_t v, uint64_t a) { return v / a * a; }
uint64_t align_up(uint64_t v, uint64_t a) { return (v + a - 1) / a * a; }

}  // namespace

MemLayout build_layout(const DispatchOp& op, const MachineConfig& machine) {
  MemLayout out;
  const VectorInstruction& inst = op.inst;
  if (op.end <= op.begin || !is_memory(inst.opcode)) return out;
  const unsigned sew = inst.vtype.sew;
  const uint64_t w = sew / 8;
  const uint64_t line = machine.row_bytes();
  const bool load = is_load(inst.opcode);

  if (op.element_op()) {
    const uint64_t e = op.begin;
    MemRow row;
    row.eg = ElementGroupId{unsigned(inst.vd * machine.egs_per_reg() +
                                     e * sew / machine.dlen)};
    row.slots.push_back(Slot{op.elem_addr, vrf_offset(inst.vd, e, sew, machine),
                             unsigned(w)});
    out.rows.push_back(row);
    out.reqs.push_back(LineRequest{op.elem_addr, unsigned(w), 0});
    out.hull = out.image = ByteRange{op.elem_addr, op.elem_addr + w};
    return out;
  }

  const unsigned fields = is_segmented(inst.opcode) ? inst.nf : 1;
  const unsigned lmul = inst.vtype.lmul;
  const uint64_t rec = fields * w;
  out.hull = ByteRange{inst.base + op.begin * rec, inst.base + op.end * rec};
  const uint64_t first_line = align_down(out.hull.begin, line);
  if (load) {
    out.image = ByteRange{first_line, align_up(out.hull.end, line)};
    for (uint64_t a = out.image.begin; a < out.image.end; a += line)
      out.reqs.push_back(LineRequest{a, unsigned(line), 0});
  } else {
    out.image = out.hull;
    for (uint64_t a = out.hull.begin; a < out.hull.end;) {
      const uint64_t stop = std::min(out.hull.end, align_down(a, line) + line);
      out.reqs.push_back(LineRequest{a, unsigned(stop - a), 0});
      a = stop;
    }
  }
  auto req_of = [&](uint64_t addr) {
    return uint32_t((align_down(addr, line) - first_line) / line);
  };

  const uint64_t epg = machine.dlen / sew;
  for (uint64_t k = op.begin / epg; k * epg < op.end; ++k) {
    const uint64_t e0 = std::max(op.begin, k * epg);
    const uint64_t e1 = std::min(op.end, (k + 1) * epg);
    for (unsigned f = 0; f < fields; ++f) {
      const unsigned reg = inst.vd + f * lmul;
      MemRow row;
      row.eg = ElementGroupId{unsigned(reg * machine.egs_per_reg() + k)};
      if (fields == 1) {
        row.slots.push_back(Slot{inst.base + e0 * w, vrf_offset(reg, e0, sew, machine),
                                 unsigned((e1 - e0) * w)});
      } else {
        for (uint64_t e = e0; e < e1; ++e)
          row.slots.push_back(Slot{inst.base + (e * fields + f) * w,
                                   vrf_offset(reg, e, sew, machine), unsigned(w)});
      }
      const uint32_t idx = uint32_t(out.rows.size());
      for (const Slot& s : row.slots) {
        const uint32_t r0 = req_of(s.mem_addr);
        const uint32_t r1 = req_of(s.mem_addr + s.width - 1);
        row.last_req = std::max(row.last_req, r1);
        for (uint32_t r = r0; r <= r1; ++r)
          out.reqs[r].last_row = std::max(out.reqs[r].last_row, idx);
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

bool cam_check(const InFlightEntry& entry,
               const std::deque<InFlightEntry>& others) {
  for (const auto& o : others) {
    if (!(o.age < entry.age)) continue;
    if (!o.range().overlaps(entry.range())) continue;
    if (entry.kind == MemKind::Load && o.kind == MemKind::Store && !o.drained())
      return false;
    if (entry.kind == MemKind::Store && o.kind == MemKind::Load &&
        o.reqs_issued < o.layout.reqs.size())
      return false;
  }
  return true;
}

void merge_load(const MemRow& row, std::span<const uint8_t> image,
                uint64_t image_base, std::span<uint8_t> vrf) {
  for (const Slot& s : row.slots)
    std::copy_n(image.begin() + (s.mem_addr - image_base), s.width,
                vrf.begin() + s.vrf_off);
}

std::vector<std::vector<uint8_t>> seg_transpose(MemKind direction, unsigned nf,
                                                unsigned sew, uint64_t records,
                                                std::span<const uint8_t> stream,
                                                const MachineConfig& machine) {
  if (nf < 1 || nf > 8) throw ConfigError("nf must be 1..8");
  const uint64_t w = sew / 8;
  unsigned lmul = 1;
  while (lmul < 8 && records > vlmax(VType{sew, lmul, 0}, machine)) lmul *= 2;
  if (records > vlmax(VType{sew, lmul, 0}, machine) || nf * lmul > 8 ||
      nf * lmul > machine.num_arch_regs)
    throw ConfigError("segment does not fit the register file");

  DispatchOp op;
  op.inst.opcode = direction == MemKind::Load ? Opcode::Vlseg : Opcode::Vsseg;
  op.inst.nf = uint8_t(nf);
  op.inst.vtype = VType{sew, lmul, records};
  op.begin = 0;
  op.end = records;
  const MemLayout layout = build_layout(op, machine);
  std::vector<uint8_t> vrf(machine.vrf_bytes(), 0);
  const uint64_t field_bytes = records * w;

  std::vector<std::vector<uint8_t>> out;
  if (direction == MemKind::Load) {
    std::vector<uint8_t> image(layout.image.size(), 0);
    std::copy_n(stream.begin(), std::min<uint64_t>(stream.size(), nf * field_bytes),
                image.begin() + (layout.hull.begin - layout.image.begin));
    for (const auto& row : layout.rows)
      merge_load(row, image, layout.image.begin, vrf);
    for (unsigned f = 0; f < nf; ++f) {
      const uint64_t off = vrf_offset(f * lmul, 0, sew, machine);
      out.emplace_back(vrf.begin() + off, vrf.begin() + off + field_bytes);
    }
  } else {
    for (unsigned f = 0; f < nf; ++f)
      std::copy_n(stream.begin() + f * field_bytes, field_bytes,
                  vrf.begin() + vrf_offset(f * lmul, 0, sew, machine));
    std::vector<uint8_t> image(layout.image.size(), 0);
    for (const auto& row : layout.rows)
      for (const Slot& s : row.slots)
        std::copy_n(vrf.begin() + s.vrf_off, s.width,
                    image.begin() + (s.mem_addr - layout.image.begin));
    out.push_back(std::move(image));
  }
  return out;
}

LoadStoreUnit::LoadStoreUnit(const LsuConfig& cfg, const MachineConfig& machine,
                             MemorySystem* mem)
    : cfg_(cfg), machine_(machine), mem_(mem) {}

bool LoadStoreUnit::can_alloc(MemKind kind) const {
  return kind == MemKind::Load ? loads_.size() < cfg_.inflight_loads
                               : stores_.size() < cfg_.inflight_stores;
}

void LoadStoreUnit::alloc(const DispatchOp& op, AgeTag age) {
  InFlightEntry e;
  e.seq_id = op.inst.seq_id;
  e.age = age;
  e.kind = is_load(op.inst.opcode) ? MemKind::Load : MemKind::Store;
  e.layout = build_layout(op, machine_);
  e.base = e.layout.hull.begin;
  e.extent = e.layout.hull.size();
  e.image.assign(e.layout.image.size(), 0);
  (e.kind == MemKind::Load ? loads_ : stores_).push_back(std::move(e));
}

InFlightEntry* LoadStoreUnit::find(AgeTag age, MemKind kind) {
  auto& q = kind == MemKind::Load ? loads_ : stores_;
  for (auto& e : q)
    if (e.age == age) return &e;
  return nullptr;
}

unsigned LoadStoreUnit::receive(uint64_t cycle) {
  unsigned n = 0;
  for (auto& resp : mem_->collect(Requester::Load, cycle)) {
    InFlightEntry* e = find(AgeTag{resp.tag}, MemKind::Load);
    if (!e) throw std::logic_error("load response without an in-flight entry");
    std::copy(resp.data.begin(), resp.data.end(),
              e->image.begin() + (resp.addr - e->layout.image.begin));
    ++e->reqs_done;
    ++n;
  }
  n += unsigned(mem_->collect(Requester::Store, cycle).size());
  return n;
}

void LoadStoreUnit::write_row(AgeTag age, uint32_t row, std::span<uint8_t> vrf) {
  auto it = std::find_if(loads_.begin(), loads_.end(),
                         [&](const InFlightEntry& e) { return e.age == age; });
  if (it == loads_.end() || !row_ready(*it, row) || row != it->rows_done)
    throw std::logic_error("load row written out of order or before arrival");
  merge_load(it->layout.rows[row], it->image, it->layout.image.begin, vrf);
  if (++it->rows_done == it->layout.rows.size()) loads_.erase(it);
}

void LoadStoreUnit::read_row(AgeTag age, uint32_t row,
                             std::span<const uint8_t> vrf) {
  InFlightEntry* e = find(age, MemKind::Store);
  if (!e || row != e->rows_done)
    throw std::logic_error("store row read out of order");
  for (const Slot& s : e->layout.rows[row].slots)
    std::copy_n(vrf.begin() + s.vrf_off, s.width,
                e->image.begin() + (s.mem_addr - e->layout.image.begin));
  ++e->rows_done;
  ++buffered_rows_;
}

bool LoadStoreUnit::store_buffer_full() const {
  if (buffered_rows_ < cfg_.store_buffer_rows) return false;
  for (const auto& e : stores_) {
    if (e.reqs_issued == e.layout.reqs.size()) continue;
    return e.rows_done > e.layout.reqs[e.reqs_issued].last_row;
  }
  return false;
}

void LoadStoreUnit::retire_stores() {
  for (auto& e : stores_) {
    while (e.rows_freed < e.rows_done &&
           e.reqs_done > e.layout.rows[e.rows_freed].last_req) {
      ++e.rows_freed;
      --buffered_rows_;
    }
  }
  while (!stores_.empty() && stores_.front().drained()) stores_.pop_front();
}

bool LoadStoreUnit::issue_store(uint64_t cycle) {
  for (auto& e : stores_) {
    if (e.reqs_issued == e.layout.reqs.size()) continue;
    const LineRequest& r = e.layout.reqs[e.reqs_issued];
    if (e.rows_done <= r.last_row) return false;
    if (!cam_check(e, loads_)) return false;
    MemRequest req;
    req.addr = r.addr;
    req.bytes = r.bytes;
    req.tag = e.age.tag;
    req.who = Requester::Store;
    const uint64_t off = r.addr - e.layout.image.begin;
    req.data.assign(e.image.begin() + off, e.image.begin() + off + r.bytes);
    if (!mem_->request(std::move(req), cycle)) return false;
    ++e.reqs_issued;
    ++e.reqs_done;
    retire_stores();
    return true;
  }
  return false;
}

bool LoadStoreUnit::issue_load(uint64_t cycle, bool dae, const AgeTag* coupled) {
  for (auto& e : loads_) {
    if (e.reqs_issued == e.layout.reqs.size()) continue;
    if (!dae && (!coupled || !(e.age == *coupled))) return false;
    if (!cam_check(e, stores_)) return false;
    const LineRequest& r = e.layout.reqs[e.reqs_issued];
    MemRequest req;
    req.addr = r.addr;
    req.bytes = r.bytes;
    req.tag = e.age.tag;
    req.who = Requester::Load;
    if (!mem_->request(std::move(req), cycle)) return false;
    ++e.reqs_issued;
    return true;
  }
  return false;
}

unsigned LoadStoreUnit::runahead_loads() const {
  unsigned n = 0;
  for (const auto& e : loads_)
    if (e.reqs_issued > 0) ++n;
  return n;
}

}  // namespace vsim
