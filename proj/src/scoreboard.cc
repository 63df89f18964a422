#include "vsim/scoreboard.hh"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace vsim {

bool EgScoreboard::any() const {
  return std::any_of(words_.begin(), words_.end(), [](uint64_t w) { return w; });
}

unsigned EgScoreboard::count() const {
  unsigned n = 0;
  for (uint64_t w : words_) n += std::popcount(w);
  return n;
}

bool EgScoreboard::intersects(const EgScoreboard& o) const {
  for (size_t i = 0; i < words_.size() && i < o.words_.size(); ++i)
    if (words_[i] & o.words_[i]) return true;
  return false;
}

bool EgScoreboard::intersects(const GroupSet& groups) const {
  for (auto g : groups)
    if (g.index < size_ && test(g.index)) return true;
  return false;
}

EgScoreboard& EgScoreboard::operator|=(const EgScoreboard& o) {
  for (size_t i = 0; i < words_.size() && i < o.words_.size(); ++i)
    words_[i] |= o.words_[i];
  return *this;
}

std::string EgScoreboard::render() const {
  std::string out = std::to_string(size_) + "'b";
  for (unsigned i = size_; i-- > 0;) out += test(i) ? '1' : '0';
  return out;
}

namespace {

void merge_into(GroupSet& dst, const GroupSet& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void normalize(GroupSet& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

}  // namespace

Footprint footprint_of(const VectorInstruction& inst, uint64_t begin,
                       uint64_t end, const MachineConfig& machine) {
  Footprint fp;
  if (!is_vector(inst.opcode) || end <= begin) return fp;
  const GroupSet vd = element_groups_of(inst, Operand::Vd, begin, end, machine);
  if (is_arith(inst.opcode)) {
    if (has_operand(inst, Operand::Vs1))
      merge_into(fp.reads, element_groups_of(inst, Operand::Vs1, begin, end, machine));
    merge_into(fp.reads, element_groups_of(inst, Operand::Vs2, begin, end, machine));
    if (inst.opcode == Opcode::Vmacc || inst.opcode == Opcode::VfmaOpaque)
      merge_into(fp.reads, vd);
    fp.writes = vd;
  } else if (is_load(inst.opcode)) {
    fp.writes = vd;
  } else {
    fp.reads = vd;
  }
  if (is_indexed(inst.opcode))
    merge_into(fp.reads, element_groups_of(inst, Operand::Vs2, begin, end, machine));
  normalize(fp.reads);
  return fp;
}

std::pair<EgScoreboard, EgScoreboard> coarse_from_range(
    const VectorInstruction& inst, uint64_t begin, uint64_t end,
    const MachineConfig& machine) {
  EgScoreboard r(machine.total_egs()), w(machine.total_egs());
  Footprint fp = footprint_of(inst, begin, end, machine);
  r.set(fp.reads);
  w.set(fp.writes);
  return {std::move(r), std::move(w)};
}

std::pair<EgScoreboard, EgScoreboard> coarse_from_inst(
    const VectorInstruction& inst, const MachineConfig& machine) {
  return coarse_from_range(inst, 0, inst.vtype.vl, machine);
}

std::pair<EgScoreboard, EgScoreboard> compose_older(
    const std::vector<WindowEntry>& window, AgeTag me, unsigned total_egs) {
  EgScoreboard r(total_egs), w(total_egs);
  bool found = false;
  for (const auto& e : window) {
    if (e.age == me) found = true;
    if (e.age < me) {
      r |= e.prsb;
      w |= e.pwsb;
    }
  }
  if (!found) throw std::logic_error("compose_older: unknown age tag");
  return {std::move(r), std::move(w)};
}

std::string_view hazard_name(Hazard h) {
  switch (h) {
    case Hazard::Clear: return "clear";
    case Hazard::Raw: return "raw";
    case Hazard::Waw: return "waw";
    case Hazard::War: return "war";
  }
  return "?";
}

Hazard hazard(const GroupSet& reads, const GroupSet& writes,
              const EgScoreboard& older_prsb, const EgScoreboard& older_pwsb) {
  if (older_pwsb.intersects(reads)) return Hazard::Raw;
  if (older_pwsb.intersects(writes)) return Hazard::Waw;
  if (older_prsb.intersects(writes)) return Hazard::War;
  return Hazard::Clear;
}

}  // namespace vsim
