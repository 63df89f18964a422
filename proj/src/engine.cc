#include "vsim/engine.hh"

#include <algorithm>
#include <sstream>

namespace vsim {

double SimMetrics::compute_util(unsigned dlen) const {
  return cycles ? double(element_bits) / (double(dlen) * double(cycles)) : 0.0;
}

double SimMetrics::mem_util(unsigned dlen) const {
  return cycles ? double(bytes_moved) * 8.0 / (double(dlen) * double(cycles))
                : 0.0;
}

double SimMetrics::util(unsigned dlen) const {
  return std::max(compute_util(dlen), mem_util(dlen));
}

double SimMetrics::stall_pct(Stall s) const {
  return sequencer_cycles
             ? 100.0 * double(stalls[size_t(s)]) / double(sequencer_cycles)
             : 0.0;
}

std::string SnapshotRow::render() const {
  return inst + ", " + std::to_string(id) + ", PRSb=" + prsb.render() +
         ", PWSb=" + pwsb.render();
}

std::string snapshot_inst(const VectorInstruction& inst) {
  std::string out = std::string(mnemonic(inst.opcode)) + "." +
                    std::to_string(inst.vtype.lmul) + " v" +
                    std::to_string(inst.vd);
  if (is_arith(inst.opcode)) {
    out += ", ";
    out += inst.scalar_src ? std::to_string(inst.scalar) : "v" + std::to_string(inst.vs1);
    out += ", v" + std::to_string(inst.vs2);
  }
  return out;
}

namespace {

std::string groups_text(const GroupSet& g) {
  std::string out;
  for (size_t i = 0; i < g.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(g[i].index);
  }
  return out;
}

}  // namespace

Engine::Engine(const SimConfig& cfg, const Program& program,
               const EngineOptions& opts)
    : cfg_((cfg.validate(), cfg)),
      opts_(opts),
      prog_(bind(program, cfg.machine)),
      machine_(cfg.machine),
      vrf_(cfg.machine),
      memsys_(cfg.mem, cfg.machine.row_bytes(), &mem_),
      lsu_(cfg.lsu, cfg.machine, &memsys_),
      banks_(cfg.vrf.banks),
      wports_(banks_, cfg.vrf.write_ports_per_bank),
      load_wports_(banks_, 1),
      monitor_(cfg.machine.total_egs()) {
  for (const auto& d : prog_.data_init) mem_.write(d.addr, d.bytes);
  paths_.push_back({Path::Load, "load", IssueQueue(cfg_.load_iq_depth), {}, 0});
  paths_.push_back({Path::Store, "store", IssueQueue(cfg_.store_iq_depth), {}, 0});
  for (unsigned i = 0; i < cfg_.num_arith_seqs; ++i)
    paths_.push_back({Path::Arith, "arith" + std::to_string(i),
                      IssueQueue(cfg_.arith_iq_depth), {}, 0});
  const unsigned total = machine_.total_egs();
  for (auto& p : paths_) {
    p.seq.prsb = EgScoreboard(total);
    p.seq.pwsb = EgScoreboard(total);
  }
  if (opts_.trace)
    result_.trace.push_back("cycle,path,seq_id,eg_reads,eg_write,stall_cause");
}

unsigned Engine::port_cycles(const DispatchOp& op) const {
  return is_memory(op.inst.opcode) && op.end > op.begin ? op.cost : 0;
}

bool Engine::can_push(const DispatchOp& op) const {
  if (dq_.size() >= cfg_.dispatch_q_depth) return false;
  if (is_memory(op.inst.opcode) && op.end > op.begin)
    return lsu_.can_alloc(is_load(op.inst.opcode) ? MemKind::Load : MemKind::Store);
  return true;
}

void Engine::push(const DispatchOp& op) {
  const AgeTag age = ages_.alloc();
  if (is_memory(op.inst.opcode) && op.end > op.begin) lsu_.alloc(op, age);
  if (opts_.monitor)
    monitor_.on_enter(age, footprint_of(op.inst, op.begin, op.end, machine_));
  dq_.push_back(make_backend_op(op, age, machine_));
}

bool Engine::index_ready(const VectorInstruction& inst) const {
  if (!is_indexed(inst.opcode) || inst.vtype.vl == 0) return true;
  const GroupSet idx = element_groups_of(inst, Operand::Vs2, machine_);
  for (const auto& op : dq_)
    if (op.pwsb.intersects(idx)) return false;
  for (const auto& p : paths_) {
    for (const auto& op : p.iq.entries())
      if (op.pwsb.intersects(idx)) return false;
    if (p.seq.busy() && p.seq.pwsb.intersects(idx)) return false;
  }
  auto hit = [&](ElementGroupId eg) {
    return std::binary_search(idx.begin(), idx.end(), eg);
  };
  for (const auto& f : fu_)
    if (hit(f.eg)) return false;
  for (const auto& l : load_writes_)
    if (hit(l.eg)) return false;
  return true;
}

void Engine::finish_op(AgeTag age) {
  if (opts_.monitor) monitor_.on_sequenced(age);
  ages_.free(age);
}

bool Engine::enter_sequencer(PathState& p, BackendOp op, bool bypass) {
  const unsigned lat = cfg_.fu_latency.of(op.dop.inst.opcode);
  p.issue_after = (bypass && cfg_.no_bypass) ? cycle_ + 2 : 0;
  p.seq.load(std::move(op), machine_, lat);
  if (p.seq.uops.empty()) {
    finish_op(p.seq.age());
    p.seq.clear();
    return false;
  }
  return true;
}

int Engine::steer(const BackendOp& op) const {
  auto open = [](const PathState& p) {
    return (!p.seq.busy() && p.iq.empty()) || !p.iq.full();
  };
  if (op.path == Path::Load) return open(paths_[0]) ? 0 : -1;
  if (op.path == Path::Store) return open(paths_[1]) ? 1 : -1;
  const unsigned n = cfg_.num_arith_seqs;
  for (unsigned i = 0; i < n; ++i) {
    const unsigned idx = 2 + (rr_ + i) % n;
    if (!paths_[idx].seq.busy() && paths_[idx].iq.empty()) return int(idx);
  }
  int best = -1;
  size_t best_load = 0;
  for (unsigned i = 0; i < n; ++i) {
    const unsigned idx = 2 + (rr_ + i) % n;
    const PathState& p = paths_[idx];
    if (!open(p)) continue;
    const size_t load = p.iq.size() + (p.seq.busy() ? 1 : 0);
    if (best < 0 || load < best_load) {
      best = int(idx);
      best_load = load;
    }
  }
  return best;
}

void Engine::build_window() {
  const unsigned total = machine_.total_egs();
  size_t n = 0;
  auto slot = [&]() -> WindowEntry& {
    if (n == window_.size())
      window_.push_back(WindowEntry{AgeTag{}, EgScoreboard(total), EgScoreboard(total),
                                    EntryKind::IssueQueueCoarse});
    return window_[n++];
  };
  auto add = [&](const AgeTag& age, const EgScoreboard& r, const EgScoreboard& w,
                 EntryKind kind) {
    WindowEntry& e = slot();
    e.age = age;
    e.prsb = r;
    e.pwsb = w;
    e.kind = kind;
  };
  for (const auto& op : dq_) add(op.age, op.prsb, op.pwsb, EntryKind::IssueQueueCoarse);
  for (const auto& p : paths_) {
    for (const auto& op : p.iq.entries())
      add(op.age, op.prsb, op.pwsb, EntryKind::IssueQueueCoarse);
    if (p.seq.busy())
      add(p.seq.age(), p.seq.prsb, p.seq.pwsb, EntryKind::SequencerPrecise);
  }
  for (const auto& f : fu_) {
    WindowEntry& e = slot();
    e.age = f.age;
    e.prsb.clear();
    e.pwsb.clear();
    e.pwsb.set(f.eg.index);
    e.kind = EntryKind::FuInflight;
  }
  window_.resize(n, WindowEntry{AgeTag{}, EgScoreboard(total), EgScoreboard(total),
                                EntryKind::IssueQueueCoarse});
}

void Engine::trace_line(const PathState& p, const std::optional<MicroOp>& u,
                        Stall s) {
  if (!opts_.trace || !p.seq.busy()) return;
  std::string line = std::to_string(cycle_) + "," + p.name + "," +
                     std::to_string(p.seq.op->dop.inst.seq_id) + ",";
  if (u) {
    line += groups_text(u->reads) + ",";
    line += u->write ? std::to_string(u->write->index) : "-";
  } else {
    line += ",-";
  }
  line += "," + std::string(stall_name(s));
  result_.trace.push_back(std::move(line));
}

void Engine::phase_responses() {
  if (lsu_.receive(cycle_)) last_progress_ = cycle_;
}

void Engine::phase_issue() {
  build_window();
  const unsigned total = machine_.total_egs();
  std::vector<size_t> order;
  for (size_t i = 0; i < paths_.size(); ++i) {
    if (paths_[i].seq.busy()) order.push_back(i);
  }
  metrics_.sequencer_cycles += order.size();
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return paths_[a].seq.age() < paths_[b].seq.age();
  });

  ReadPortState reads(banks_, cfg_.vrf.read_ports_per_bank);
  bool fu_used = false;
  const uint32_t epg = machine_.dlen;  // bits per group

  for (size_t pos = 0; pos < order.size(); ++pos) {
    PathState& p = paths_[order[pos]];
    const AgeTag age = p.seq.age();
    const std::optional<MicroOp> next = next_microop(p.seq);
    if (!next) throw std::logic_error("busy sequencer without micro-ops");
    const MicroOp& u = *next;
    GroupSet writes;
    if (u.write) writes.push_back(*u.write);

    Stall s = Stall::None;
    if (cycle_ < p.issue_after) {
      s = Stall::Empty;
    } else if (!cfg_.features.ooo && pos != 0) {
      s = Stall::InOrder;
    } else {
      auto [older_r, older_w] = compose_older(window_, age, total);
      const Hazard h = hazard(u.reads, writes, older_r, older_w);
      if (opts_.check_composition &&
          brute_force_hazard(window_, age, u.reads, writes) != h)
        ++metrics_.composition_mismatches;
      s = stall_of(h);
    }
    InFlightEntry* entry = nullptr;
    if (s == Stall::None) {
      if (p.kind == Path::Arith && fu_used) {
        s = Stall::FuPort;
      } else if (p.kind == Path::Load) {
        entry = lsu_.find(age, MemKind::Load);
        if (!entry || !lsu_.row_ready(*entry, u.index)) s = Stall::LoadData;
      } else if (p.kind == Path::Store && lsu_.store_buffer_full()) {
        s = Stall::StoreBuffer;
      }
    }
    WritePortReservations& wp =
        (p.kind == Path::Load && cfg_.vrf.dedicated_load_wport) ? load_wports_ : wports_;
    const uint64_t wb_at = cycle_ + u.wb_delay;
    if (s == Stall::None && u.write && !wp.available(*u.write, wb_at, cycle_))
      s = Stall::WritePort;
    if (s == Stall::None && !reads.try_grant(u.reads)) s = Stall::ReadPort;

    trace_line(p, next, s);
    if (s != Stall::None) {
      ++metrics_.stalls[size_t(s)];
      continue;
    }

    // Issue.
    if (u.write) wp.reserve(*u.write, wb_at, cycle_);
    if (opts_.monitor) monitor_.on_issue(age, u.reads, u.write, cycle_);
    const VectorInstruction& inst = p.seq.op->dop.inst;
    switch (u.fu) {
      case FuKind::Alu: {
        const unsigned sew = inst.vtype.sew;
        const unsigned w = sew / 8;
        const uint64_t per = epg / sew;
        const uint64_t k = u.write->index - inst.vd * machine_.egs_per_reg();
        const uint64_t e0 = std::max(p.seq.op->dop.begin, k * per);
        const uint64_t e1 = std::min(p.seq.op->dop.end, (k + 1) * per);
        const auto& v = vrf_.bytes();
        FuOp f{age, *u.write, wb_at, vrf_offset(inst.vd, e0, sew, machine_),
               std::vector<uint8_t>((e1 - e0) * w)};
        for (uint64_t e = e0; e < e1; ++e) {
          const uint64_t a = inst.scalar_src
                                 ? uint64_t(inst.scalar) & sew_mask(sew)
                                 : load_le(v, vrf_offset(inst.vs1, e, sew, machine_), w);
          const uint64_t b = load_le(v, vrf_offset(inst.vs2, e, sew, machine_), w);
          const uint64_t acc = load_le(v, vrf_offset(inst.vd, e, sew, machine_), w);
          store_le(f.data, (e - e0) * w, w, alu(inst.opcode, a, b, acc, sew));
        }
        metrics_.element_ops += e1 - e0;
        metrics_.element_bits += (e1 - e0) * sew;
        fu_.push_back(std::move(f));
        fu_inst_.try_emplace(age.tag, inst);
        fu_used = true;
        break;
      }
      case FuKind::LoadWrite:
        load_writes_.push_back({age, u.index, *u.write});
        break;
      case FuKind::StoreRead:
        lsu_.read_row(age, u.index, vrf_.bytes());
        break;
      case FuKind::None:
        break;
    }
    if (opts_.record_events)
      result_.issues.push_back({cycle_, age.tag, inst.seq_id, unsigned(order[pos]),
                                u.index,
                                u.write ? std::optional<unsigned>(u.write->index)
                                        : std::nullopt});
    retire_microop(p.seq, u);
    ++p.seq.next_index;
    ++metrics_.uops_issued;
    last_progress_ = cycle_;
    if (u.last) {
      finish_op(age);
      p.seq.clear();
    }
  }
  if (fu_used) ++metrics_.fu_busy_cycles;
}

void Engine::phase_dispatch() {
  for (auto& p : paths_) {
    while (!p.seq.busy() && !p.iq.empty()) {
      enter_sequencer(p, p.iq.pop(), false);
      last_progress_ = cycle_;
    }
  }
  if (dq_.empty()) return;
  const int target = steer(dq_.front());
  if (target < 0) return;
  BackendOp op = std::move(dq_.front());
  dq_.pop_front();
  if (opts_.record_events)
    result_.dispatches.push_back({cycle_, op.age.tag, op.dop.inst.seq_id});
  PathState& p = paths_[size_t(target)];
  if (p.kind == Path::Arith)
    rr_ = (unsigned(target) - 2 + 1) % cfg_.num_arith_seqs;
  if (!p.seq.busy() && p.iq.empty()) enter_sequencer(p, std::move(op), true);
  else p.iq.push(std::move(op));
  last_progress_ = cycle_;
}

void Engine::phase_frontend() {
  if (trap_) return;
  unsigned slots = cfg_.frontend.host_issue_width;
  unsigned dispatched = 0;
  bool tlb_free = true;
  while (true) {
    if (!pending_.empty()) {
      const DispatchOp& op = pending_.front();
      if (!head_init_) {
        head_left_ = port_cycles(op);
        head_init_ = true;
      }
      if (head_left_ > 0) {
        if (!tlb_free) return;
        tlb_free = false;
        --head_left_;
        last_progress_ = cycle_;
        if (head_left_ > 0) return;
      }
      if (dispatched >= cfg_.frontend.dispatch_ipc || !can_push(op)) return;
      push(op);
      ++dispatched;
      pending_.pop_front();
      head_init_ = false;
      last_progress_ = cycle_;
      continue;
    }
    if (pending_trap_) {
      if (!tlb_free) return;
      trap_ = pending_trap_;
      pending_trap_.reset();
      last_progress_ = cycle_;
      return;
    }
    if (pc_ >= prog_.insts.size()) return;
    const VectorInstruction& inst = prog_.insts[pc_];
    if (inst.opcode == Opcode::Scalar) {
      if (!scalar_active_) {
        scalar_active_ = true;
        scalar_left_ = inst.count;
      }
      const uint64_t take = std::min<uint64_t>(slots, scalar_left_);
      scalar_left_ -= take;
      slots -= unsigned(take);
      if (take) last_progress_ = cycle_;
      if (scalar_left_ > 0) return;
      scalar_active_ = false;
      ++pc_;
      continue;
    }
    if (inst.opcode == Opcode::Vsetvli) {
      ++pc_;
      continue;
    }
    if (slots == 0) return;
    if (!index_ready(inst)) return;
    CrackResult cr = pipelined(inst)
                         ? check_and_dispatch(inst, cfg_.frontend, machine_)
                         : iterative_expand(inst, vrf_.bytes(), cfg_.frontend, machine_);
    for (auto& op : cr.ops) pending_.push_back(std::move(op));
    pending_trap_ = cr.trap;
    head_init_ = false;
    --slots;
    ++pc_;
    last_progress_ = cycle_;
  }
}

void Engine::phase_lsu() {
  bool req = false;
  if (lsu_.issue_store(cycle_)) {
    ++metrics_.mem_requests;
    req = true;
  }
  const PathState& lp = paths_[0];
  const AgeTag coupled = lp.seq.busy() ? lp.seq.age() : AgeTag{~uint64_t(0)};
  if (lsu_.issue_load(cycle_, cfg_.features.dae, lp.seq.busy() ? &coupled : nullptr)) {
    ++metrics_.mem_requests;
    req = true;
  }
  if (req) {
    ++metrics_.mem_busy_cycles;
    last_progress_ = cycle_;
  }
  metrics_.max_runahead_loads =
      std::max<uint64_t>(metrics_.max_runahead_loads, lsu_.runahead_loads());
}

void Engine::phase_writeback() {
  for (const auto& lw : load_writes_) {
    lsu_.write_row(lw.age, lw.row, vrf_.bytes());
    if (opts_.monitor) monitor_.on_writeback(lw.age, lw.eg);
    if (opts_.record_events) result_.writebacks.push_back({cycle_, lw.age.tag, lw.eg.index});
  }
  if (!load_writes_.empty()) last_progress_ = cycle_;
  load_writes_.clear();

  auto due = [&](const FuOp& f) { return f.wb_cycle == cycle_; };
  for (const auto& f : fu_) {
    if (!due(f)) continue;
    vrf_.write_bytes(f.vrf_off, f.data);
    if (opts_.monitor) monitor_.on_writeback(f.age, f.eg);
    if (opts_.record_events) result_.writebacks.push_back({cycle_, f.age.tag, f.eg.index});
    last_progress_ = cycle_;
  }
  fu_.erase(std::remove_if(fu_.begin(), fu_.end(), due), fu_.end());
  for (auto it = fu_inst_.begin(); it != fu_inst_.end();) {
    const uint64_t tag = it->first;
    const bool live = std::any_of(fu_.begin(), fu_.end(),
                                  [&](const FuOp& f) { return f.age.tag == tag; });
    it = live ? std::next(it) : fu_inst_.erase(it);
  }
}

bool Engine::drained() const {
  const bool frontend_done =
      trap_ || (pc_ >= prog_.insts.size() && pending_.empty() && !pending_trap_ &&
                !scalar_active_);
  if (!frontend_done || !dq_.empty() || !fu_.empty() || !load_writes_.empty())
    return false;
  for (const auto& p : paths_)
    if (p.seq.busy() || !p.iq.empty()) return false;
  return lsu_.idle() && memsys_.idle();
}

std::vector<SnapshotRow> Engine::snapshot() const {
  const unsigned total = machine_.total_egs();
  std::map<uint64_t, SnapshotRow> rows;
  auto row = [&](AgeTag age, const VectorInstruction& inst) -> SnapshotRow& {
    auto [it, fresh] = rows.try_emplace(age.tag);
    if (fresh) {
      it->second.inst = snapshot_inst(inst);
      it->second.id = age.tag;
      it->second.prsb = EgScoreboard(total);
      it->second.pwsb = EgScoreboard(total);
    }
    return it->second;
  };
  auto add = [&](const BackendOp& op, const EgScoreboard& r, const EgScoreboard& w) {
    SnapshotRow& s = row(op.age, op.dop.inst);
    s.prsb |= r;
    s.pwsb |= w;
  };
  for (const auto& op : dq_) add(op, op.prsb, op.pwsb);
  std::map<uint64_t, const VectorInstruction*> insts;
  for (const auto& p : paths_) {
    for (const auto& op : p.iq.entries()) add(op, op.prsb, op.pwsb);
    if (p.seq.busy()) add(*p.seq.op, p.seq.prsb, p.seq.pwsb);
  }
  for (const auto& f : fu_) {
    auto it = rows.find(f.age.tag);
    if (it == rows.end()) {
      // Finished sequencing; only its in-flight writes remain.
      const auto fi = fu_inst_.find(f.age.tag);
      if (fi == fu_inst_.end()) continue;
      it = rows.find(row(f.age, fi->second).id);
    }
    it->second.pwsb.set(f.eg.index);
  }
  std::vector<SnapshotRow> out;
  for (auto& [id, r] : rows) out.push_back(std::move(r));
  return out;
}

bool Engine::step() {
  if (done_) return false;
  phase_responses();
  phase_issue();
  phase_dispatch();
  phase_frontend();
  phase_lsu();
  phase_writeback();

  if (opts_.snapshot_cycles.count(cycle_)) result_.snapshots[cycle_] = snapshot();

  if (drained()) {
    done_ = true;
    metrics_.cycles = cycle_ + 1;
    return false;
  }
  if (cycle_ - last_progress_ > cfg_.watchdog_cycles && memsys_.outstanding() == 0) {
    std::ostringstream os;
    os << "deadlock: no progress since cycle " << last_progress_ << " (now "
       << cycle_ << "); dq=" << dq_.size();
    for (const auto& p : paths_) {
      os << "; " << p.name << " iq=" << p.iq.size();
      if (p.seq.busy())
        os << " seq=#" << p.seq.op->dop.inst.seq_id << " uop "
           << p.seq.next_index << "/" << p.seq.uops.size();
    }
    throw DeadlockError(os.str());
  }
  if (cfg_.max_cycles && cycle_ + 1 >= cfg_.max_cycles) {
    done_ = true;
    metrics_.cycles = cycle_ + 1;
    return false;
  }
  ++cycle_;
  return true;
}

RunResult Engine::run() {
  while (step()) {
  }
  result_.state.vrf = vrf_.bytes();
  result_.state.mem = mem_;
  result_.trap = trap_;
  metrics_.bytes_moved = memsys_.bytes_accepted();
  metrics_.monitor_violations = monitor_.violations();
  metrics_.oldest_write_violations = monitor_.oldest_write_violations();
  result_.metrics = metrics_;
  result_.monitor_log = monitor_.log();
  return std::move(result_);
}

RunResult simulate(const SimConfig& cfg, const Program& program,
                   const EngineOptions& opts) {
  Engine e(cfg, program, opts);
  return e.run();
}

}  // namespace vsim
