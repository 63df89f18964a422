#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsim/config.hh"
#include "vsim/frontend.hh"
#include "vsim/lsu.hh"
#include "vsim/memsys.hh"
#include "vsim/monitor.hh"
#include "vsim/oracle.hh"
#include "vsim/program.hh"
#include "vsim/scoreboard.hh"
#include "vsim/sequencer.hh"
#include "vsim/vrf.hh"

namespace vsim {

class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimMetrics {
  uint64_t cycles = 0;
  uint64_t element_ops = 0;
  uint64_t element_bits = 0;  // element_ops weighted by SEW
  uint64_t bytes_moved = 0;
  uint64_t uops_issued = 0;
  uint64_t mem_requests = 0;
  uint64_t fu_busy_cycles = 0;
  uint64_t mem_busy_cycles = 0;
  uint64_t sequencer_cycles = 0;  // cycles x occupied sequencers
  std::array<uint64_t, kStallKinds> stalls{};
  uint64_t monitor_violations = 0;
  uint64_t oldest_write_violations = 0;
  uint64_t composition_mismatches = 0;
  uint64_t max_runahead_loads = 0;

  double compute_util(unsigned dlen) const;
  double mem_util(unsigned dlen) const;
  double util(unsigned dlen) const;
  double stall_pct(Stall s) const;
};

struct SnapshotRow {
  std::string inst;
  uint64_t id = 0;
  EgScoreboard prsb;
  EgScoreboard pwsb;

  std::string render() const;
};

struct IssueEvent {
  uint64_t cycle;
  uint64_t age;
  uint64_t seq_id;
  unsigned path;
  uint32_t index;
  std::optional<unsigned> write;
};
struct WritebackEvent {
  uint64_t cycle;
  uint64_t age;
  unsigned eg;
};
struct DispatchEvent {
  uint64_t cycle;  // dispatch queue to issue queue or sequencer
  uint64_t age;
  uint64_t seq_id;
};

struct EngineOptions {
  bool trace = false;
  bool monitor = true;
  bool check_composition = false;
  bool record_events = false;
  std::set<uint64_t> snapshot_cycles;
};

struct RunResult {
  ArchState state;
  std::optional<Trap> trap;
  SimMetrics metrics;
  std::vector<std::string> trace;  // CSV lines, header first
  std::map<uint64_t, std::vector<SnapshotRow>> snapshots;
  std::vector<IssueEvent> issues;
  std::vector<WritebackEvent> writebacks;
  std::vector<DispatchEvent> dispatches;
  std::vector<std::string> monitor_log;
};

/// Table-style text of one backend op, e.g. "vadd.2 v0, v0, v2".
std::string snapshot_inst(const VectorInstruction& inst);

class Engine {
 public:
  Engine(const SimConfig& cfg, const Program& program,
         const EngineOptions& opts = {});

  /// Advances one cycle. Returns false once the machine has drained.
  bool step();
  RunResult run();

  uint64_t cycle() const { return cycle_; }
  std::vector<SnapshotRow> snapshot() const;
  const SimMetrics& metrics() const { return metrics_; }

 private:
  struct PathState {
    Path kind;
    std::string name;
    IssueQueue iq;
    SequencerState seq;
    uint64_t issue_after = 0;  // no_bypass hold
  };
  struct FuOp {
    AgeTag age;
    ElementGroupId eg;
    uint64_t wb_cycle;
    uint64_t vrf_off;
    std::vector<uint8_t> data;
  };
  struct LoadWrite {
    AgeTag age;
    uint32_t row;
    ElementGroupId eg;
  };

  void phase_responses();
  void phase_issue();
  void phase_dispatch();
  void phase_frontend();
  void phase_lsu();
  void phase_writeback();

  void build_window();
  bool index_ready(const VectorInstruction& inst) const;
  bool can_push(const DispatchOp& op) const;
  void push(const DispatchOp& op);
  bool enter_sequencer(PathState& p, BackendOp op, bool bypass);
  void finish_op(AgeTag age);
  int steer(const BackendOp& op) const;
  bool drained() const;
  unsigned port_cycles(const DispatchOp& op) const;
  void trace_line(const PathState& p, const std::optional<MicroOp>& u, Stall s);

  SimConfig cfg_;
  EngineOptions opts_;
  Program prog_;
  MachineConfig machine_;
  ByteMemory mem_;
  VectorRegisterFile vrf_;
  MemorySystem memsys_;
  LoadStoreUnit lsu_;
  BankMap banks_;
  WritePortReservations wports_;
  WritePortReservations load_wports_;
  AgeAllocator ages_;
  HazardMonitor monitor_;

  // Frontend.
  size_t pc_ = 0;
  uint64_t scalar_left_ = 0;
  bool scalar_active_ = false;
  std::deque<DispatchOp> pending_;
  std::optional<Trap> pending_trap_;
  bool head_init_ = false;
  unsigned head_left_ = 0;
  std::optional<Trap> trap_;

  std::deque<BackendOp> dq_;
  std::vector<PathState> paths_;
  std::vector<FuOp> fu_;
  std::map<uint64_t, VectorInstruction> fu_inst_;  // ages with FU writes pending
  std::vector<LoadWrite> load_writes_;
  std::vector<WindowEntry> window_;
  unsigned rr_ = 0;

  uint64_t cycle_ = 0;
  uint64_t last_progress_ = 0;
  bool done_ = false;
  SimMetrics metrics_;
  RunResult result_;
};

/// Convenience wrapper: bind, simulate, collect.
RunResult simulate(const SimConfig& cfg, const Program& program,
                   const EngineOptions& opts = {});

}  // namespace vsim
