#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "vsim/frontend.hh"
#include "vsim/isa.hh"
#include "vsim/scoreboard.hh"

namespace vsim {

enum class Path : uint8_t { Load, Store, Arith };

enum class FuKind : uint8_t { None, Alu, LoadWrite, StoreRead };

/// One cycle of sequencer work.
struct MicroOp {
  GroupSet reads;  // at most 3
  std::optional<ElementGroupId> write;
  FuKind fu = FuKind::None;
  unsigned wb_delay = 0;
  AgeTag age;
  uint32_t index = 0;  // element-group / row ordinal within the op
  bool last = false;
};

/// A DispatchOp after entering the backend.
struct BackendOp {
  DispatchOp dop;
  AgeTag age;
  Path path = Path::Arith;
  EgScoreboard prsb;  // coarse
  EgScoreboard pwsb;
};

BackendOp make_backend_op(const DispatchOp& dop, AgeTag age,
                          const MachineConfig& machine);

enum class IrregularPolicy : uint8_t { ClearOnIssue, HoldUntilDone };

IrregularPolicy irregular_policy(const VectorInstruction& inst);

/// The op's micro-op schedule in issue order. Memory ops follow the LSU row
/// order (for segmented ops: element group major, field minor).
std::vector<MicroOp> crack(const BackendOp& op, const MachineConfig& machine,
                           unsigned fu_latency);

class IssueQueue {
 public:
  explicit IssueQueue(unsigned capacity) : capacity_(capacity) {}
  bool full() const { return q_.size() >= capacity_; }
  bool empty() const { return q_.empty(); }
  size_t size() const { return q_.size(); }
  unsigned capacity() const { return capacity_; }
  void push(BackendOp op) { q_.push_back(std::move(op)); }
  BackendOp pop() {
    BackendOp op = std::move(q_.front());
    q_.pop_front();
    return op;
  }
  const std::deque<BackendOp>& entries() const { return q_; }

 private:
  unsigned capacity_;
  std::deque<BackendOp> q_;
};

struct SequencerState {
  std::optional<BackendOp> op;
  EgScoreboard prsb;  // precise
  EgScoreboard pwsb;
  std::vector<MicroOp> uops;
  uint32_t next_index = 0;

  bool busy() const { return op.has_value(); }
  AgeTag age() const { return op->age; }

  void load(BackendOp next, const MachineConfig& machine, unsigned fu_latency);
  void clear() {
    op.reset();
    uops.clear();
    next_index = 0;
    prsb.clear();
    pwsb.clear();
  }
};

/// Next micro-op, or nullopt when the op is complete.
std::optional<MicroOp> next_microop(const SequencerState& seq);

/// Scoreboard update after `uop` issues: with clear-on-issue, the groups the
/// op will not touch again clear now; otherwise everything clears with the
/// last micro-op.
void retire_microop(SequencerState& seq, const MicroOp& uop);

enum class Stall : uint8_t {
  None,
  Empty,
  Raw,
  Waw,
  War,
  ReadPort,
  WritePort,
  FuPort,
  LoadData,
  StoreBuffer,
  InOrder,
};
inline constexpr unsigned kStallKinds = 11;

std::string_view stall_name(Stall s);
Stall stall_of(Hazard h);

}  // namespace vsim
