#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "vsim/frontend.hh"
#include "vsim/isa.hh"
#include "vsim/memsys.hh"
#include "vsim/scoreboard.hh"

namespace vsim {

struct LsuConfig {
  unsigned inflight_loads = 8;
  unsigned inflight_stores = 8;
  unsigned store_buffer_rows = 8;
};

/// A contiguous run of bytes moved between memory and one register row.
struct Slot {
  uint64_t mem_addr = 0;
  uint64_t vrf_off = 0;
  unsigned width = 0;
};

/// One register row touched by a memory op, in micro-op order.
struct MemRow {
  ElementGroupId eg;
  std::vector<Slot> slots;
  uint32_t last_req = 0;  // highest request index holding any slot byte
};

struct LineRequest {
  uint64_t addr = 0;
  unsigned bytes = 0;
  uint32_t last_row = 0;  // highest row index with bytes in this request
};

/// Row schedule and memory request stream of one DispatchOp. Loads request
/// whole aligned lines (or single elements for element ops); stores request
/// exact byte ranges split at line boundaries.
struct MemLayout {
  std::vector<MemRow> rows;
  std::vector<LineRequest> reqs;
  ByteRange hull;   // bytes the op actually touches
  ByteRange image;  // span covered by requests
};

MemLayout build_layout(const DispatchOp& op, const MachineConfig& machine);

enum class MemKind : uint8_t { Load, Store };

struct InFlightEntry {
  uint64_t seq_id = 0;
  AgeTag age;
  uint64_t base = 0;
  uint64_t extent = 0;
  MemKind kind = MemKind::Load;
  MemLayout layout;
  std::vector<uint8_t> image;  // staging bytes over layout.image
  uint32_t reqs_issued = 0;
  uint32_t reqs_done = 0;  // loads: responses received; stores: accepted
  uint32_t rows_done = 0;  // loads: written back; stores: read from VRF
  uint32_t rows_freed = 0;  // stores: rows whose bytes are all sent

  ByteRange range() const { return {base, base + extent}; }
  bool drained() const {
    return rows_done == layout.rows.size() && reqs_done == layout.reqs.size();
  }
};

/// Memory disambiguation. A load conflicts with any older store whose range
/// overlaps and has not drained; a store conflicts with any older
/// overlapping load that still has requests to issue.
bool cam_check(const InFlightEntry& entry,
               const std::deque<InFlightEntry>& others);

/// Copies the row's slot bytes from the staging image into the register
/// file, leaving the rest of the row untouched.
void merge_load(const MemRow& row, std::span<const uint8_t> image,
                uint64_t image_base, std::span<uint8_t> vrf);

/// Streaming transpose between `nf` interleaved fields and planar rows.
/// Load: `stream` holds records in memory order; returns nf planar arrays.
/// Store: `stream` holds the nf planar arrays back to back; returns memory
/// order. Built on the same layout and merge path the LSU uses.
std::vector<std::vector<uint8_t>> seg_transpose(MemKind direction, unsigned nf,
                                                unsigned sew, uint64_t records,
                                                std::span<const uint8_t> stream,
                                                const MachineConfig& machine);

class LoadStoreUnit {
 public:
  LoadStoreUnit(const LsuConfig& cfg, const MachineConfig& machine,
                MemorySystem* mem);

  bool can_alloc(MemKind kind) const;
  void alloc(const DispatchOp& op, AgeTag age);

  InFlightEntry* find(AgeTag age, MemKind kind);

  /// Drains memory responses due by `cycle`. Returns how many arrived.
  unsigned receive(uint64_t cycle);

  // Load sequencer side.
  bool row_ready(const InFlightEntry& e, uint32_t row) const {
    return e.reqs_done > e.layout.rows[row].last_req;
  }
  /// Merges the row into `vrf`; frees the entry after the last row.
  void write_row(AgeTag age, uint32_t row, std::span<uint8_t> vrf);

  // Store sequencer side.
  /// Full and able to drain. A request can need more rows than the buffer
  /// holds (segment records straddling a line), so while no buffered row can
  /// be sent the buffer keeps admitting rows.
  bool store_buffer_full() const;
  void read_row(AgeTag age, uint32_t row, std::span<const uint8_t> vrf);

  /// At most one store request per cycle, oldest store first.
  bool issue_store(uint64_t cycle);
  /// At most one load request per cycle. With `dae` off only the entry
  /// `coupled` (the load being sequenced) may generate addresses.
  bool issue_load(uint64_t cycle, bool dae, const AgeTag* coupled);

  bool idle() const { return loads_.empty() && stores_.empty(); }
  const std::deque<InFlightEntry>& loads() const { return loads_; }
  const std::deque<InFlightEntry>& stores() const { return stores_; }
  unsigned buffered_rows() const { return buffered_rows_; }
  /// Loads with issued addresses whose data the backend has not consumed.
  unsigned runahead_loads() const;

 private:
  void retire_stores();

  LsuConfig cfg_;
  MachineConfig machine_;
  MemorySystem* mem_;
  std::deque<InFlightEntry> loads_;
  std::deque<InFlightEntry> stores_;
  unsigned buffered_rows_ = 0;
};

}  // namespace vsim
