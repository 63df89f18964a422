#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vsim/isa.hh"
#include "vsim/oracle.hh"

namespace vsim {

struct FrontendConfig {
  uint64_t page_bytes = 4096;
  std::set<uint64_t> fault_pages;
  unsigned tlb_ports = 1;  // fixed
  unsigned dispatch_ipc = 1;
  unsigned host_issue_width = 2;  // host slots per cycle

  FaultMap faults() const { return FaultMap{page_bytes, fault_pages}; }
};

/// Half-open byte interval.
struct ByteRange {
  uint64_t begin = 0;
  uint64_t end = 0;
  uint64_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool overlaps(const ByteRange& o) const {
    return !empty() && !o.empty() && begin < o.end && o.begin < end;
  }
  bool operator==(const ByteRange&) const = default;
};

/// One backend operation: a whole instruction or one cracked piece of it,
/// covering elements [begin, end) of `inst`.
struct DispatchOp {
  VectorInstruction inst;
  uint64_t begin = 0;
  uint64_t end = 0;
  ByteRange phys_slice;  // memory ops only
  unsigned crack_index = 0;
  unsigned cost = 1;  // frontend cycles (TLB checks, at least one)
  uint64_t elem_addr = 0;  // element ops: resolved address

  bool element_op() const {
    return is_indexed(inst.opcode) || is_strided(inst.opcode);
  }
};

/// Conservative extent of a unit-stride, constant-stride or segmented access.
/// Returns nullopt for indexed ops.
std::optional<ByteRange> bound_of(const VectorInstruction& inst);

/// True when `inst` goes through the pipelined (page-cracking) path.
bool pipelined(const VectorInstruction& inst);

/// Strided ops whose stride equals the element size become unit-stride.
VectorInstruction canonicalize(const VectorInstruction& inst);

struct CrackResult {
  std::vector<DispatchOp> ops;  // pieces before any trap
  std::optional<Trap> trap;
  unsigned tlb_checks = 0;
};

/// Pipelined mode: one op per page, one TLB check per page touched. A
/// segment record straddling a page boundary forms its own piece.
CrackResult check_and_dispatch(const VectorInstruction& inst,
                               const FrontendConfig& fe,
                               const MachineConfig& machine);

/// Iterative mode: one op per element. `vrf` supplies the index register
/// (committed state). Each element costs a cycle plus one per page change.
CrackResult iterative_expand(const VectorInstruction& inst,
                             std::span<const uint8_t> vrf,
                             const FrontendConfig& fe,
                             const MachineConfig& machine);

}  // namespace vsim
