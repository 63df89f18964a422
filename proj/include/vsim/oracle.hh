#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

#include "vsim/isa.hh"
#include "vsim/memsys.hh"
#include "vsim/program.hh"

namespace vsim {

/// Page-grain fault table shared by the oracle and the frontend.
struct FaultMap {
  uint64_t page_bytes = 4096;
  std::set<uint64_t> pages;  // page indices

  bool faults(uint64_t addr) const {
    return !pages.empty() && pages.count(addr / page_bytes);
  }
  bool faults(uint64_t addr, uint64_t bytes) const;
};

struct Trap {
  uint64_t seq_id = 0;
  uint64_t element = 0;
  uint64_t addr = 0;
  bool operator==(const Trap&) const = default;
};

struct ArchState {
  std::vector<uint8_t> vrf;  // num_arch_regs * VLEN/8 bytes
  ByteMemory mem;
  VType vtype;

  static ArchState initial(const Program& program, const MachineConfig& m);
  bool operator==(const ArchState& o) const {
    return vrf == o.vrf && mem == o.mem;
  }
};

/// Executes one instruction in place. Returns the trap, if any; elements
/// before the faulting one have already taken effect.
std::optional<Trap> exec_one(ArchState& state, const VectorInstruction& inst,
                             const MachineConfig& machine,
                             const FaultMap& faults = {});

struct OracleResult {
  ArchState state;
  std::optional<Trap> trap;
};

/// In-order reference execution of a bound program.
OracleResult exec_program(const Program& program, const MachineConfig& machine,
                          const FaultMap& faults = {});

/// Byte address of element `e` (record `e` for segmented ops) field `f`.
uint64_t element_addr(const VectorInstruction& inst, uint64_t e, unsigned f,
                      std::span<const uint8_t> vrf,
                      const MachineConfig& machine);

/// Deterministic text dump: non-zero registers, then non-zero memory lines.
void dump_arch(std::ostream& os, const ArchState& state,
               const MachineConfig& machine);

}  // namespace vsim
