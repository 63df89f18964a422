#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vsim/isa.hh"
#include "vsim/scoreboard.hh"

namespace vsim {

struct VrfConfig {
  unsigned banks = 4;
  unsigned read_ports_per_bank = 3;
  unsigned write_ports_per_bank = 1;
  bool dedicated_load_wport = false;
};

struct BankSlot {
  unsigned bank = 0;
  unsigned row = 0;
  bool operator==(const BankSlot&) const = default;
};

/// Element groups are striped across banks: neighbours sit in consecutive
/// banks.
class BankMap {
 public:
  explicit BankMap(unsigned banks) : banks_(banks) {}
  BankSlot slot(ElementGroupId eg) const {
    return {eg.index % banks_, eg.index / banks_};
  }
  unsigned bank(ElementGroupId eg) const { return eg.index % banks_; }
  unsigned banks() const { return banks_; }

 private:
  unsigned banks_;
};

/// Flat register storage, one DLEN-bit row per element group.
class VectorRegisterFile {
 public:
  explicit VectorRegisterFile(const MachineConfig& machine)
      : row_bytes_(machine.row_bytes()), bytes_(machine.vrf_bytes(), 0) {}

  std::span<const uint8_t> row(ElementGroupId eg) const {
    return std::span<const uint8_t>(bytes_).subspan(eg.index * row_bytes_,
                                                    row_bytes_);
  }
  void write_row(ElementGroupId eg, std::span<const uint8_t> data) {
    std::copy(data.begin(), data.end(), bytes_.begin() + eg.index * row_bytes_);
  }
  /// Writes `data` at flat byte offset `vrf_off`.
  void write_bytes(uint64_t vrf_off, std::span<const uint8_t> data) {
    std::copy(data.begin(), data.end(), bytes_.begin() + vrf_off);
  }

  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t>& bytes() { return bytes_; }

 private:
  unsigned row_bytes_;
  std::vector<uint8_t> bytes_;
};

struct ReadRequest {
  AgeTag age;
  GroupSet groups;  // at most 3
};

/// Per-bank read port allocation for one cycle. Requests are all-or-nothing;
/// on conflict the older request wins.
std::vector<bool> arbitrate_reads(const std::vector<ReadRequest>& requests,
                                  const BankMap& map, unsigned ports_per_bank);

/// Incremental form used by the engine: callers present requests oldest
/// first and each is granted or refused against what is already taken.
class ReadPortState {
 public:
  ReadPortState(const BankMap& map, unsigned ports_per_bank)
      : map_(map), ports_(ports_per_bank), used_(map.banks(), 0) {}
  bool try_grant(const GroupSet& groups);
  unsigned used(unsigned bank) const { return used_[bank]; }

 private:
  const BankMap& map_;
  unsigned ports_;
  std::vector<unsigned> used_;
};

/// Future write-port bookings, one ring slot per cycle of lookahead.
class WritePortReservations {
 public:
  WritePortReservations(const BankMap& map, unsigned ports_per_bank,
                        unsigned horizon = 64);

  /// Books bank(eg) at `at_cycle`. `now` is the current cycle.
  bool reserve(ElementGroupId eg, uint64_t at_cycle, uint64_t now);
  bool available(ElementGroupId eg, uint64_t at_cycle, uint64_t now) const;
  unsigned booked(unsigned bank, uint64_t at_cycle) const;

 private:
  const BankMap& map_;
  unsigned ports_;
  unsigned horizon_;
  // [slot][bank] -> (cycle, count)
  std::vector<std::vector<std::pair<uint64_t, unsigned>>> ring_;
};

}  // namespace vsim
