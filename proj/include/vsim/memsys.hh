#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace vsim {

/// Sparse functional byte store. Unwritten bytes read as zero.
class ByteMemory {
 public:
  static constexpr uint64_t kPageBytes = 4096;
  static constexpr uint64_t kDumpLine = 16;

  uint8_t read8(uint64_t addr) const;
  void read(uint64_t addr, std::span<uint8_t> out) const;
  void write(uint64_t addr, std::span<const uint8_t> bytes);
  void write8(uint64_t addr, uint8_t value);

  /// Non-zero 16-byte lines in ascending address order.
  std::vector<std::pair<uint64_t, std::array<uint8_t, kDumpLine>>>
  nonzero_lines() const;

  /// Content equality; pages holding only zeros compare equal to absent ones.
  bool operator==(const ByteMemory& other) const;

 private:
  using Page = std::array<uint8_t, kPageBytes>;
  std::map<uint64_t, Page> pages_;
};

/// Flat hex image: one `0xADDR: bb bb ...` line per 16-byte non-zero line.
void write_image(std::ostream& os, const ByteMemory& mem);
ByteMemory read_image(std::istream& is);

struct MemConfig {
  unsigned banks = 4;
  unsigned bytes_per_bank_per_cycle = 0;  // 0: line_bytes / banks
  unsigned base_latency = 4;
  unsigned inject_latency = 0;
  unsigned bank_queue_depth = 16;
  bool rw_turnaround = false;
};

enum class Requester : uint8_t { Load = 0, Store = 1 };

struct MemRequest {
  uint64_t addr = 0;
  unsigned bytes = 0;
  uint64_t tag = 0;
  Requester who = Requester::Load;
  std::vector<uint8_t> data;  // write payload
};

struct MemResponse {
  uint64_t tag = 0;
  Requester who = Requester::Load;
  uint64_t addr = 0;
  std::vector<uint8_t> data;  // read payload, empty for write acks
  uint64_t accepted = 0;
  uint64_t delivered = 0;
};

/// Banked last-level-cache timing model. Functional effects happen at
/// acceptance, so acceptance order is memory order.
class MemorySystem {
 public:
  MemorySystem(const MemConfig& cfg, unsigned line_bytes, ByteMemory* backing);

  unsigned line_bytes() const { return line_bytes_; }
  unsigned bank_of(uint64_t addr) const;

  /// Returns false on backpressure (bank queue full); the caller retries.
  bool request(MemRequest req, uint64_t cycle);

  /// Pops responses for `who` deliverable at or before `cycle`, in
  /// request order.
  std::vector<MemResponse> collect(Requester who, uint64_t cycle);

  bool idle() const;
  uint64_t outstanding() const;
  uint64_t bytes_accepted() const { return bytes_accepted_; }
  uint64_t requests_accepted() const { return requests_accepted_; }

 private:
  struct Bank {
    uint64_t next_free = 0;
    std::deque<uint64_t> starts;  // service start times not yet reached
    bool last_write = false;
    unsigned streak = 0;
  };

  MemConfig cfg_;
  unsigned line_bytes_;
  unsigned bank_bytes_per_cycle_;
  ByteMemory* backing_;
  std::vector<Bank> banks_;
  std::array<std::deque<MemResponse>, 2> pending_;
  std::array<uint64_t, 2> last_deliver_{0, 0};
  uint64_t bytes_accepted_ = 0;
  uint64_t requests_accepted_ = 0;
};

}  // namespace vsim
