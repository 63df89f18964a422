#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vsim/isa.hh"

namespace vsim {

/// One bit per VRF element group. Bit g of register r is r*(VLEN/DLEN)+g.
class EgScoreboard {
 public:
  EgScoreboard() = default;
  explicit EgScoreboard(unsigned total_egs)
      : size_(total_egs), words_((total_egs + 63) / 64, 0) {}

  unsigned size() const { return size_; }
  bool test(unsigned eg) const { return (words_[eg / 64] >> (eg % 64)) & 1; }
  void set(unsigned eg) { words_[eg / 64] |= uint64_t(1) << (eg % 64); }
  void reset(unsigned eg) { words_[eg / 64] &= ~(uint64_t(1) << (eg % 64)); }
  void set(const GroupSet& groups) {
    for (auto g : groups) set(g.index);
  }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }

  bool any() const;
  unsigned count() const;
  bool intersects(const EgScoreboard& o) const;
  bool intersects(const GroupSet& groups) const;
  EgScoreboard& operator|=(const EgScoreboard& o);
  bool operator==(const EgScoreboard&) const = default;

  /// Highest bit first, e.g. "8'b00001100".
  std::string render() const;

  const std::vector<uint64_t>& words() const { return words_; }

 private:
  unsigned size_ = 0;
  std::vector<uint64_t> words_;
};

/// Monotonic allocation-order tag; smaller is older.
struct AgeTag {
  uint64_t tag = 0;
  auto operator<=>(const AgeTag&) const = default;
};

/// Hands out age tags and tracks which are live.
class AgeAllocator {
 public:
  AgeTag alloc() {
    ++live_;
    return AgeTag{next_++};
  }
  void free(AgeTag) { --live_; }
  uint64_t live() const { return live_; }

 private:
  uint64_t next_ = 0;
  uint64_t live_ = 0;
};

enum class EntryKind : uint8_t { IssueQueueCoarse, SequencerPrecise, FuInflight };

struct WindowEntry {
  AgeTag age;
  EgScoreboard prsb;
  EgScoreboard pwsb;
  EntryKind kind = EntryKind::IssueQueueCoarse;
};

/// Groups read and written over elements [begin, end) of `inst`. Reads
/// include the accumulator for multiply-add forms and the store data for
/// stores; indexed ops include the index register.
struct Footprint {
  GroupSet reads;
  GroupSet writes;
};
Footprint footprint_of(const VectorInstruction& inst, uint64_t begin,
                       uint64_t end, const MachineConfig& machine);

/// Issue-queue scoreboards derived from the operand specifiers.
std::pair<EgScoreboard, EgScoreboard> coarse_from_inst(
    const VectorInstruction& inst, const MachineConfig& machine);
std::pair<EgScoreboard, EgScoreboard> coarse_from_range(
    const VectorInstruction& inst, uint64_t begin, uint64_t end,
    const MachineConfig& machine);

/// OR of prsb / pwsb over entries strictly older than `me`. Throws if `me`
/// is not among the entries.
std::pair<EgScoreboard, EgScoreboard> compose_older(
    const std::vector<WindowEntry>& window, AgeTag me, unsigned total_egs);

enum class Hazard : uint8_t { Clear, Raw, Waw, War };

std::string_view hazard_name(Hazard h);

Hazard hazard(const GroupSet& reads, const GroupSet& writes,
              const EgScoreboard& older_prsb, const EgScoreboard& older_pwsb);

}  // namespace vsim
