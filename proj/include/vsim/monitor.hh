#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsim/isa.hh"
#include "vsim/scoreboard.hh"

namespace vsim {

/// Online safety checker. It tracks each backend op's static footprint on
/// its own (no scoreboards involved) and checks every issued micro-op
/// against all older ops that are still live.
class HazardMonitor {
 public:
  explicit HazardMonitor(unsigned total_egs) : total_egs_(total_egs) {}

  void on_enter(AgeTag age, const Footprint& fp);
  void on_issue(AgeTag age, const GroupSet& reads,
                const std::optional<ElementGroupId>& write, uint64_t cycle);
  void on_writeback(AgeTag age, ElementGroupId eg);
  /// The op has issued its last micro-op.
  void on_sequenced(AgeTag age);

  uint64_t violations() const { return violations_; }
  uint64_t oldest_write_violations() const { return oldest_write_violations_; }
  const std::vector<std::string>& log() const { return log_; }

 private:
  struct Live {
    EgScoreboard to_read;
    EgScoreboard to_write;  // not yet written back
    bool sequenced = false;
  };
  void report(std::string msg, bool oldest_write);
  void prune(AgeTag age);

  unsigned total_egs_;
  std::map<AgeTag, Live> live_;
  std::map<unsigned, unsigned> inflight_writes_;  // eg -> count
  uint64_t violations_ = 0;
  uint64_t oldest_write_violations_ = 0;
  std::vector<std::string> log_;
};

/// Reference for window composition: checks the micro-op against every
/// older entry individually and reports the highest-priority hazard.
Hazard brute_force_hazard(const std::vector<WindowEntry>& window, AgeTag me,
                          const GroupSet& reads, const GroupSet& writes);

}  // namespace vsim
