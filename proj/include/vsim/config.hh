#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vsim/frontend.hh"
#include "vsim/isa.hh"
#include "vsim/lsu.hh"
#include "vsim/memsys.hh"
#include "vsim/vrf.hh"

namespace vsim {

struct FuLatency {
  unsigned add = 2;
  unsigned mul = 3;  // vmul and vmacc
  unsigned fma = 4;

  unsigned of(Opcode op) const;
};

struct Features {
  bool dae = true;
  bool ooo = true;
};

struct SimConfig {
  MachineConfig machine;
  unsigned dispatch_q_depth = 4;
  unsigned load_iq_depth = 4;
  unsigned store_iq_depth = 4;
  unsigned arith_iq_depth = 4;
  unsigned num_arith_seqs = 2;
  FuLatency fu_latency;
  Features features;
  bool no_bypass = false;
  FrontendConfig frontend;
  VrfConfig vrf;
  MemConfig mem;
  LsuConfig lsu;
  uint64_t watchdog_cycles = 10000;
  uint64_t max_cycles = 0;  // 0: unlimited

  /// Sets one field by its config-file name. Throws ConfigError on unknown
  /// keys or malformed values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  void validate() const;
};

/// Named presets for the `features` key: sv-base, sv-base+dae,
/// sv-base+ooo, sv-full.
Features features_from_name(const std::string& name);
std::string features_name(const Features& f);

/// Flat `key = value` text; `#` starts a comment.
void apply_config_text(SimConfig& cfg, const std::string& text);
void apply_config_file(SimConfig& cfg, const std::string& path);

/// Largest tolerable load latency: queued loads times the longest chime.
uint64_t latency_bound(const SimConfig& cfg, unsigned max_lmul = 8);

}  // namespace vsim
