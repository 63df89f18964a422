#include "vsim/config.hh"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vsim {

unsigned FuLatency::of(Opcode op) const {
  switch (op) {
    case Opcode::Vadd: return add;
    case Opcode::Vmul:
    case Opcode::Vmacc: return mul;
    case Opcode::VfmaOpaque: return fma;
    default: return 0;
  }
}

Features features_from_name(const std::string& name) {
  if (name == "sv-base") return {false, false};
  if (name == "sv-base+dae") return {true, false};
  if (name == "sv-base+ooo") return {false, true};
  if (name == "sv-full") return {true, true};
  throw ConfigError("unknown feature set '" + name + "'");
}

std::string features_name(const Features& f) {
  if (f.dae && f.ooo) return "sv-full";
  if (f.dae) return "sv-base+dae";
  if (f.ooo) return "sv-base+ooo";
  return "sv-base";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

uint64_t to_u64(const std::string& key, const std::string& v) {
  std::string_view s = v;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("bad value '" + v + "' for " + key);
  return out;
}

unsigned to_u32(const std::string& key, const std::string& v) {
  const uint64_t x = to_u64(key, v);
  if (x > 0xffffffffu) throw ConfigError("value out of range for " + key);
  return unsigned(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("bad boolean '" + v + "' for " + key);
}

struct Field {
  std::function<void(SimConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

#define VSIM_UINT(name, expr)                                                 \
  {name,                                                                      \
   {[](SimConfig& c, const std::string& k, const std::string& v) {           \
      c.expr = decltype(c.expr)(to_u64(k, v));                                \
      if (uint64_t(c.expr) != to_u64(k, v))                                   \
        throw ConfigError("value out of range for " + k);                     \
    },                                                                        \
    [](const SimConfig& c) { return std::to_string(c.expr); }}}

#define VSIM_BOOL(name, expr)                                                 \
  {name,                                                                      \
   {[](SimConfig& c, const std::string& k, const std::string& v) {           \
      c.expr = to_bool(k, v);                                                 \
    },                                                                        \
    [](const SimConfig& c) { return std::string(c.expr ? "1" : "0"); }}}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      VSIM_UINT("vlen", machine.vlen),
      VSIM_UINT("dlen", machine.dlen),
      VSIM_UINT("num_arch_regs", machine.num_arch_regs),
      VSIM_UINT("dispatch_q_depth", dispatch_q_depth),
      VSIM_UINT("load_iq_depth", load_iq_depth),
      VSIM_UINT("store_iq_depth", store_iq_depth),
      VSIM_UINT("arith_iq_depth", arith_iq_depth),
      {"iq_depth",
       {[](SimConfig& c, const std::string& k, const std::string& v) {
          c.load_iq_depth = c.store_iq_depth = c.arith_iq_depth = to_u32(k, v);
        },
        [](const SimConfig& c) { return std::to_string(c.load_iq_depth); }}},
      VSIM_UINT("num_arith_seqs", num_arith_seqs),
      VSIM_UINT("fu_latency.add", fu_latency.add),
      VSIM_UINT("fu_latency.mul", fu_latency.mul),
      VSIM_UINT("fu_latency.fma", fu_latency.fma),
      VSIM_BOOL("dae", features.dae),
      VSIM_BOOL("ooo", features.ooo),
      {"features",
       {[](SimConfig& c, const std::string&, const std::string& v) {
          c.features = features_from_name(v);
        },
        [](const SimConfig& c) { return features_name(c.features); }}},
      VSIM_BOOL("no_bypass", no_bypass),
      VSIM_UINT("page_bytes", frontend.page_bytes),
      {"fault_pages",
       {[](SimConfig& c, const std::string& k, const std::string& v) {
          c.frontend.fault_pages.clear();
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ','))
            if (!trim(item).empty())
              c.frontend.fault_pages.insert(to_u64(k, trim(item)));
        },
        [](const SimConfig& c) {
          std::string out;
          char buf[24];
          for (uint64_t p : c.frontend.fault_pages) {
            std::snprintf(buf, sizeof(buf), "0x%llx",
                          static_cast<unsigned long long>(p));
            if (!out.empty()) out += ';';
            out += buf;
          }
          return out;
        }}},
      VSIM_UINT("dispatch_ipc", frontend.dispatch_ipc),
      VSIM_UINT("host_issue_width", frontend.host_issue_width),
      VSIM_UINT("vrf_banks", vrf.banks),
      VSIM_UINT("vrf_read_ports", vrf.read_ports_per_bank),
      VSIM_UINT("vrf_write_ports", vrf.write_ports_per_bank),
      VSIM_BOOL("dedicated_load_wport", vrf.dedicated_load_wport),
      VSIM_UINT("mem_banks", mem.banks),
      VSIM_UINT("mem_bytes_per_bank_per_cycle", mem.bytes_per_bank_per_cycle),
      VSIM_UINT("mem_base_latency", mem.base_latency),
      VSIM_UINT("inject_latency", mem.inject_latency),
      VSIM_UINT("mem_queue_depth", mem.bank_queue_depth),
      VSIM_BOOL("rw_turnaround", mem.rw_turnaround),
      VSIM_UINT("inflight_loads", lsu.inflight_loads),
      VSIM_UINT("inflight_stores", lsu.inflight_stores),
      VSIM_UINT("store_buffer_rows", lsu.store_buffer_rows),
      VSIM_UINT("watchdog_cycles", watchdog_cycles),
      VSIM_UINT("max_cycles", max_cycles),
  };
  return table;
}

#undef VSIM_UINT
#undef VSIM_BOOL

}  // namespace

void SimConfig::set(const std::string& key, const std::string& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(*this, key, trim(value));
}

std::string SimConfig::get(const std::string& key) const {
  auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.get(*this);
}

const std::vector<std::string>& SimConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return out;
}

void SimConfig::validate() const {
  machine.validate();
  if (dispatch_q_depth == 0) throw ConfigError("dispatch_q_depth must be >= 1");
  if (num_arith_seqs == 0 || num_arith_seqs > 8)
    throw ConfigError("num_arith_seqs must be in 1..8");
  for (unsigned l : {fu_latency.add, fu_latency.mul, fu_latency.fma})
    if (l == 0 || l > 32) throw ConfigError("FU latency must be in 1..32");
  if (frontend.page_bytes == 0 || (frontend.page_bytes & (frontend.page_bytes - 1)))
    throw ConfigError("page_bytes must be a power of two");
  if (frontend.page_bytes < machine.row_bytes())
    throw ConfigError("page_bytes must be at least DLEN/8");
  if (frontend.dispatch_ipc == 0 || frontend.host_issue_width == 0)
    throw ConfigError("dispatch_ipc and host_issue_width must be >= 1");
  if (vrf.banks == 0 || machine.total_egs() % vrf.banks != 0)
    throw ConfigError("vrf_banks must divide the element-group count");
  if (vrf.read_ports_per_bank < 3 || vrf.write_ports_per_bank == 0)
    throw ConfigError("need at least 3 read ports and 1 write port per bank");
  if (mem.banks == 0 || mem.bank_queue_depth == 0)
    throw ConfigError("memory needs banks and a non-empty bank queue");
  if (lsu.inflight_loads == 0 || lsu.inflight_stores == 0 ||
      lsu.store_buffer_rows == 0)
    throw ConfigError("LSU queues must be non-empty");
  if (watchdog_cycles == 0) throw ConfigError("watchdog_cycles must be >= 1");
}

void apply_config_text(SimConfig& cfg, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  unsigned lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_config_file(SimConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

uint64_t latency_bound(const SimConfig& cfg, unsigned max_lmul) {
  return uint64_t(cfg.dispatch_q_depth + cfg.load_iq_depth) * max_lmul *
         native_chime(cfg.machine);
}

}  // namespace vsim
