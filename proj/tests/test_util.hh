#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "vsim/config.hh"
#include "vsim/isa.hh"
#include "vsim/program.hh"
#include "vsim/scoreboard.hh"

namespace vsim::test {

// Four registers of two element groups each.
inline MachineConfig small_machine() {
  MachineConfig m;
  m.vlen = 256;
  m.dlen = 128;
  m.num_arch_regs = 4;
  return m;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string data_path(const std::string& name) {
  return std::string(VSIM_TEST_DATA) + "/" + name;
}

inline SimConfig table2_config() {
  SimConfig c;
  apply_config_file(c, data_path("table2.cfg"));
  return c;
}

inline Program table2_program() { return parse(read_file(data_path("table2.vasm"))); }

// "00001100" with the highest bit first, as printed in scoreboard tables.
inline EgScoreboard bits(const std::string& s) {
  EgScoreboard b(unsigned(s.size()));
  for (size_t i = 0; i < s.size(); ++i)
    if (s[i] == '1') b.set(unsigned(s.size() - 1 - i));
  return b;
}

inline GroupSet groups(std::initializer_list<unsigned> ids) {
  GroupSet g;
  for (unsigned i : ids) g.push_back(ElementGroupId{i});
  return g;
}

inline VectorInstruction inst(Opcode op, unsigned sew, unsigned lmul, uint64_t vl) {
  VectorInstruction i;
  i.opcode = op;
  i.vtype = VType{sew, lmul, vl};
  return i;
}

}  // namespace vsim::test
