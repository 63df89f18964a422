#include "vsim/program.hh"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <random>
#include <sstream>

namespace vsim {

ParseError::ParseError(unsigned line, unsigned column, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string text;
  unsigned column = 1;  // 1-based
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

class LineParser {
 public:
  LineParser(std::string_view line, unsigned lineno)
      : line_(line), lineno_(lineno) {}

  [[noreturn]] void fail(unsigned column, const std::string& msg) const {
    throw ParseError(lineno_, column, msg);
  }

  /// Splits into mnemonic plus comma-separated operands.
  void split(Token& head, std::vector<Token>& operands) const {
    size_t i = 0;
    while (i < line_.size() && std::isspace(static_cast<unsigned char>(line_[i])))
      ++i;
    size_t start = i;
    while (i < line_.size() && !std::isspace(static_cast<unsigned char>(line_[i])))
      ++i;
    head = Token{std::string(line_.substr(start, i - start)),
                 unsigned(start + 1)};
    if (i >= line_.size()) return;
    std::string_view rest = line_.substr(i);
    size_t offset = i;
    while (true) {
      size_t comma = rest.find(',');
      std::string_view piece = rest.substr(0, comma);
      size_t lead = 0;
      while (lead < piece.size() &&
             std::isspace(static_cast<unsigned char>(piece[lead])))
        ++lead;
      std::string_view t = trim(piece);
      if (t.empty()) {
        if (comma == std::string_view::npos && operands.empty()) return;
        fail(unsigned(offset + lead + 1), "empty operand");
      }
      operands.push_back(Token{std::string(t), unsigned(offset + lead + 1)});
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
      offset += comma + 1;
    }
  }

  uint8_t reg(const Token& t) const {
    if (t.text.size() < 2 || t.text[0] != 'v')
      fail(t.column, "expected vector register, got '" + t.text + "'");
    unsigned v = 0;
    auto [p, ec] = std::from_chars(t.text.data() + 1,
                                   t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      fail(t.column, "malformed register '" + t.text + "'");
    if (v > 31) fail(t.column, "register " + t.text + " out of range");
    return uint8_t(v);
  }

  int64_t integer(const Token& t) const {
    std::string_view s = t.text;
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
      neg = s[0] == '-';
      s.remove_prefix(1);
    }
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      base = 16;
      s.remove_prefix(2);
    }
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
      fail(t.column, "malformed number '" + t.text + "'");
    return neg ? -int64_t(v) : int64_t(v);
  }

  uint64_t address(const Token& t) const {
    if (!t.text.empty() && t.text[0] == '-')
      fail(t.column, "negative address");
    return uint64_t(integer(t));
  }

  void expect_operands(const Token& head, const std::vector<Token>& ops,
                       size_t n) const {
    if (ops.size() != n)
      fail(head.column, "'" + head.text + "' expects " + std::to_string(n) +
                            " operands, got " + std::to_string(ops.size()));
  }

 private:
  std::string_view line_;
  unsigned lineno_;
};

bool parse_uint_suffix(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

struct MemMnemonic {
  Opcode op;
  unsigned nf = 1;
  unsigned eew = 0;  // 0: take the current SEW
};

bool match_memory(std::string_view m, MemMnemonic& out) {
  auto eew_of = [&](std::string_view rest) {
    if (rest.empty()) return true;
    return parse_uint_suffix(rest, out.eew);
  };
  for (auto [prefix, op] :
       {std::pair{"vlseg", Opcode::Vlseg}, std::pair{"vsseg", Opcode::Vsseg}}) {
    if (m.substr(0, 5) != prefix) continue;
    auto rest = m.substr(5);
    auto e = rest.find('e');
    if (e == std::string_view::npos || !parse_uint_suffix(rest.substr(0, e), out.nf))
      return false;
    out.op = op;
    return eew_of(rest.substr(e + 1));
  }
  for (auto [prefix, op] :
       {std::pair{"vlse", Opcode::Vlse}, std::pair{"vsse", Opcode::Vsse},
        std::pair{"vlxe", Opcode::Vlxe}, std::pair{"vsxe", Opcode::Vsxe}}) {
    if (m.substr(0, 4) != prefix) continue;
    out.op = op;
    return eew_of(m.substr(4));
  }
  for (auto [prefix, op] :
       {std::pair{"vle", Opcode::Vle}, std::pair{"vse", Opcode::Vse}}) {
    if (m.substr(0, 3) != prefix) continue;
    out.op = op;
    return eew_of(m.substr(3));
  }
  return false;
}

bool match_arith(std::string_view m, Opcode& op, bool& vx) {
  vx = false;
  if (m.size() > 3 && m.substr(m.size() - 3) == ".vx") {
    vx = true;
    m.remove_suffix(3);
  } else if (m.size() > 3 && m.substr(m.size() - 3) == ".vv") {
    m.remove_suffix(3);
  }
  if (m == "vadd") op = Opcode::Vadd;
  else if (m == "vmul") op = Opcode::Vmul;
  else if (m == "vmacc") op = Opcode::Vmacc;
  else if (m == "vfma") op = Opcode::VfmaOpaque;
  else return false;
  return true;
}

std::vector<uint8_t> parse_hex_bytes(const LineParser& lp, const Token& t) {
  std::string_view s = t.text;
  if (s.size() % 2 != 0) lp.fail(t.column, "odd number of hex digits");
  std::vector<uint8_t> out;
  out.reserve(s.size() / 2);
  for (size_t i = 0; i < s.size(); i += 2) {
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data() + i, s.data() + i + 2, v, 16);
    if (ec != std::errc() || p != s.data() + i + 2)
      lp.fail(unsigned(t.column + i), "malformed hex byte");
    out.push_back(uint8_t(v));
  }
  return out;
}

std::string hex(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Program parse(std::string_view text) {
  Program prog;
  VType cur;
  unsigned lineno = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (trim(raw).empty()) {
      if (nl == text.size()) break;
      continue;
    }

    LineParser lp(raw, lineno);
    Token head;
    std::vector<Token> ops;
    lp.split(head, ops);

    if (head.text == ".name" || head.text == ".size") {
      std::string_view rest = trim(raw.substr(head.column - 1 + head.text.size()));
      if (rest.empty()) lp.fail(head.column, head.text + " needs a value");
      (head.text == ".name" ? prog.name : prog.size) = std::string(rest);
      continue;
    }
    if (head.text == ".data") {
      // `.data <addr> <hexbytes>` uses whitespace, not commas.
      std::istringstream is{std::string(raw)};
      std::string kw, addr, bytes;
      is >> kw >> addr >> bytes;
      if (addr.empty() || bytes.empty())
        lp.fail(head.column, ".data expects an address and hex bytes");
      auto col = [&](const std::string& s) {
        return unsigned(std::string_view(raw).find(s) + 1);
      };
      DataInit d;
      d.addr = lp.address(Token{addr, col(addr)});
      d.bytes = parse_hex_bytes(lp, Token{bytes, col(bytes)});
      prog.data_init.push_back(std::move(d));
      continue;
    }

    VectorInstruction inst;
    inst.line = lineno;
    inst.vtype = cur;
    Opcode aop;
    bool vx = false;
    MemMnemonic mm;

    if (head.text == "vsetvli") {
      lp.expect_operands(head, ops, 3);
      inst.opcode = Opcode::Vsetvli;
      const int64_t avl = lp.integer(ops[0]);
      if (avl < 0) lp.fail(ops[0].column, "negative AVL");
      unsigned sew = 0, lmul = 0;
      if (ops[1].text.size() < 2 || ops[1].text[0] != 'e' ||
          !parse_uint_suffix(std::string_view(ops[1].text).substr(1), sew))
        lp.fail(ops[1].column, "expected e<sew>");
      if (ops[2].text.size() < 2 || ops[2].text[0] != 'm' ||
          !parse_uint_suffix(std::string_view(ops[2].text).substr(1), lmul))
        lp.fail(ops[2].column, "expected m<lmul>");
      if (sew != 8 && sew != 16 && sew != 32 && sew != 64)
        lp.fail(ops[1].column, "unsupported element width e" + std::to_string(sew));
      if (lmul != 1 && lmul != 2 && lmul != 4 && lmul != 8)
        lp.fail(ops[2].column, "unsupported LMUL m" + std::to_string(lmul));
      inst.vtype = VType{sew, lmul, uint64_t(avl)};
      cur = inst.vtype;
    } else if (head.text == "scalar") {
      lp.expect_operands(head, ops, 1);
      inst.opcode = Opcode::Scalar;
      const int64_t n = lp.integer(ops[0]);
      if (n < 0) lp.fail(ops[0].column, "negative scalar count");
      inst.count = uint64_t(n);
    } else if (match_arith(head.text, aop, vx)) {
      lp.expect_operands(head, ops, 3);
      inst.opcode = aop;
      inst.vd = lp.reg(ops[0]);
      if (vx) {
        inst.scalar_src = true;
        inst.scalar = lp.integer(ops[1]);
      } else {
        inst.vs1 = lp.reg(ops[1]);
      }
      inst.vs2 = lp.reg(ops[2]);
    } else if (match_memory(head.text, mm)) {
      inst.opcode = mm.op;
      if (mm.eew != 0 && mm.eew != cur.sew)
        lp.fail(head.column, "element width e" + std::to_string(mm.eew) +
                                 " does not match vtype e" +
                                 std::to_string(cur.sew));
      if (is_segmented(mm.op)) {
        if (mm.nf < 1 || mm.nf > 8) lp.fail(head.column, "nf must be 1..8");
        inst.nf = uint8_t(mm.nf);
      }
      const size_t want = (is_strided(mm.op) || is_indexed(mm.op)) ? 3 : 2;
      lp.expect_operands(head, ops, want);
      inst.vd = lp.reg(ops[0]);
      inst.base = lp.address(ops[1]);
      if (is_strided(mm.op)) inst.stride = lp.integer(ops[2]);
      if (is_indexed(mm.op)) inst.vs2 = lp.reg(ops[2]);
    } else {
      lp.fail(head.column, "unknown opcode '" + head.text + "'");
    }
    inst.seq_id = prog.insts.size();
    prog.insts.push_back(inst);
    if (nl == text.size()) break;
  }
  return prog;
}

std::string render_inst(const VectorInstruction& inst) {
  std::string out;
  auto reg = [](unsigned r) { return "v" + std::to_string(r); };
  const std::string eew = std::to_string(inst.vtype.sew);
  switch (inst.opcode) {
    case Opcode::Vsetvli:
      return "vsetvli " + std::to_string(inst.vtype.vl) + ", e" + eew + ", m" +
             std::to_string(inst.vtype.lmul);
    case Opcode::Scalar:
      return "scalar " + std::to_string(inst.count);
    case Opcode::Vadd:
    case Opcode::Vmul:
    case Opcode::Vmacc:
    case Opcode::VfmaOpaque:
      out = std::string(mnemonic(inst.opcode));
      if (inst.scalar_src)
        return out + ".vx " + reg(inst.vd) + ", " + std::to_string(inst.scalar) +
               ", " + reg(inst.vs2);
      return out + " " + reg(inst.vd) + ", " + reg(inst.vs1) + ", " +
             reg(inst.vs2);
    case Opcode::Vle:
    case Opcode::Vse:
      return std::string(mnemonic(inst.opcode)) + eew + " " + reg(inst.vd) +
             ", " + hex(inst.base);
    case Opcode::Vlse:
    case Opcode::Vsse:
      return std::string(mnemonic(inst.opcode)) + eew + " " + reg(inst.vd) +
             ", " + hex(inst.base) + ", " + std::to_string(inst.stride);
    case Opcode::Vlxe:
    case Opcode::Vsxe:
      return std::string(mnemonic(inst.opcode)) + eew + " " + reg(inst.vd) +
             ", " + hex(inst.base) + ", " + reg(inst.vs2);
    case Opcode::Vlseg:
    case Opcode::Vsseg:
      return std::string(mnemonic(inst.opcode)) + std::to_string(inst.nf) +
             "e" + eew + " " + reg(inst.vd) + ", " + hex(inst.base);
  }
  return "?";
}

std::string render(const Program& program) {
  std::ostringstream os;
  if (!program.name.empty()) os << ".name " << program.name << '\n';
  if (!program.size.empty()) os << ".size " << program.size << '\n';
  char buf[4];
  for (const auto& d : program.data_init) {
    os << ".data " << hex(d.addr) << ' ';
    for (uint8_t b : d.bytes) {
      std::snprintf(buf, sizeof(buf), "%02x", b);
      os << buf;
    }
    os << '\n';
  }
  for (const auto& inst : program.insts) os << render_inst(inst) << '\n';
  return os.str();
}

Program bind(Program program, const MachineConfig& machine) {
  machine.validate();
  VType cur;
  for (size_t i = 0; i < program.insts.size(); ++i) {
    auto& inst = program.insts[i];
    inst.seq_id = i;
    if (inst.opcode == Opcode::Vsetvli) {
      VType req = inst.vtype;
      req.vl = 0;
      validate_vtype(req, machine);
      cur = VType{req.sew, req.lmul, std::min(inst.vtype.vl, vlmax(req, machine))};
      continue;
    }
    if (inst.opcode == Opcode::Scalar) continue;
    inst.vtype = cur;
    validate_instruction(inst, machine);
  }
  return program;
}

std::vector<uint64_t> stripmine(uint64_t total_elems, const VType& vtype,
                                const MachineConfig& machine) {
  std::vector<uint64_t> out;
  const uint64_t vm = vlmax(vtype, machine);
  if (vm == 0) return out;
  while (total_elems > 0) {
    const uint64_t vl = std::min(vm, total_elems);
    out.push_back(vl);
    total_elems -= vl;
  }
  return out;
}

Kernel kernel_from_name(std::string_view name) {
  if (name == "axpy") return Kernel::Axpy;
  if (name == "memcpy") return Kernel::Memcpy;
  if (name == "gemm_tile") return Kernel::GemmTile;
  if (name == "transpose") return Kernel::Transpose;
  if (name == "gather") return Kernel::Gather;
  if (name == "stream_load") return Kernel::StreamLoad;
  throw ConfigError("unsupported kernel '" + std::string(name) + "'");
}

std::string_view kernel_name(Kernel kernel) {
  switch (kernel) {
    case Kernel::Axpy: return "axpy";
    case Kernel::Memcpy: return "memcpy";
    case Kernel::GemmTile: return "gemm_tile";
    case Kernel::Transpose: return "transpose";
    case Kernel::Gather: return "gather";
    case Kernel::StreamLoad: return "stream_load";
  }
  return "?";
}

KernelSize parse_size(std::string_view text) {
  KernelSize out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t x = text.find('x', pos);
    if (x == std::string_view::npos) x = text.size();
    uint64_t v = 0;
    auto piece = text.substr(pos, x - pos);
    auto [p, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (piece.empty() || ec != std::errc() || p != piece.data() + piece.size())
      throw ConfigError("malformed problem size '" + std::string(text) + "'");
    out.push_back(v);
    pos = x + 1;
    if (x == text.size()) break;
  }
  return out;
}

std::string format_size(const KernelSize& size) {
  std::string out;
  for (size_t i = 0; i < size.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(size[i]);
  }
  return out;
}

namespace {

class KernelBuilder {
 public:
  explicit KernelBuilder(uint64_t seed) : rng_(seed) {}

  uint64_t alloc(uint64_t bytes) {
    const uint64_t addr = next_;
    const uint64_t end = addr + std::max<uint64_t>(bytes, 1);
    next_ = (end + ByteMemory_page - 1) / ByteMemory_page * ByteMemory_page +
            ByteMemory_page;
    return addr;
  }

  void random_data(uint64_t addr, uint64_t bytes) {
    DataInit d{addr, std::vector<uint8_t>(bytes)};
    for (auto& b : d.bytes) b = uint8_t(rng_());
    if (!d.bytes.empty()) prog.data_init.push_back(std::move(d));
  }

  void elements(uint64_t addr, const std::vector<uint64_t>& values,
                unsigned width) {
    DataInit d{addr, std::vector<uint8_t>(values.size() * width)};
    for (size_t i = 0; i < values.size(); ++i)
      store_le(d.bytes, i * width, width, values[i]);
    if (!d.bytes.empty()) prog.data_init.push_back(std::move(d));
  }

  uint64_t rand() { return rng_(); }

  void vsetvli(uint64_t avl, unsigned sew, unsigned lmul) {
    VectorInstruction i;
    i.opcode = Opcode::Vsetvli;
    i.vtype = VType{sew, lmul, avl};
    cur_ = i.vtype;
    push(i);
  }

  void arith(Opcode op, unsigned vd, unsigned vs1, unsigned vs2) {
    VectorInstruction i;
    i.opcode = op;
    i.vd = uint8_t(vd);
    i.vs1 = uint8_t(vs1);
    i.vs2 = uint8_t(vs2);
    push(i);
  }

  void arith_vx(Opcode op, unsigned vd, int64_t imm, unsigned vs2) {
    VectorInstruction i;
    i.opcode = op;
    i.vd = uint8_t(vd);
    i.scalar_src = true;
    i.scalar = imm;
    i.vs2 = uint8_t(vs2);
    push(i);
  }

  void mem(Opcode op, unsigned vd, uint64_t base, int64_t stride = 0,
           unsigned vs2 = 0, unsigned nf = 1) {
    VectorInstruction i;
    i.opcode = op;
    i.vd = uint8_t(vd);
    i.base = base;
    i.stride = stride;
    i.vs2 = uint8_t(vs2);
    i.nf = uint8_t(nf);
    push(i);
  }

  void scalar(uint64_t n) {
    VectorInstruction i;
    i.opcode = Opcode::Scalar;
    i.count = n;
    push(i);
  }

  Program prog;

 private:
  static constexpr uint64_t ByteMemory_page = 4096;

  void push(VectorInstruction i) {
    if (i.opcode != Opcode::Vsetvli) i.vtype = cur_;
    i.seq_id = prog.insts.size();
    prog.insts.push_back(i);
  }

  std::mt19937_64 rng_;
  uint64_t next_ = 0x1000;
  VType cur_;
};

void require_dims(const KernelSize& size, size_t n, std::string_view kernel) {
  if (size.size() != n)
    throw ConfigError(std::string(kernel) + " expects " + std::to_string(n) +
                      " problem dimension(s)");
}

}  // namespace

Program gen_kernel(Kernel kernel, const KernelSize& size, unsigned sew,
                   unsigned lmul, const MachineConfig& machine) {
  machine.validate();
  validate_vtype(VType{sew, lmul, 0}, machine);
  const unsigned w = sew / 8;
  const VType vt{sew, lmul, 0};
  KernelBuilder b(0x5eed0000 + uint64_t(kernel));
  b.prog.name = std::string(kernel_name(kernel));
  b.prog.size = format_size(size);

  switch (kernel) {
    case Kernel::Axpy: {
      require_dims(size, 1, "axpy");
      const uint64_t n = size[0];
      const uint64_t x = b.alloc(n * w), y = b.alloc(n * w);
      b.random_data(x, n * w);
      b.random_data(y, n * w);
      if (n == 0) b.vsetvli(0, sew, lmul);
      uint64_t done = 0;
      for (uint64_t vl : stripmine(n, vt, machine)) {
        b.vsetvli(vl, sew, lmul);
        b.mem(Opcode::Vle, 0, x + done * w);
        b.mem(Opcode::Vle, 8, y + done * w);
        b.arith_vx(Opcode::Vmacc, 8, 3, 0);
        b.mem(Opcode::Vse, 8, y + done * w);
        b.scalar(4);
        done += vl;
      }
      break;
    }
    case Kernel::Memcpy: {
      require_dims(size, 1, "memcpy");
      const uint64_t n = size[0];
      const uint64_t src = b.alloc(n * w), dst = b.alloc(n * w);
      b.random_data(src, n * w);
      if (n == 0) b.vsetvli(0, sew, lmul);
      uint64_t done = 0;
      for (uint64_t vl : stripmine(n, vt, machine)) {
        b.vsetvli(vl, sew, lmul);
        b.mem(Opcode::Vle, 0, src + done * w);
        b.mem(Opcode::Vse, 0, dst + done * w);
        b.scalar(4);
        done += vl;
      }
      break;
    }
    case Kernel::StreamLoad: {
      require_dims(size, 1, "stream_load");
      const uint64_t n = size[0];
      const uint64_t src = b.alloc(n * w);
      const uint64_t out = b.alloc(vlmax(vt, machine) * w);
      b.random_data(src, n * w);
      if (n == 0) b.vsetvli(0, sew, lmul);
      uint64_t done = 0;
      for (uint64_t vl : stripmine(n, vt, machine)) {
        b.vsetvli(vl, sew, lmul);
        b.mem(Opcode::Vle, 0, src + done * w);
        b.arith(Opcode::Vadd, 8, 8, 0);
        b.scalar(2);
        done += vl;
      }
      if (n > 0) {
        b.vsetvli(std::min(n, vlmax(vt, machine)), sew, lmul);
        b.mem(Opcode::Vse, 8, out);
      }
      break;
    }
    case Kernel::GemmTile: {
      require_dims(size, 3, "gemm_tile");
      const uint64_t m = size[0], n = size[1], k = size[2];
      if (lmul > 8 || 32 / lmul < 2)
        throw ConfigError("gemm_tile needs at least two register groups");
      const unsigned rows = std::min(4u, 32 / lmul - 1);
      const uint64_t a = b.alloc(m * k * w), bm = b.alloc(k * n * w),
                     c = b.alloc(m * n * w);
      std::vector<uint64_t> av(m * k), bv(k * n);
      for (auto& v : av) v = b.rand() & sew_mask(sew);
      for (auto& v : bv) v = b.rand() & sew_mask(sew);
      b.elements(a, av, w);
      b.elements(bm, bv, w);
      const unsigned vb = rows * lmul;
      if (m == 0 || n == 0) b.vsetvli(0, sew, lmul);
      for (uint64_t i0 = 0; i0 < m; i0 += rows) {
        const uint64_t rr = std::min<uint64_t>(rows, m - i0);
        uint64_t j0 = 0;
        for (uint64_t vl : stripmine(n, vt, machine)) {
          b.vsetvli(vl, sew, lmul);
          for (uint64_t r = 0; r < rr; ++r)
            b.mem(Opcode::Vle, unsigned(r * lmul), c + ((i0 + r) * n + j0) * w);
          for (uint64_t kk = 0; kk < k; ++kk) {
            b.mem(Opcode::Vle, vb, bm + (kk * n + j0) * w);
            for (uint64_t r = 0; r < rr; ++r) {
              b.scalar(1);
              b.arith_vx(Opcode::Vmacc, unsigned(r * lmul),
                         int64_t(av[(i0 + r) * k + kk]), vb);
            }
            b.scalar(2);
          }
          for (uint64_t r = 0; r < rr; ++r)
            b.mem(Opcode::Vse, unsigned(r * lmul), c + ((i0 + r) * n + j0) * w);
          b.scalar(3);
          j0 += vl;
        }
      }
      break;
    }
    case Kernel::Transpose: {
      require_dims(size, 2, "transpose");
      const uint64_t rows = size[0], cols = size[1];
      if (cols < 1 || cols > 8 || cols * lmul > 8)
        throw ConfigError("transpose needs 1 <= cols and cols * LMUL <= 8");
      const uint64_t src = b.alloc(rows * cols * w),
                     dst = b.alloc(rows * cols * w);
      b.random_data(src, rows * cols * w);
      if (rows == 0) b.vsetvli(0, sew, lmul);
      uint64_t done = 0;
      for (uint64_t vl : stripmine(rows, vt, machine)) {
        b.vsetvli(vl, sew, lmul);
        b.mem(Opcode::Vlseg, 0, src + done * cols * w, 0, 0, unsigned(cols));
        for (uint64_t f = 0; f < cols; ++f)
          b.mem(Opcode::Vse, unsigned(f * lmul), dst + (f * rows + done) * w);
        b.scalar(4);
        done += vl;
      }
      break;
    }
    case Kernel::Gather: {
      require_dims(size, 1, "gather");
      const uint64_t n = size[0];
      uint64_t table = std::max<uint64_t>(n, 64);
      if (sew < 64) table = std::min<uint64_t>(table, (uint64_t(1) << sew) / w);
      const uint64_t x = b.alloc(table * w), idx = b.alloc(n * w),
                     y = b.alloc(n * w);
      b.random_data(x, table * w);
      std::vector<uint64_t> iv(n);
      for (auto& v : iv) v = (b.rand() % table) * w;
      b.elements(idx, iv, w);
      if (n == 0) b.vsetvli(0, sew, lmul);
      uint64_t done = 0;
      for (uint64_t vl : stripmine(n, vt, machine)) {
        b.vsetvli(vl, sew, lmul);
        b.mem(Opcode::Vle, 8, idx + done * w);
        b.mem(Opcode::Vlxe, 0, x, 0, 8);
        b.mem(Opcode::Vse, 0, y + done * w);
        b.scalar(4);
        done += vl;
      }
      break;
    }
  }
  return b.prog;
}

Program gen_random(uint64_t seed, const RandomProgramOptions& opts,
                   const MachineConfig& machine) {
  machine.validate();
  KernelBuilder b(seed);
  b.prog.name = "random";
  b.prog.size = std::to_string(seed);
  auto pick = [&](uint64_t n) { return n ? b.rand() % n : 0; };

  constexpr uint64_t kData = 0x10000;   // overlapping data window
  constexpr uint64_t kWindow = 1024;
  constexpr uint64_t kIndex = 0x20000;  // per-SEW index tables
  b.random_data(kData, kWindow + 512);
  for (unsigned sew : {8u, 16u, 32u, 64u}) {
    if (sew > machine.dlen) continue;
    const unsigned w = sew / 8;
    const uint64_t count = vlmax(VType{sew, 8, 0}, machine);
    std::vector<uint64_t> iv(count);
    for (auto& v : iv) v = (pick(kWindow / w)) * w;
    if (sew == 8)
      for (auto& v : iv) v &= 0xf8;
    b.elements(kIndex + sew * 0x1000, iv, w);
  }

  // Hot registers, always including v0 so every LMUL has a candidate.
  std::vector<unsigned> hot{0};
  std::vector<unsigned> pool;
  for (unsigned r = 1; r < machine.num_arch_regs; ++r) pool.push_back(r);
  for (size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[pick(i)]);
  for (unsigned r : pool) {
    if (hot.size() >= std::max(1u, opts.hot_regs)) break;
    hot.push_back(r);
  }
  // Bias towards LMUL-aligned picks by adding aligned registers when few.
  for (unsigned r : {8u, 16u, 24u, 4u, 2u})
    if (r < machine.num_arch_regs && hot.size() < std::max(1u, opts.hot_regs) &&
        std::find(hot.begin(), hot.end(), r) == hot.end())
      hot.push_back(r);

  const unsigned n_insts = 1 + unsigned(pick(std::max(1u, opts.max_insts)));
  unsigned sew = 32, lmul = 1;
  std::vector<unsigned> sews;
  for (unsigned s : {8u, 16u, 32u, 64u})
    if (s <= machine.dlen) sews.push_back(s);

  auto choose_reg = [&](unsigned fields) -> int {
    std::vector<unsigned> ok;
    for (unsigned r : hot)
      if (r % lmul == 0 && r + fields * lmul <= machine.num_arch_regs)
        ok.push_back(r);
    if (ok.empty()) return -1;
    return int(ok[pick(ok.size())]);
  };

  auto set_vtype = [&]() {
    sew = sews[pick(sews.size())];
    lmul = 1u << pick(4);
    while (lmul > 1 && machine.num_arch_regs / lmul < 1) lmul >>= 1;
    const uint64_t vm = vlmax(VType{sew, lmul, 0}, machine);
    uint64_t avl;
    switch (pick(6)) {
      case 0: avl = 0; break;
      case 1: avl = vm + pick(vm + 1); break;
      case 2: avl = vm; break;
      default: avl = 1 + pick(vm); break;
    }
    b.vsetvli(avl, sew, lmul);
  };

  set_vtype();
  unsigned emitted = 1;
  while (emitted < n_insts) {
    const unsigned w = sew / 8;
    const uint64_t vm = vlmax(VType{sew, lmul, 0}, machine);
    const uint64_t choice = pick(100);
    ++emitted;
    if (choice < 8) {
      set_vtype();
      continue;
    }
    if (choice < 12 && opts.allow_scalar) {
      b.scalar(1 + pick(4));
      continue;
    }
    const int vd = choose_reg(1);
    const int va = choose_reg(1);
    const int vb = choose_reg(1);
    if (vd < 0 || va < 0 || vb < 0) {
      set_vtype();
      continue;
    }
    auto base_in_window = [&](uint64_t span) {
      const uint64_t room = kWindow > span ? kWindow - span : 0;
      return kData + pick(room / w + 1) * w;
    };
    if (choice < 50) {
      static constexpr Opcode ops[] = {Opcode::Vadd, Opcode::Vmul, Opcode::Vmacc,
                                       Opcode::VfmaOpaque};
      const Opcode op = ops[pick(4)];
      if (pick(4) == 0)
        b.arith_vx(op, unsigned(vd), int64_t(pick(1000)) - 500, unsigned(vb));
      else
        b.arith(op, unsigned(vd), unsigned(va), unsigned(vb));
    } else if (choice < 66) {
      b.mem(Opcode::Vle, unsigned(vd), base_in_window(vm * w));
    } else if (choice < 80) {
      b.mem(Opcode::Vse, unsigned(va), base_in_window(vm * w));
    } else if (choice < 86 && opts.allow_strided) {
      const int64_t stride = (int64_t(pick(9)) - 4) * int64_t(w);
      const uint64_t reach = vm * uint64_t(std::abs(stride));
      uint64_t base = base_in_window(std::min<uint64_t>(reach, kWindow));
      if (stride < 0) base += std::min<uint64_t>(reach, 256);
      b.mem(pick(2) ? Opcode::Vlse : Opcode::Vsse, unsigned(pick(2) ? vd : va),
            base, stride);
    } else if (choice < 93 && opts.allow_indexed) {
      // Reload the index register from a small-offset table first.
      b.mem(Opcode::Vle, unsigned(vb), kIndex + sew * 0x1000);
      ++emitted;
      if (pick(2))
        b.mem(Opcode::Vlxe, unsigned(vd), kData, 0, unsigned(vb));
      else
        b.mem(Opcode::Vsxe, unsigned(va), kData, 0, unsigned(vb));
    } else if (opts.allow_segmented) {
      const unsigned max_nf = std::min(8u, 8 / lmul);
      if (max_nf < 2) {
        set_vtype();
        continue;
      }
      const unsigned nf = 2 + unsigned(pick(max_nf - 1));
      const int seg = choose_reg(nf);
      if (seg < 0) {
        set_vtype();
        continue;
      }
      b.mem(pick(2) ? Opcode::Vlseg : Opcode::Vsseg, unsigned(seg),
            base_in_window(std::min<uint64_t>(vm * w * nf, kWindow)), 0, 0, nf);
    } else {
      b.arith(Opcode::Vadd, unsigned(vd), unsigned(va), unsigned(vb));
    }
  }
  return b.prog;
}

}  // namespace vsim
