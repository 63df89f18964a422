#include "vsim/memsys.hh"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "vsim/isa.hh"

namespace vsim {

uint8_t ByteMemory::read8(uint64_t addr) const {
  auto it = pages_.find(addr / kPageBytes);
  if (it == pages_.end()) return 0;
  return it->second[addr % kPageBytes];
}

void ByteMemory::read(uint64_t addr, std::span<uint8_t> out) const {
  for (size_t i = 0; i < out.size(); ++i) out[i] = read8(addr + i);
}

void ByteMemory::write8(uint64_t addr, uint8_t value) {
  auto [it, inserted] = pages_.try_emplace(addr / kPageBytes);
  if (inserted) it->second.fill(0);
  it->second[addr % kPageBytes] = value;
}

void ByteMemory::write(uint64_t addr, std::span<const uint8_t> bytes) {
  for (size_t i = 0; i < bytes.size(); ++i) write8(addr + i, bytes[i]);
}

std::vector<std::pair<uint64_t, std::array<uint8_t, ByteMemory::kDumpLine>>>
ByteMemory::nonzero_lines() const {
  std::vector<std::pair<uint64_t, std::array<uint8_t, kDumpLine>>> out;
  for (const auto& [page, bytes] : pages_) {
    for (uint64_t off = 0; off < kPageBytes; off += kDumpLine) {
      std::array<uint8_t, kDumpLine> line;
      std::copy_n(bytes.begin() + off, kDumpLine, line.begin());
      if (std::any_of(line.begin(), line.end(), [](uint8_t b) { return b; }))
        out.emplace_back(page * kPageBytes + off, line);
    }
  }
  return out;
}

bool ByteMemory::operator==(const ByteMemory& other) const {
  return nonzero_lines() == other.nonzero_lines();
}

void write_image(std::ostream& os, const ByteMemory& mem) {
  char buf[32];
  for (const auto& [addr, line] : mem.nonzero_lines()) {
    std::snprintf(buf, sizeof(buf), "0x%08llx:",
                  static_cast<unsigned long long>(addr));
    os << buf;
    for (uint8_t b : line) {
      std::snprintf(buf, sizeof(buf), " %02x", b);
      os << buf;
    }
    os << '\n';
  }
}

ByteMemory read_image(std::istream& is) {
  ByteMemory mem;
  std::string line;
  unsigned lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    auto colon = line.find(':');
    if (colon == std::string::npos) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::runtime_error("memory image line " + std::to_string(lineno) +
                               ": missing ':'");
    }
    uint64_t addr = std::stoull(line.substr(0, colon), nullptr, 0);
    std::istringstream bytes(line.substr(colon + 1));
    std::string tok;
    while (bytes >> tok) {
      mem.write8(addr++, uint8_t(std::stoul(tok, nullptr, 16)));
    }
  }
  return mem;
}

MemorySystem::MemorySystem(const MemConfig& cfg, unsigned line_bytes,
                           ByteMemory* backing)
    : cfg_(cfg), line_bytes_(line_bytes), backing_(backing) {
  if (cfg_.banks == 0) throw ConfigError("memory needs at least one bank");
  bank_bytes_per_cycle_ = cfg_.bytes_per_bank_per_cycle
                              ? cfg_.bytes_per_bank_per_cycle
                              : std::max(1u, line_bytes_ / cfg_.banks);
  banks_.resize(cfg_.banks);
}

unsigned MemorySystem::bank_of(uint64_t addr) const {
  return unsigned((addr / line_bytes_) % cfg_.banks);
}

bool MemorySystem::request(MemRequest req, uint64_t cycle) {
  Bank& bank = banks_[bank_of(req.addr)];
  while (!bank.starts.empty() && bank.starts.front() <= cycle)
    bank.starts.pop_front();
  if (bank.starts.size() >= cfg_.bank_queue_depth) return false;

  const bool write = req.who == Requester::Store;
  uint64_t start = std::max(cycle, bank.next_free);
  if (cfg_.rw_turnaround && bank.streak > 0 && write != bank.last_write) {
    if (bank.streak >= 4) start += 1;
    bank.streak = 0;
  }
  bank.last_write = write;
  ++bank.streak;
  const unsigned occupancy =
      std::max(1u, (req.bytes + bank_bytes_per_cycle_ - 1) /
                       bank_bytes_per_cycle_);
  bank.next_free = start + occupancy;
  if (start > cycle) bank.starts.push_back(start);

  MemResponse resp;
  resp.tag = req.tag;
  resp.who = req.who;
  resp.addr = req.addr;
  resp.accepted = cycle;
  if (write) {
    backing_->write(req.addr, req.data);
  } else {
    resp.data.resize(req.bytes);
    backing_->read(req.addr, resp.data);
  }
  const uint64_t ready = start + cfg_.base_latency + cfg_.inject_latency;
  auto& last = last_deliver_[size_t(req.who)];
  resp.delivered = std::max(ready, last);
  last = resp.delivered;
  pending_[size_t(req.who)].push_back(std::move(resp));
  bytes_accepted_ += req.bytes;
  ++requests_accepted_;
  return true;
}

std::vector<MemResponse> MemorySystem::collect(Requester who, uint64_t cycle) {
  std::vector<MemResponse> out;
  auto& q = pending_[size_t(who)];
  while (!q.empty() && q.front().delivered <= cycle) {
    out.push_back(std::move(q.front()));
    q.pop_front();
  }
  return out;
}

bool MemorySystem::idle() const {
  return pending_[0].empty() && pending_[1].empty();
}

uint64_t MemorySystem::outstanding() const {
  return pending_[0].size() + pending_[1].size();
}

}  // namespace vsim
