#include "vsim/vrf.hh"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace vsim {

bool ReadPortState::try_grant(const GroupSet& groups) {
  std::vector<unsigned> need(used_.size(), 0);
  for (auto g : groups) ++need[map_.bank(g)];
  for (size_t b = 0; b < used_.size(); ++b)
    if (used_[b] + need[b] > ports_) return false;
  for (size_t b = 0; b < used_.size(); ++b) used_[b] += need[b];
  return true;
}

std::vector<bool> arbitrate_reads(const std::vector<ReadRequest>& requests,
                                  const BankMap& map, unsigned ports_per_bank) {
  std::vector<size_t> order(requests.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return requests[a].age < requests[b].age;
  });
  ReadPortState ports(map, ports_per_bank);
  std::vector<bool> grants(requests.size(), false);
  for (size_t i : order) grants[i] = ports.try_grant(requests[i].groups);
  return grants;
}

WritePortReservations::WritePortReservations(const BankMap& map,
                                             unsigned ports_per_bank,
                                             unsigned horizon)
    : map_(map),
      ports_(ports_per_bank),
      horizon_(horizon),
      ring_(horizon, std::vector<std::pair<uint64_t, unsigned>>(
                         map.banks(), {~uint64_t(0), 0})) {}

unsigned WritePortReservations::booked(unsigned bank, uint64_t at_cycle) const {
  const auto& e = ring_[at_cycle % horizon_][bank];
  return e.first == at_cycle ? e.second : 0;
}

bool WritePortReservations::available(ElementGroupId eg, uint64_t at_cycle,
                                      uint64_t now) const {
  if (at_cycle < now || at_cycle - now >= horizon_)
    throw std::logic_error("write reservation outside the lookahead window");
  return booked(map_.bank(eg), at_cycle) < ports_;
}

bool WritePortReservations::reserve(ElementGroupId eg, uint64_t at_cycle,
                                    uint64_t now) {
  if (!available(eg, at_cycle, now)) return false;
  auto& e = ring_[at_cycle % horizon_][map_.bank(eg)];
  if (e.first != at_cycle) e = {at_cycle, 0};
  ++e.second;
  return true;
}

}  // namespace vsim
