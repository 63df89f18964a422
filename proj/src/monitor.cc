#include "vsim/monitor.hh"

namespace vsim {

void HazardMonitor::on_enter(AgeTag age, const Footprint& fp) {
  Live l{EgScoreboard(total_egs_), EgScoreboard(total_egs_), false};
  l.to_read.set(fp.reads);
  l.to_write.set(fp.writes);
  live_.emplace(age, std::move(l));
}

void HazardMonitor::report(std::string msg, bool oldest_write) {
  (oldest_write ? oldest_write_violations_ : violations_)++;
  if (log_.size() < 32) log_.push_back(std::move(msg));
}

void HazardMonitor::on_issue(AgeTag age, const GroupSet& reads,
                             const std::optional<ElementGroupId>& write,
                             uint64_t cycle) {
  const std::string at = "cycle " + std::to_string(cycle) + " op " +
                         std::to_string(age.tag) + ": ";
  for (const auto& [older, l] : live_) {
    if (!(older < age)) break;
    for (auto g : reads)
      if (l.to_write.test(g.index))
        report(at + "RAW on eg" + std::to_string(g.index) + " vs op " +
                   std::to_string(older.tag), false);
    if (write) {
      if (l.to_write.test(write->index))
        report(at + "WAW on eg" + std::to_string(write->index) + " vs op " +
                   std::to_string(older.tag), false);
      if (l.to_read.test(write->index))
        report(at + "WAR on eg" + std::to_string(write->index) + " vs op " +
                   std::to_string(older.tag), false);
    }
  }
  if (write && inflight_writes_[write->index] > 0)
    report(at + "write to eg" + std::to_string(write->index) +
               " while another write is in flight", true);

  auto it = live_.find(age);
  if (it == live_.end()) return;
  for (auto g : reads) it->second.to_read.reset(g.index);
  if (write) ++inflight_writes_[write->index];
}

void HazardMonitor::on_writeback(AgeTag age, ElementGroupId eg) {
  auto f = inflight_writes_.find(eg.index);
  if (f != inflight_writes_.end() && f->second > 0 && --f->second == 0)
    inflight_writes_.erase(f);
  auto it = live_.find(age);
  if (it == live_.end()) return;
  it->second.to_write.reset(eg.index);
  prune(age);
}

void HazardMonitor::on_sequenced(AgeTag age) {
  auto it = live_.find(age);
  if (it == live_.end()) return;
  it->second.sequenced = true;
  prune(age);
}

void HazardMonitor::prune(AgeTag age) {
  auto it = live_.find(age);
  if (it != live_.end() && it->second.sequenced && !it->second.to_write.any() &&
      !it->second.to_read.any())
    live_.erase(it);
}

Hazard brute_force_hazard(const std::vector<WindowEntry>& window, AgeTag me,
                          const GroupSet& reads, const GroupSet& writes) {
  Hazard worst = Hazard::Clear;
  auto rank = [](Hazard h) {
    switch (h) {
      case Hazard::Raw: return 3;
      case Hazard::Waw: return 2;
      case Hazard::War: return 1;
      case Hazard::Clear: return 0;
    }
    return 0;
  };
  for (const auto& e : window) {
    if (!(e.age < me)) continue;
    const Hazard h = hazard(reads, writes, e.prsb, e.pwsb);
    if (rank(h) > rank(worst)) worst = h;
  }
  return worst;
}

}  // namespace vsim
