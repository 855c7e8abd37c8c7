#include "dapp/costmodel.hpp"

#include <algorithm>

namespace dapp {

bool delay_feasible(const Topology& t, const Request& r, DatacenterId s) {
  if (!t.contains(s) || !t.contains(r.poa)) return false;
  const int lvl = t.level(s);
  if (lvl >= r.cls.maxLevels) return false;
  return t.ancestor_at_level(r.poa, lvl) == s;
}

namespace {

std::size_t checked_level(const Topology& t, const Request& r, DatacenterId s) {
  if (!delay_feasible(t, r, s)) {
    throw DomainError(to_string(s) + " is not delay-feasible for " + to_string(r.id));
  }
  return static_cast<std::size_t>(t.level(s));
}

}  // namespace

Cpu beta(const Topology& t, const Request& r, DatacenterId s) {
  return r.cls.betaPerLevel[checked_level(t, r, s)];
}

Cost comp_cost(const Topology& t, const Request& r, DatacenterId s) {
  return r.cls.compCostPerLevel[checked_level(t, r, s)];
}

Cost mig_cost(const CostParams& p, std::optional<DatacenterId> from, DatacenterId to) {
  if (!from) return 0;
  if (*from == to) throw DomainError("not a migration: source equals destination " + to_string(to));
  return p.migrationCost;
}

CostBreakdown objective(const Topology& t, const CostParams& p, const PlacementSnapshot& snap,
                        const std::set<RequestId>& handled) {
  CostBreakdown out;
  for (const Request& r : snap.requests) {
    if (!handled.contains(r.id)) continue;
    auto y = snap.assigned.find(r.id);
    if (y == snap.assigned.end()) {
      throw std::invalid_argument("handled request " + to_string(r.id) + " has no assignment");
    }
    out.computationalCost += comp_cost(t, r, y->second);
    auto x = snap.previous.find(r.id);
    if (x != snap.previous.end() && x->second != y->second) out.migrationCost += p.migrationCost;
  }
  out.total = out.migrationCost + out.computationalCost;
  return out;
}

FeasibilityReport check_feasible(const Topology& t, const PlacementSnapshot& snap) {
  FeasibilityReport rep;
  std::map<DatacenterId, Cpu> load;
  for (const Request& r : snap.requests) {
    if (r.state == RequestState::Failed || r.state == RequestState::Departed) continue;
    auto y = snap.assigned.find(r.id);
    if (y == snap.assigned.end()) {
      rep.unplaced.push_back(r.id);
      rep.messages.push_back(to_string(r.id) + " has no placement");
      continue;
    }
    if (!delay_feasible(t, r, y->second)) {
      rep.delayViolations.push_back(r.id);
      rep.messages.push_back(to_string(r.id) + " placed on " + to_string(y->second) + " outside its feasible prefix");
      continue;
    }
    load[y->second] += beta(t, r, y->second);
  }
  for (const auto& [s, used] : load) {
    const Cpu cap = t.node(s).capacity;
    if (used > cap) {
      rep.overloadBy[s] = used - cap;
      rep.messages.push_back(to_string(s) + " over capacity by " + std::to_string(used - cap));
    }
  }
  rep.feasible = rep.unplaced.empty() && rep.delayViolations.empty() && rep.overloadBy.empty();
  return rep;
}

}  // namespace dapp
