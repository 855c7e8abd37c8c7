#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dapp/topology.hpp"
#include "dapp/workload.hpp"

namespace dapp {

struct CostParams {
  Cost migrationCost = 600;
};

/// CPU units r needs on s. Throws DomainError when s is not delay-feasible.
Cpu beta(const Topology& t, const Request& r, DatacenterId s);
Cost comp_cost(const Topology& t, const Request& r, DatacenterId s);

/// 0 for a first placement (no `from`); throws DomainError when from == to.
Cost mig_cost(const CostParams& p, std::optional<DatacenterId> from, DatacenterId to);

/// True iff s lies in the delay-feasible prefix of r's PoA.
bool delay_feasible(const Topology& t, const Request& r, DatacenterId s);

/// The y decision (assigned) and x parameter (previous) of every request.
struct PlacementSnapshot {
  std::vector<Request> requests;
  std::map<RequestId, DatacenterId> assigned;
  std::map<RequestId, DatacenterId> previous;
};

struct CostBreakdown {
  Cost migrationCost = 0;
  Cost computationalCost = 0;
  Cost total = 0;

  CostBreakdown& operator+=(const CostBreakdown& o) {
    migrationCost += o.migrationCost;
    computationalCost += o.computationalCost;
    total += o.total;
    return *this;
  }
  bool operator==(const CostBreakdown&) const = default;
};

/// Migration plus computational cost over the handled set. Throws
/// std::invalid_argument if a handled request has no assignment.
CostBreakdown objective(const Topology& t, const CostParams& p, const PlacementSnapshot& snap,
                        const std::set<RequestId>& handled);

struct FeasibilityReport {
  bool feasible = true;
  std::vector<RequestId> unplaced;
  std::vector<RequestId> delayViolations;
  std::map<DatacenterId, Cpu> overloadBy;  // datacenter -> CPU above capacity
  std::vector<std::string> messages;
};

/// Single placement, prefix membership and capacity for every request that is
/// neither failed nor departed. Never throws on violations.
FeasibilityReport check_feasible(const Topology& t, const PlacementSnapshot& snap);

}  // namespace dapp
