#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dapp/costmodel.hpp"
#include "dapp/simplex.hpp"
#include "dapp/stats.hpp"
#include "dapp/topology.hpp"
#include "dapp/workload.hpp"

namespace dapp {

/// Global view a central orchestrator has at an epoch instant.
struct Snapshot {
  std::vector<Request> requests;  // live requests; curPlace is x, poa is the current PoA
  std::set<RequestId> toHandle;   // critical and new requests
};

struct Decisions {
  std::map<RequestId, DatacenterId> placement;  // y for every handled, non-failed request
  std::vector<RequestId> failed;
  std::set<RequestId> handled;  // requests whose placement was decided this epoch
};

/// Lowest datacenter in the prefix with enough room, in arrival order.
Decisions ffit_place(const Topology& t, const Snapshot& snap);

/// Bottom-up placement with a subtree reshuffle on failure, then a greedy
/// top-down push-up over the handled requests.
Decisions bupu_place(const Topology& t, const Snapshot& snap);

struct LboundResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0;
};

/// Fractional optimum over all live MSs for the snapshot's x.
LboundResult lbound_cost(const Topology& t, const CostParams& costs, const Snapshot& snap);

/// Requests sharing class and PoA, with the (possibly fractional) mass of
/// their current placement. Mass missing from `mass` belongs to new arrivals.
struct LbGroup {
  const ServiceClass* cls = nullptr;
  DatacenterId poa;
  double count = 0;
  std::map<DatacenterId, double> mass;
};

struct LbSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0;
  double migratedMass = 0;
  std::vector<std::map<DatacenterId, double>> y;  // per group
};

LbSolution solve_lbound_groups(const Topology& t, const CostParams& costs, const std::vector<LbGroup>& groups);

/// Smallest (fractional) C_cpu for which the relaxation is feasible, with
/// capacities (level+1) * C_cpu.
double lbound_min_cpu_groups(const Topology& t, const std::vector<LbGroup>& groups, LpStatus* status = nullptr);

enum class Algorithm { DAPP, FFit, BUPU, LBound };
std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct EpochConfig {
  CostParams costs;
  bool recordTimeline = false;
};

/// Epoch-driven runs (one decision round per second) over a trace.
RunStats run_ffit(const std::vector<TraceEvent>& trace, const Topology& t, const ClassTable& classes,
                  const EpochConfig& cfg);
RunStats run_bupu(const std::vector<TraceEvent>& trace, const Topology& t, const ClassTable& classes,
                  const EpochConfig& cfg);
/// LBound keeps its own fractional placement across epochs.
RunStats run_lbound(const std::vector<TraceEvent>& trace, const Topology& t, const ClassTable& classes,
                    const EpochConfig& cfg);

/// Minimum C_cpu over the trace for which every epoch's relaxation is
/// feasible (fractional, before rounding up).
double lbound_min_cpu(const std::vector<TraceEvent>& trace, const Topology& t, const ClassTable& classes);

}  // namespace dapp
