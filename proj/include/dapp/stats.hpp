#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dapp/costmodel.hpp"

namespace dapp {

/// Aggregate cost: every migration at the migration cost plus the
/// computational cost of all placed MSs sampled once per second.
struct AggregateCost {
  std::int64_t migrations = 0;
  double migrationCost = 0;
  double computationalCost = 0;
  double total = 0;
  std::int64_t samples = 0;
};

struct TimelineRow {
  SimTime time = 0;
  RequestId request;
  DatacenterId from;  // 0 = none
  DatacenterId to;    // 0 = none
  std::string reason;
};

struct EpochRow {
  std::int64_t epoch = 0;
  std::string algorithm;
  std::string status;
  double objective = 0;
  std::int64_t migrations = 0;
  std::int64_t placements = 0;
};

struct RunStats {
  std::string algorithm;
  std::map<std::string, std::int64_t> messagesByKind;
  std::map<std::string, std::int64_t> bytesByKind;
  std::int64_t totalMessages = 0;
  std::int64_t totalControlBytes = 0;
  std::int64_t newRequests = 0;
  std::int64_t criticalRequests = 0;
  double bytesPerRequest = 0;

  CostBreakdown eventCost;
  AggregateCost aggregate;

  std::int64_t placements = 0;
  std::int64_t migrations = 0;
  std::int64_t failures = 0;

  bool diverged = false;
  std::string divergence;
  bool lpInfeasible = false;

  std::int64_t invocations = 0;
  std::int64_t maxMessagesInInvocation = 0;
  std::int64_t capacityAudits = 0;
  std::int64_t capacityViolations = 0;
  std::int64_t feasibilityChecks = 0;
  std::int64_t feasibilityViolations = 0;
  std::vector<std::string> auditMessages;  // first few only
  std::map<std::string, std::int64_t> diagnostics;
  SimTime endTime = 0;

  std::vector<TimelineRow> timeline;
  std::vector<EpochRow> epochs;

  bool success() const {
    return !diverged && !lpInfeasible && failures == 0 && feasibilityViolations == 0 && capacityViolations == 0;
  }
};

/// Deterministic JSON rendering (sorted keys, fixed float formatting).
std::string to_json_string(const RunStats& s);
void write_timeline_csv(std::ostream& out, const std::vector<TimelineRow>& rows);
void write_epoch_csv(std::ostream& out, const std::vector<EpochRow>& rows, bool header = true);

}  // namespace dapp
