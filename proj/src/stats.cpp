#include "dapp/stats.hpp"

#include <json.hpp>

namespace dapp {

std::string to_json_string(const RunStats& s) {
  nlohmann::json j;
  j["algorithm"] = s.algorithm;
  j["messagesByKind"] = s.messagesByKind;
  j["bytesByKind"] = s.bytesByKind;
  j["totalMessages"] = s.totalMessages;
  j["totalControlBytes"] = s.totalControlBytes;
  j["newRequests"] = s.newRequests;
  j["criticalRequests"] = s.criticalRequests;
  j["bytesPerRequest"] = s.bytesPerRequest;
  j["eventCost"] = {{"migration", s.eventCost.migrationCost},
                    {"computational", s.eventCost.computationalCost},
                    {"total", s.eventCost.total}};
  j["aggregateCost"] = {{"migrations", s.aggregate.migrations},
                        {"migration", s.aggregate.migrationCost},
                        {"computational", s.aggregate.computationalCost},
                        {"total", s.aggregate.total},
                        {"samples", s.aggregate.samples}};
  j["placements"] = s.placements;
  j["migrations"] = s.migrations;
  j["failures"] = s.failures;
  j["diverged"] = s.diverged;
  j["divergence"] = s.divergence;
  j["lpInfeasible"] = s.lpInfeasible;
  j["invocations"] = s.invocations;
  j["maxMessagesInInvocation"] = s.maxMessagesInInvocation;
  j["audits"] = {{"capacityChecks", s.capacityAudits},
                 {"capacityViolations", s.capacityViolations},
                 {"feasibilityChecks", s.feasibilityChecks},
                 {"feasibilityViolations", s.feasibilityViolations},
                 {"messages", s.auditMessages}};
  j["diagnostics"] = s.diagnostics;
  j["endTimeNs"] = s.endTime;
  return j.dump(2);
}

void write_timeline_csv(std::ostream& out, const std::vector<TimelineRow>& rows) {
  out << "time,request,from,to,reason\n";
  for (const auto& r : rows) {
    out << r.time << ',' << r.request.value << ',' << r.from.value << ',' << r.to.value << ',' << r.reason << '\n';
  }
}

void write_epoch_csv(std::ostream& out, const std::vector<EpochRow>& rows, bool header) {
  if (header) out << "epoch,algorithm,status,objective,migrations,placements\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.algorithm << ',' << r.status << ',' << r.objective << ',' << r.migrations << ','
        << r.placements << '\n';
  }
}

}  // namespace dapp
