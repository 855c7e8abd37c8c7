#pragma once

#include <vector>

#include "dapp/costmodel.hpp"
#include "dapp/messages.hpp"
#include "dapp/protocol.hpp"
#include "dapp/stats.hpp"
#include "dapp/topology.hpp"
#include "dapp/workload.hpp"

namespace dapp {

struct DelayModel {
  std::int64_t bandwidthBitsPerSecond = 10'000'000;
  SimTime propagation = 22 * kNanosPerMicro;
  SimTime processing = 0;  // per-message handling time at the receiver
};

SimTime transmission_time(std::size_t bits, const DelayModel& d);
/// Serialization plus propagation, for an idle link.
SimTime link_delay(const ControlMessage& m, const DelayModel& d);

struct SimConfig {
  ProtocolConfig protocol;
  DelayModel delay;
  CostParams costs;
  std::int64_t maxMessagesPerInvocation = 1'000'000;
  bool auditEveryEvent = true;
  bool recordTimeline = false;
};

/// Runs the distributed protocol over the trace until the event queue
/// drains (or the watchdog trips).
RunStats run(const std::vector<TraceEvent>& trace, const Topology& topo, const ClassTable& classes,
             const SimConfig& cfg);

/// Sample instants for the aggregate cost: k + 0.5 s for every second that
/// the trace spans.
std::vector<SimTime> sample_times(const std::vector<TraceEvent>& trace);

}  // namespace dapp
