#include "dapp/sim.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

#include "dapp/log.hpp"

namespace dapp {

SimTime transmission_time(std::size_t bits, const DelayModel& d) {
  if (d.bandwidthBitsPerSecond <= 0) throw std::invalid_argument("control bandwidth must be positive");
  const auto num = static_cast<std::int64_t>(bits) * kNanosPerSecond;
  return static_cast<SimTime>((num + d.bandwidthBitsPerSecond - 1) / d.bandwidthBitsPerSecond);
}

SimTime link_delay(const ControlMessage& m, const DelayModel& d) {
  return transmission_time(message_size_bits(m), d) + d.propagation;
}

std::vector<SimTime> sample_times(const std::vector<TraceEvent>& trace) {
  std::vector<SimTime> out;
  if (trace.empty()) return out;
  SimTime last = 0;
  for (const auto& e : trace) last = std::max(last, e.time);
  for (SimTime k = 0; k * kNanosPerSecond <= last; ++k) out.push_back(k * kNanosPerSecond + kNanosPerSecond / 2);
  return out;
}

namespace {

constexpr std::size_t kMaxAuditMessages = 20;

enum class EvType { Trace, Deliver, Timer, Ingress, Sample };

struct Event {
  SimTime time;
  std::uint64_t seq;
  EvType type;
  std::size_t slot;  // trace index, message slot or sample index
  DatacenterId node;
  TimerKind timer = TimerKind::BU;
  RequestId req;

  bool operator>(const Event& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
};

struct RegistryEntry {
  Request req;  // req.poa is the live PoA
  DatacenterId routingPoa;
  bool pending = false;
  bool movedWhilePending = false;
};

class Simulator final : public ProtocolContext {
 public:
  Simulator(const std::vector<TraceEvent>& trace, const Topology& topo, const ClassTable& classes,
            const SimConfig& cfg)
      : trace_(trace), topo_(topo), classes_(classes), cfg_(cfg) {
    nodes_.reserve(topo.size());
    for (const auto& n : topo.nodes()) nodes_.emplace_back(n.id, topo, cfg.protocol);
    stats_.algorithm = "DAPP-ECC";
    for (int k = 1; k <= kMsgKindCount; ++k) {
      stats_.messagesByKind[to_string(static_cast<MsgKind>(k))] = 0;
      stats_.bytesByKind[to_string(static_cast<MsgKind>(k))] = 0;
    }
  }

  RunStats run() {
    for (std::size_t i = 0; i < trace_.size(); ++i) push({trace_[i].time, 0, EvType::Trace, i, {}, {}, {}});
    const auto samples = sample_times(trace_);
    for (std::size_t i = 0; i < samples.size(); ++i) push({samples[i], 0, EvType::Sample, i, {}, {}, {}});

    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      const bool protocolEvent = ev.type != EvType::Trace && ev.type != EvType::Sample;
      if (protocolEvent) --pendingProtocol_;
      dispatch(ev);
      if (stats_.diverged) break;
      if (pendingProtocol_ == 0 && (protocolEvent || ev.type == EvType::Trace)) at_quiescence();
    }
    stats_.endTime = now_;
    stats_.bytesPerRequest = handled() == 0 ? 0.0
                                            : static_cast<double>(stats_.totalControlBytes) /
                                                  static_cast<double>(handled());
    stats_.aggregate.migrationCost = static_cast<double>(stats_.aggregate.migrations * cfg_.costs.migrationCost);
    stats_.aggregate.total = stats_.aggregate.migrationCost + stats_.aggregate.computationalCost;
    return std::move(stats_);
  }

  // ProtocolContext
  SimTime now() const override { return now_; }
  const Topology& topology() const override { return topo_; }

  void send(ControlMessage m) override {
    const DatacenterId from = m.header.sender;
    const DatacenterId to = m.header.receiver;
    const auto& fn = topo_.node(from);
    const bool adjacent = (fn.parent && *fn.parent == to) ||
                          std::find(fn.children.begin(), fn.children.end(), to) != fn.children.end();
    if (!adjacent) throw std::logic_error("non-adjacent send " + to_string(from) + "->" + to_string(to));
    m.header.seq = seqBySender_[from.value]++;
    const std::size_t bits = message_size_bits(m);
    m.header.lengthBytes = static_cast<std::uint16_t>((bits + 7) / 8);
    const std::string kind = to_string(m.kind());
    stats_.messagesByKind[kind] += 1;
    stats_.bytesByKind[kind] += static_cast<std::int64_t>((bits + 7) / 8);
    stats_.totalMessages += 1;
    stats_.totalControlBytes += static_cast<std::int64_t>((bits + 7) / 8);
    ++windowMessages_;

    const std::uint32_t key = static_cast<std::uint32_t>(from.value) << 12 | to.value;
    SimTime& busy = linkBusyUntil_[key];
    const SimTime start = std::max(now_, busy);
    busy = start + transmission_time(bits, cfg_.delay);
    const SimTime arrive = busy + cfg_.delay.propagation + cfg_.delay.processing;
    std::size_t slot;
    if (!freeSlots_.empty()) {
      slot = freeSlots_.back();
      freeSlots_.pop_back();
      messages_[slot] = std::move(m);
    } else {
      slot = messages_.size();
      messages_.push_back(std::move(m));
    }
    push({arrive, 0, EvType::Deliver, slot, to, {}, {}});

    if (windowMessages_ > cfg_.maxMessagesPerInvocation && !stats_.diverged) {
      stats_.diverged = true;
      stats_.divergence = "watchdog: more than " + std::to_string(cfg_.maxMessagesPerInvocation) +
                          " messages without reaching quiescence at t=" + std::to_string(now_) + "ns";
      for (const auto& n : nodes_) {
        if (!n.idle()) stats_.divergence += "\n" + n.describe();
      }
      log_msg(LogLevel::Warn, stats_.divergence);
    }
  }

  void arm_timer(DatacenterId s, TimerKind k, SimTime delay) override {
    push({now_ + delay, 0, EvType::Timer, 0, s, k, {}});
  }

  RequestView view(RequestId r) const override {
    RequestView v;
    auto it = registry_.find(r);
    if (it == registry_.end()) return v;
    const RegistryEntry& e = it->second;
    v.cls = &e.req.cls;
    v.poa = e.routingPoa;
    v.curPlace = e.req.curPlace.value_or(DatacenterId{});
    v.arrivalSeq = e.req.arrivalSeq;
    v.live = live(e);
    return v;
  }

  bool commit(RequestId r, DatacenterId at, std::optional<DatacenterId> expectedFrom) override {
    auto it = registry_.find(r);
    if (it == registry_.end() || !live(it->second)) return false;
    RegistryEntry& e = it->second;
    Request probe = e.req;
    probe.poa = e.routingPoa;
    if (!delay_feasible(topo_, probe, at)) {
      stats_.diagnostics["commit_not_delay_feasible"] += 1;
      return false;
    }
    const std::optional<DatacenterId> old = e.req.curPlace;
    if (e.pending) {
      note_handled(r, old);
      e.pending = false;
      e.req.curPlace = at;
      e.req.state = RequestState::Placed;
      stats_.placements += 1;
      if (old && *old != at) {
        stats_.migrations += 1;
        stats_.aggregate.migrations += 1;
        nodes_[at.value - 1u].release_towards(*this, r, *old);
      }
      record(r, old, at, old ? "critical" : "new");
      if (e.movedWhilePending) {
        e.movedWhilePending = false;
        e.routingPoa = e.req.poa;
        probe.poa = e.req.poa;
        if (!delay_feasible(topo_, probe, at)) become_critical(r, e);
      }
      return true;
    }
    if (!expectedFrom || old != expectedFrom || *old == at) return false;
    note_handled(r, old);
    e.req.curPlace = at;
    stats_.migrations += 1;
    stats_.aggregate.migrations += 1;
    record(r, old, at, "push-down");
    return true;
  }

  void fail(RequestId r, DatacenterId at) override {
    auto it = registry_.find(r);
    if (it == registry_.end() || !live(it->second)) return;
    RegistryEntry& e = it->second;
    e.req.state = RequestState::Failed;
    e.pending = false;
    stats_.failures += 1;
    windowHandled_.erase(r);
    record(r, e.req.curPlace, std::nullopt, "failed");
    if (e.req.curPlace) nodes_[at.value - 1u].release_towards(*this, r, *e.req.curPlace);
    e.req.curPlace.reset();
    log_msg(LogLevel::Debug, "request " + to_string(r) + " failed at " + to_string(at));
  }

  void count(const std::string& d) override { stats_.diagnostics[d] += 1; }

 private:
  static bool live(const RegistryEntry& e) {
    return e.req.state != RequestState::Failed && e.req.state != RequestState::Departed;
  }

  std::int64_t handled() const { return stats_.newRequests + stats_.criticalRequests; }

  void push(Event ev) {
    ev.seq = nextSeq_++;
    if (ev.type != EvType::Trace && ev.type != EvType::Sample) ++pendingProtocol_;
    queue_.push(ev);
  }

  void note_handled(RequestId r, std::optional<DatacenterId> x) { windowHandled_.try_emplace(r, x); }

  void record(RequestId r, std::optional<DatacenterId> from, std::optional<DatacenterId> to, const char* why) {
    if (!cfg_.recordTimeline) return;
    stats_.timeline.push_back({now_, r, from.value_or(DatacenterId{}), to.value_or(DatacenterId{}), why});
  }

  void become_critical(RequestId r, RegistryEntry& e) {
    e.pending = true;
    e.routingPoa = e.req.poa;
    stats_.criticalRequests += 1;
    note_handled(r, e.req.curPlace);
    if (cfg_.protocol.releaseOnCritical && e.req.curPlace) {
      nodes_[e.req.poa.value - 1u].release_towards(*this, r, *e.req.curPlace);
      e.req.curPlace.reset();
    }
    push({now_, 0, EvType::Ingress, 0, e.req.poa, {}, r});
  }

  void dispatch(const Event& ev) {
    switch (ev.type) {
      case EvType::Trace:
        handle_trace(trace_[ev.slot]);
        break;
      case EvType::Sample:
        sample();
        break;
      case EvType::Ingress:
        nodes_[ev.node.value - 1u].on_ingress(*this, ev.req);
        audit(ev.node);
        break;
      case EvType::Timer:
        nodes_[ev.node.value - 1u].on_timer(*this, ev.timer);
        audit(ev.node);
        break;
      case EvType::Deliver: {
        ControlMessage m = std::move(messages_[ev.slot]);
        freeSlots_.push_back(ev.slot);
        nodes_[ev.node.value - 1u].on_message(*this, m);
        audit(ev.node);
        break;
      }
    }
  }

  void handle_trace(const TraceEvent& te) {
    switch (te.kind) {
      case TraceKind::Arrive: {
        RegistryEntry e;
        e.req.id = te.user;
        e.req.cls = classes_.by_name(te.className);
        e.req.poa = te.poa;
        e.req.arrivalSeq = nextArrival_++;
        e.routingPoa = te.poa;
        e.pending = true;
        registry_[te.user] = e;
        stats_.newRequests += 1;
        note_handled(te.user, std::nullopt);
        push({now_, 0, EvType::Ingress, 0, te.poa, {}, te.user});
        break;
      }
      case TraceKind::Move: {
        auto it = registry_.find(te.user);
        if (it == registry_.end() || !live(it->second)) return;
        RegistryEntry& e = it->second;
        e.req.poa = te.poa;
        if (e.pending) {
          e.movedWhilePending = true;
          stats_.diagnostics["move_while_pending"] += 1;
          return;
        }
        if (is_critical(topo_, e.req, te.poa)) {
          become_critical(te.user, e);
        } else {
          e.routingPoa = te.poa;
        }
        break;
      }
      case TraceKind::Depart: {
        auto it = registry_.find(te.user);
        if (it == registry_.end() || !live(it->second)) return;
        RegistryEntry& e = it->second;
        e.req.state = RequestState::Departed;
        e.pending = false;
        windowHandled_.erase(te.user);
        record(te.user, e.req.curPlace, std::nullopt, "departed");
        if (e.req.curPlace) nodes_[e.req.poa.value - 1u].release_towards(*this, te.user, *e.req.curPlace);
        e.req.curPlace.reset();
        break;
      }
    }
  }

  void sample() {
    Cost sum = 0;
    for (const auto& [r, e] : registry_) {
      if (!live(e) || !e.req.curPlace) continue;
      sum += e.req.cls.compCostPerLevel[static_cast<std::size_t>(topo_.level(*e.req.curPlace))];
    }
    stats_.aggregate.computationalCost += static_cast<double>(sum);
    stats_.aggregate.samples += 1;
  }

  void audit_msg(std::string m) {
    if (stats_.auditMessages.size() < kMaxAuditMessages) stats_.auditMessages.push_back(std::move(m));
  }

  void audit(DatacenterId s) {
    if (!cfg_.auditEveryEvent) return;
    check_capacity(nodes_[s.value - 1u]);
  }

  void check_capacity(const ProtocolNode& n) {
    stats_.capacityAudits += 1;
    if (n.available() < 0 || n.available() + n.charged() != n.capacity()) {
      stats_.capacityViolations += 1;
      audit_msg("capacity audit failed at t=" + std::to_string(now_) + ": " + n.describe());
    }
  }

  void at_quiescence() {
    if (windowMessages_ > 0 || !windowHandled_.empty()) stats_.invocations += 1;
    stats_.maxMessagesInInvocation = std::max(stats_.maxMessagesInInvocation, windowMessages_);
    windowMessages_ = 0;

    // Global soundness check of the settled state.
    stats_.feasibilityChecks += 1;
    PlacementSnapshot snap;
    std::map<DatacenterId, std::set<RequestId>> holders;
    for (const auto& [r, e] : registry_) {
      if (!live(e)) continue;
      Request q = e.req;
      q.poa = e.req.poa;
      snap.requests.push_back(q);
      if (e.req.curPlace) {
        snap.assigned[r] = *e.req.curPlace;
        holders[*e.req.curPlace].insert(r);
      }
    }
    FeasibilityReport rep = check_feasible(topo_, snap);
    bool ok = rep.feasible;
    for (const std::string& m : rep.messages) audit_msg("t=" + std::to_string(now_) + " " + m);
    for (const auto& n : nodes_) {
      check_capacity(n);
      std::set<RequestId> held;
      for (const auto& [r, b] : n.placed()) held.insert(r);
      if (!n.idle() || held != holders[n.id()]) {
        ok = false;
        audit_msg("t=" + std::to_string(now_) + " node state disagrees with placements: " + n.describe());
      }
    }
    if (!ok) stats_.feasibilityViolations += 1;

    // Event cost over this invocation's handled set.
    PlacementSnapshot cs;
    std::set<RequestId> handledSet;
    for (const auto& [r, x] : windowHandled_) {
      const RegistryEntry& e = registry_.at(r);
      if (!live(e) || !e.req.curPlace) continue;
      Request q = e.req;
      cs.requests.push_back(q);
      cs.assigned[r] = *e.req.curPlace;
      if (x) cs.previous[r] = *x;
      handledSet.insert(r);
    }
    stats_.eventCost += objective(topo_, cfg_.costs, cs, handledSet);
    windowHandled_.clear();
  }

  const std::vector<TraceEvent>& trace_;
  const Topology& topo_;
  const ClassTable& classes_;
  const SimConfig& cfg_;

  std::vector<ProtocolNode> nodes_;
  std::map<RequestId, RegistryEntry> registry_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::vector<ControlMessage> messages_;
  std::vector<std::size_t> freeSlots_;
  std::unordered_map<std::uint32_t, SimTime> linkBusyUntil_;
  std::unordered_map<std::uint16_t, std::uint16_t> seqBySender_;
  std::map<RequestId, std::optional<DatacenterId>> windowHandled_;
  std::uint64_t nextSeq_ = 0;
  std::uint64_t nextArrival_ = 0;
  std::int64_t pendingProtocol_ = 0;
  std::int64_t windowMessages_ = 0;
  SimTime now_ = 0;
  RunStats stats_;
};

}  // namespace

RunStats run(const std::vector<TraceEvent>& trace, const Topology& topo, const ClassTable& classes,
             const SimConfig& cfg) {
  Simulator sim(trace, topo, classes, cfg);
  return sim.run();
}

}  // namespace dapp
