#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dapp/messages.hpp"
#include "dapp/topology.hpp"
#include "dapp/workload.hpp"

namespace dapp {

struct ProtocolConfig {
  SimTime buDelay = 100 * kNanosPerMicro;  // T_BU, scaled by (level+1)
  SimTime pdDelay = 400 * kNanosPerMicro;  // T_PD, scaled by (level+1)
  SimTime fModePeriod = 10 * kNanosPerSecond;
  /// Alternative release policy: free the old place as soon as a user turns
  /// critical instead of when the new placement commits.
  bool releaseOnCritical = false;
};

enum class TimerKind { BU, PD };

/// What a datacenter may know about a request: its class and the PoA that
/// defines its delay-feasible set.
struct RequestView {
  const ServiceClass* cls = nullptr;
  DatacenterId poa;
  DatacenterId curPlace;  // 0 when none
  std::uint64_t arrivalSeq = 0;
  bool live = false;
};

/// Services the simulation kernel provides to the protocol nodes.
class ProtocolContext {
 public:
  virtual ~ProtocolContext() = default;

  virtual SimTime now() const = 0;
  virtual const Topology& topology() const = 0;
  /// Single-hop send. The kernel fills in seq and length.
  virtual void send(ControlMessage m) = 0;
  virtual void arm_timer(DatacenterId s, TimerKind k, SimTime delay) = 0;
  virtual RequestView view(RequestId r) const = 0;
  /// Places r on `at`. A pending (new or critical) request is accepted as a
  /// fresh placement; a settled one only migrates when its current place is
  /// `expectedFrom`. Returns false when the commit is stale.
  virtual bool commit(RequestId r, DatacenterId at, std::optional<DatacenterId> expectedFrom) = 0;
  virtual void fail(RequestId r, DatacenterId at) = 0;
  virtual void count(const std::string& diagnostic) = 0;
};

/// Per-datacenter state machine: bottom-up seek, push-up, push-down,
/// F-mode and the two accumulation timers.
class ProtocolNode {
 public:
  ProtocolNode(DatacenterId id, const Topology& topo, const ProtocolConfig& cfg);

  void on_ingress(ProtocolContext& ctx, RequestId r);
  void on_message(ProtocolContext& ctx, const ControlMessage& m);
  void on_timer(ProtocolContext& ctx, TimerKind k);
  /// Starts (or completes locally) a hop-by-hop RELEASE towards `dest`.
  void release_towards(ProtocolContext& ctx, RequestId r, DatacenterId dest);

  DatacenterId id() const { return id_; }
  Cpu available() const { return avail_; }
  Cpu capacity() const { return capacity_; }
  Cpu charged() const;
  bool f_mode(SimTime now) const { return now < fModeUntil_; }
  const std::map<RequestId, Cpu>& placed() const { return placed_; }
  const std::map<RequestId, Cpu>& potentially_placed() const { return potPlaced_; }
  /// True when the node holds no transient protocol state.
  bool idle() const;
  std::string describe() const;

 private:
  struct PdEntry {
    RequestId req;
    DatacenterId curPlace;
    bool fromCaller = false;
  };
  struct PdContext {
    DatacenterId initiator;
    std::optional<DatacenterId> caller;  // none when this node initiated
    std::vector<PdEntry> entries;
    std::int64_t deficit = 0;
    std::size_t nextChild = 0;
    std::optional<DatacenterId> awaiting;
    std::vector<RequestId> sentToChild;
    std::vector<PlacedEntry> placedBelow;
  };
  struct QueuedPd {
    DatacenterId sender;
    PdReqPayload payload;
  };

  // Request helpers.
  bool in_feasible_set(const RequestView& v, DatacenterId s) const;
  DatacenterId top_of(const RequestView& v) const;
  Cpu beta_at(const RequestView& v, DatacenterId s) const;
  void sort_requests(ProtocolContext& ctx, std::vector<RequestId>& reqs) const;
  RequestEntry entry(ProtocolContext& ctx, RequestId r, DatacenterId place) const;

  void arm(ProtocolContext& ctx, TimerKind k);
  void enter_f_mode(ProtocolContext& ctx);

  void run_bu(ProtocolContext& ctx);
  void run_pu(ProtocolContext& ctx);
  void send_pu_to_children(ProtocolContext& ctx, const std::vector<RequestId>& records);

  void start_own_pd(ProtocolContext& ctx);
  void handle_pd_request(ProtocolContext& ctx, DatacenterId sender, const PdReqPayload& p);
  void handle_pd_reply(ProtocolContext& ctx, DatacenterId sender, const PdReplyPayload& p);
  void continue_pd(ProtocolContext& ctx);
  bool can_nullify_locally(ProtocolContext& ctx) const;
  void self_push_down(ProtocolContext& ctx);
  void finish_pd(ProtocolContext& ctx);
  void after_pd(ProtocolContext& ctx);

  void release_local(ProtocolContext& ctx, RequestId r);
  void send_to(ProtocolContext& ctx, DatacenterId to, Payload p, DatacenterId destination = DatacenterId{});

  DatacenterId id_;
  const Topology* topo_;
  const ProtocolConfig* cfg_;
  int level_ = 0;
  Cpu capacity_ = 0;

  Cpu avail_ = 0;
  std::map<RequestId, Cpu> placed_;
  std::map<RequestId, Cpu> potPlaced_;
  std::vector<RequestId> unassigned_;
  std::map<RequestId, DatacenterId> pushUp_;  // request -> holder
  std::set<RequestId> pendingPuToParent_;
  std::map<RequestId, DatacenterId> downRoute_;  // child a record came from
  std::vector<RequestId> awaitingPd_;
  std::optional<PdContext> pd_;
  std::deque<QueuedPd> pdQueue_;
  SimTime fModeUntil_ = -1;
  bool buTimer_ = false;
  bool pdTimer_ = false;
  bool ownPdDeferred_ = false;
};

}  // namespace dapp
