#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dapp/topology.hpp"
#include "dapp/types.hpp"

namespace dapp {

/// An SLA class: how many levels above the PoA it may be placed on, and the
/// per-level CPU demand and computational cost.
struct ServiceClass {
  std::string name;
  ClassId id = 0;
  int maxLevels = 1;
  std::vector<Cpu> betaPerLevel;
  std::vector<Cost> compCostPerLevel;

  bool operator==(const ServiceClass&) const = default;
};

/// Validates the class invariants; throws ParseError with a description.
void validate_class(const ServiceClass& c);

class ClassTable {
 public:
  ClassTable() = default;
  explicit ClassTable(std::vector<ServiceClass> classes);

  const ServiceClass& by_name(const std::string& name) const;
  const ServiceClass& by_id(ClassId id) const;
  const ServiceClass* find(const std::string& name) const;
  const std::vector<ServiceClass>& classes() const { return classes_; }
  bool empty() const { return classes_.empty(); }

  bool operator==(const ClassTable&) const = default;

 private:
  std::vector<ServiceClass> classes_;
};

/// RT = {k=3, beta 17/17/19, cost 544/278/164};
/// NonRT = {k=6, beta 17, cost 544/278/148/86/58/47}.
ClassTable default_classes();

/// Parses `name,classId,maxLevels,beta0;beta1;...,cost0;cost1;...` lines.
/// Blank lines and lines starting with '#' are skipped.
ClassTable parse_class_table(std::istream& in);
void write_class_table(std::ostream& out, const ClassTable& table);

enum class RequestState { Unplaced, Placed, Failed, Departed };

std::string to_string(RequestState s);

struct Request {
  RequestId id;
  ServiceClass cls;
  DatacenterId poa;
  std::uint64_t arrivalSeq = 0;
  std::optional<DatacenterId> curPlace;
  RequestState state = RequestState::Unplaced;
};

enum class TraceKind { Arrive, Move, Depart };

struct TraceEvent {
  SimTime time = 0;
  RequestId user;
  TraceKind kind = TraceKind::Arrive;
  DatacenterId poa;       // arrive, move
  std::string className;  // arrive

  bool operator==(const TraceEvent&) const = default;
};

/// Parses the trace CSV `time_s,user_id,kind,arg1[,arg2]`. Events are
/// returned stably sorted by time; per-user ordering is validated
/// (arrive, then moves, then depart). Errors name the offending line.
std::vector<TraceEvent> parse_trace(std::istream& in, const Topology& topo, const ClassTable& classes);

void write_trace(std::ostream& out, const std::vector<TraceEvent>& events);

struct SynthParams {
  int nUsers = 200;
  double durationSeconds = 600.0;
  double speedCellsPerSecond = 0.1;
  double rtRatio = 0.3;
  std::uint64_t seed = 1;
  double minMoveGapSeconds = 1.0;
  std::string rtClass = "RT";
  std::string nonRtClass = "NonRT";
};

/// Random-waypoint walks over the topology's PoA grid. Users arrive
/// uniformly in the first half of the run and stay between a quarter and a
/// half of it. A move is emitted whenever the user's PoA changes; positions
/// are sampled every `minMoveGapSeconds`.
std::vector<TraceEvent> synth_trace(const SynthParams& params, const Topology& topo, const ClassTable& classes);

/// True iff the current placement of `r` is outside the delay-feasible
/// prefix of `newPoa`. Unplaced requests are never critical.
bool is_critical(const Topology& topo, const Request& r, DatacenterId newPoa);

/// splitmix64-based derivation of a child seed from a parent seed and a label.
std::uint64_t derive_seed(std::uint64_t parent, const std::string& label);

}  // namespace dapp
