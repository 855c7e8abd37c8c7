#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dapp/baselines.hpp"
#include "dapp/sim.hpp"

namespace dapp {

/// Everything an algorithm run needs besides the trace.
struct RunContext {
  Topology topo;
  ClassTable classes;
  SimConfig sim;
  EpochConfig epoch;
};

RunStats run_algorithm(Algorithm a, const std::vector<TraceEvent>& trace, const Topology& topo, const RunContext& ctx);

struct MinCpuResult {
  Cpu cpu = 0;
  bool unbounded = false;
  double fractional = 0;  // LBound only: the relaxation's exact threshold
  int runs = 0;
  /// A probe succeeded below a probe that failed.
  bool monotonicityViolation = false;
};

struct SearchLimits {
  Cpu start = 16;
  Cpu limit = 4096;
};

/// Smallest integral C_cpu (capacity (level+1) * C_cpu per node) for which
/// the algorithm serves the whole trace without a failure. Doubling from
/// `start`, then bisection. LBound uses the LP threshold rounded up.
MinCpuResult min_cpu_search(Algorithm a, const std::vector<TraceEvent>& trace, const RunContext& ctx,
                            const SearchLimits& limits = {});

struct ExperimentPlan {
  SynthParams synth;  // base workload; rtRatio is overridden per sweep point
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<Algorithm> algorithms{Algorithm::LBound, Algorithm::BUPU, Algorithm::DAPP, Algorithm::FFit};

  bool runFeasibility = true;
  std::vector<double> feasibilityRtRatios{0.0, 0.3, 0.5, 1.0};
  SearchLimits search;

  bool runOverhead = true;
  std::vector<double> overheadRtRatios{0.0, 0.5, 1.0};
  std::vector<SimTime> buDelays{1 * kNanosPerMicro, 2 * kNanosPerMicro, 4 * kNanosPerMicro, 8 * kNanosPerMicro,
                                16 * kNanosPerMicro};
  double pdToBuRatio = 4.0;
  double overheadAugmentation = 1.1;  // over LBound's requirement at rtRatio 1

  bool runCost = true;
  double costRtRatio = 0.3;
  std::vector<double> augmentations{1.1, 1.5, 2.0, 3.0};  // over LBound's minimum
};

struct Figure2Row {
  std::uint64_t seed = 0;
  double rtRatio = 0;
  std::string algorithm;
  Cpu minCpu = 0;
  double lboundCpu = 0;  // fractional LBound threshold of the same trace
  double ratioToLbound = 0;
  bool unbounded = false;
  bool monotonicityViolation = false;
};

struct Figure3Row {
  std::uint64_t seed = 0;
  double rtRatio = 0;
  double buDelayUs = 0;
  double pdDelayUs = 0;
  Cpu cpu = 0;
  double bytesPerRequest = 0;
  std::int64_t messages = 0;
  std::int64_t controlBytes = 0;
  std::int64_t handledRequests = 0;
  std::int64_t failures = 0;
  bool diverged = false;
};

struct CostRow {
  std::uint64_t seed = 0;
  double augmentation = 0;
  Cpu cpu = 0;
  std::string algorithm;
  std::int64_t failures = 0;
  bool lpInfeasible = false;
  std::optional<Cost> eventCost;  // undefined for LBound
  std::optional<Cost> eventMigrationCost;
  double aggregateCost = 0;
  double aggregateMigrations = 0;
  std::int64_t handledRequests = 0;
};

std::vector<Figure2Row> feasibility_study(const ExperimentPlan& plan, const RunContext& ctx);
std::vector<Figure3Row> overhead_study(const ExperimentPlan& plan, const RunContext& ctx);
std::vector<CostRow> cost_study(const ExperimentPlan& plan, const RunContext& ctx);

/// Per-seed synthetic trace of a sweep point.
std::vector<TraceEvent> study_trace(const ExperimentPlan& plan, const Topology& topo, const ClassTable& classes,
                                    std::uint64_t seed, double rtRatio);

void write_figure2_csv(std::ostream& out, const std::vector<Figure2Row>& rows);
void write_figure3_csv(std::ostream& out, const std::vector<Figure3Row>& rows);
void write_costs_csv(std::ostream& out, const std::vector<CostRow>& rows);

}  // namespace dapp
