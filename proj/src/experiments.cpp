#include "dapp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "dapp/log.hpp"

namespace dapp {

RunStats run_algorithm(Algorithm a, const std::vector<TraceEvent>& trace, const Topology& topo, const RunContext& ctx) {
  switch (a) {
    case Algorithm::DAPP: return run(trace, topo, ctx.classes, ctx.sim);
    case Algorithm::FFit: return run_ffit(trace, topo, ctx.classes, ctx.epoch);
    case Algorithm::BUPU: return run_bupu(trace, topo, ctx.classes, ctx.epoch);
    case Algorithm::LBound: return run_lbound(trace, topo, ctx.classes, ctx.epoch);
  }
  throw std::logic_error("unhandled algorithm");
}

namespace {

Cpu ceil_cpu(double v) { return static_cast<Cpu>(std::ceil(v - 1e-9)); }

}  // namespace

MinCpuResult min_cpu_search(Algorithm a, const std::vector<TraceEvent>& trace, const RunContext& ctx,
                            const SearchLimits& limits) {
  MinCpuResult res;
  bool anyArrival = std::any_of(trace.begin(), trace.end(), [](const TraceEvent& e) { return e.kind == TraceKind::Arrive; });
  if (!anyArrival) return res;

  if (a == Algorithm::LBound) {
    res.fractional = lbound_min_cpu(trace, ctx.topo, ctx.classes);
    res.cpu = ceil_cpu(res.fractional);
    res.unbounded = res.cpu > limits.limit;
    return res;
  }

  std::map<Cpu, bool> probes;
  auto ok = [&](Cpu c) {
    const bool s = run_algorithm(a, trace, ctx.topo.with_cpu_per_leaf(c), ctx).success();
    probes[c] = s;
    ++res.runs;
    return s;
  };
  Cpu lo = 0;
  Cpu hi = std::max<Cpu>(1, limits.start);
  while (!ok(hi)) {
    lo = hi;
    if (hi >= limits.limit) {
      res.unbounded = true;
      res.cpu = limits.limit;
      return res;
    }
    hi = std::min(hi * 2, limits.limit);
  }
  while (hi - lo > 1) {
    const Cpu mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  res.cpu = hi;
  bool seenFail = false;
  for (auto it = probes.rbegin(); it != probes.rend(); ++it) {
    if (!it->second) seenFail = true;
    if (it->second && seenFail) res.monotonicityViolation = true;
  }
  if (res.monotonicityViolation) log_msg(LogLevel::Warn, to_string(a) + ": success is not monotone in C_cpu");
  return res;
}

std::vector<TraceEvent> study_trace(const ExperimentPlan& plan, const Topology& topo, const ClassTable& classes,
                                    std::uint64_t seed, double rtRatio) {
  SynthParams p = plan.synth;
  p.seed = seed;
  p.rtRatio = rtRatio;
  return synth_trace(p, topo, classes);
}

std::vector<Figure2Row> feasibility_study(const ExperimentPlan& plan, const RunContext& ctx) {
  std::vector<Figure2Row> rows;
  for (std::uint64_t seed : plan.seeds) {
    for (double rt : plan.feasibilityRtRatios) {
      const auto trace = study_trace(plan, ctx.topo, ctx.classes, seed, rt);
      const double lb = lbound_min_cpu(trace, ctx.topo, ctx.classes);
      for (Algorithm a : plan.algorithms) {
        const MinCpuResult m = min_cpu_search(a, trace, ctx, plan.search);
        Figure2Row r;
        r.seed = seed;
        r.rtRatio = rt;
        r.algorithm = to_string(a);
        r.minCpu = m.cpu;
        r.lboundCpu = lb;
        r.ratioToLbound = lb > 0 ? static_cast<double>(m.cpu) / lb : 0.0;
        r.unbounded = m.unbounded;
        r.monotonicityViolation = m.monotonicityViolation;
        rows.push_back(r);
        log_msg(LogLevel::Info, "figure2 seed " + std::to_string(seed) + " rt " + std::to_string(rt) + " " + r.algorithm +
                                    " -> " + std::to_string(m.cpu));
      }
    }
  }
  return rows;
}

std::vector<Figure3Row> overhead_study(const ExperimentPlan& plan, const RunContext& ctx) {
  std::vector<Figure3Row> rows;
  for (std::uint64_t seed : plan.seeds) {
    const auto full = study_trace(plan, ctx.topo, ctx.classes, seed, 1.0);
    const Cpu cpu = ceil_cpu(plan.overheadAugmentation * lbound_min_cpu(full, ctx.topo, ctx.classes));
    const Topology topo = ctx.topo.with_cpu_per_leaf(cpu);
    for (double rt : plan.overheadRtRatios) {
      const auto trace = study_trace(plan, ctx.topo, ctx.classes, seed, rt);
      for (SimTime bu : plan.buDelays) {
        SimConfig sc = ctx.sim;
        sc.protocol.buDelay = bu;
        sc.protocol.pdDelay = static_cast<SimTime>(std::llround(plan.pdToBuRatio * static_cast<double>(bu)));
        const RunStats st = run(trace, topo, ctx.classes, sc);
        Figure3Row r;
        r.seed = seed;
        r.rtRatio = rt;
        r.buDelayUs = static_cast<double>(bu) / kNanosPerMicro;
        r.pdDelayUs = static_cast<double>(sc.protocol.pdDelay) / kNanosPerMicro;
        r.cpu = cpu;
        r.bytesPerRequest = st.bytesPerRequest;
        r.messages = st.totalMessages;
        r.controlBytes = st.totalControlBytes;
        r.handledRequests = st.newRequests + st.criticalRequests;
        r.failures = st.failures;
        r.diverged = st.diverged;
        if (st.diverged) log_msg(LogLevel::Warn, "overhead run diverged: " + st.divergence);
        rows.push_back(r);
      }
    }
  }
  return rows;
}

std::vector<CostRow> cost_study(const ExperimentPlan& plan, const RunContext& ctx) {
  std::vector<CostRow> rows;
  for (std::uint64_t seed : plan.seeds) {
    const auto trace = study_trace(plan, ctx.topo, ctx.classes, seed, plan.costRtRatio);
    const double lb = lbound_min_cpu(trace, ctx.topo, ctx.classes);
    for (double aug : plan.augmentations) {
      const Cpu cpu = ceil_cpu(aug * lb);
      const Topology topo = ctx.topo.with_cpu_per_leaf(cpu);
      for (Algorithm a : plan.algorithms) {
        const RunStats st = run_algorithm(a, trace, topo, ctx);
        CostRow r;
        r.seed = seed;
        r.augmentation = aug;
        r.cpu = cpu;
        r.algorithm = to_string(a);
        r.failures = st.failures;
        r.lpInfeasible = st.lpInfeasible;
        if (a != Algorithm::LBound) {
          r.eventCost = st.eventCost.total;
          r.eventMigrationCost = st.eventCost.migrationCost;
        }
        r.aggregateCost = st.aggregate.total;
        r.aggregateMigrations = st.aggregate.migrationCost / std::max<double>(1.0, static_cast<double>(ctx.epoch.costs.migrationCost));
        r.handledRequests = st.newRequests + st.criticalRequests;
        rows.push_back(r);
      }
    }
  }
  return rows;
}

namespace {

std::string fmt(double v, int precision = 6) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(precision) << v;
  std::string s = o.str();
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s.empty() || s == "-0" ? "0" : s;
}

}  // namespace

void write_figure2_csv(std::ostream& out, const std::vector<Figure2Row>& rows) {
  out << "seed,rt_ratio,algorithm,min_cpu,lbound_cpu,ratio_to_lbound,unbounded,monotonicity_violation\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << fmt(r.rtRatio) << ',' << r.algorithm << ',' << r.minCpu << ',' << fmt(r.lboundCpu) << ','
        << fmt(r.ratioToLbound) << ',' << (r.unbounded ? 1 : 0) << ',' << (r.monotonicityViolation ? 1 : 0) << '\n';
  }
}

void write_figure3_csv(std::ostream& out, const std::vector<Figure3Row>& rows) {
  out << "seed,rt_ratio,t_bu_us,t_pd_us,cpu,bytes_per_request,messages,control_bytes,handled_requests,failures,"
         "diverged\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << fmt(r.rtRatio) << ',' << fmt(r.buDelayUs) << ',' << fmt(r.pdDelayUs) << ',' << r.cpu << ','
        << fmt(r.bytesPerRequest) << ',' << r.messages << ',' << r.controlBytes << ',' << r.handledRequests << ','
        << r.failures << ',' << (r.diverged ? 1 : 0) << '\n';
  }
}

void write_costs_csv(std::ostream& out, const std::vector<CostRow>& rows) {
  out << "seed,augmentation,cpu,algorithm,failures,lp_infeasible,event_cost,event_migration_cost,aggregate_cost,"
         "aggregate_migrations,handled_requests\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << fmt(r.augmentation) << ',' << r.cpu << ',' << r.algorithm << ',' << r.failures << ','
        << (r.lpInfeasible ? 1 : 0) << ',' << (r.eventCost ? std::to_string(*r.eventCost) : "") << ','
        << (r.eventMigrationCost ? std::to_string(*r.eventMigrationCost) : "") << ',' << fmt(r.aggregateCost, 3) << ','
        << fmt(r.aggregateMigrations, 3) << ',' << r.handledRequests << '\n';
  }
}

}  // namespace dapp
