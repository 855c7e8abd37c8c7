#include <doctest.h>

#include <random>
#include <sstream>

#include "../support/oracles.hpp"
#include "dapp/baselines.hpp"
#include "dapp/sim.hpp"

using namespace dapp;
using namespace dapp::testing;

namespace {

const ClassTable& classes() {
  static const ClassTable c = default_classes();
  return c;
}

Request req(std::uint16_t id, const std::string& cls, DatacenterId poa, std::optional<DatacenterId> at = {}) {
  Request r;
  r.id = RequestId(id);
  r.cls = classes().by_name(cls);
  r.poa = poa;
  r.arrivalSeq = id;
  r.curPlace = at;
  r.state = at ? RequestState::Placed : RequestState::Unplaced;
  return r;
}

Topology chain(int h, std::map<std::uint16_t, Cpu> caps, Cpu c = 20) {
  TreeSpec s;
  s.height = h;
  s.fanouts = {1};
  s.cpuPerLeaf = c;
  s.capacityOverrides = std::move(caps);
  return build_tree(s);
}

Snapshot snap_of(std::vector<Request> rs, std::set<std::uint16_t> handle) {
  Snapshot s;
  s.requests = std::move(rs);
  for (auto h : handle) s.toHandle.insert(RequestId(h));
  return s;
}

}  // namespace

TEST_CASE("F-Fit picks the lowest datacenter with room") {
  const Topology t = chain(6, {{1, 17}});
  const Decisions d = ffit_place(t, snap_of({req(1, "NonRT", DatacenterId(1))}, {1}));
  CHECK(d.placement.at(RequestId(1)) == DatacenterId(1));

  const Topology full = chain(6, {{1, 10}});
  CHECK(ffit_place(full, snap_of({req(1, "NonRT", DatacenterId(1))}, {1})).placement.at(RequestId(1)) == DatacenterId(2));

  const Topology blocked = chain(6, {{1, 16}, {2, 16}, {3, 18}});
  const Decisions f = ffit_place(blocked, snap_of({req(1, "RT", DatacenterId(1))}, {1}));
  CHECK(f.placement.empty());
  CHECK(f.failed == std::vector<RequestId>{RequestId(1)});
}

TEST_CASE("F-Fit respects what is already placed") {
  const Topology t = chain(3, {{1, 17}});
  const auto s = snap_of({req(1, "NonRT", DatacenterId(1), DatacenterId(1)), req(2, "NonRT", DatacenterId(1))}, {2});
  const Decisions d = ffit_place(t, s);
  CHECK(d.placement.size() == 1);
  CHECK(d.placement.at(RequestId(2)) == DatacenterId(2));
}

TEST_CASE("BUPU reshuffles a blocking NonRT upward") {
  // s3 (level 2) is the RT's top; it holds a NonRT that can move to s4.
  const Topology t = chain(4, {{1, 1}, {2, 1}, {3, 19}, {4, 17}});
  const auto s = snap_of({req(1, "NonRT", DatacenterId(1), DatacenterId(3)), req(2, "RT", DatacenterId(1))}, {2});
  const Decisions d = bupu_place(t, s);
  CHECK(d.failed.empty());
  CHECK(d.placement.at(RequestId(2)) == DatacenterId(3));
  CHECK(d.placement.at(RequestId(1)) == DatacenterId(4));
  CHECK(d.handled.contains(RequestId(1)));

  // F-Fit has no reshuffle and fails.
  CHECK(ffit_place(t, s).failed.size() == 1);
}

TEST_CASE("BUPU fails when the demand exceeds subtree and prefix capacity") {
  const Topology t = chain(3, {{1, 17}, {2, 17}, {3, 19}});
  std::vector<Request> rs;
  for (std::uint16_t i = 1; i <= 4; ++i) rs.push_back(req(i, "RT", DatacenterId(1)));
  const Decisions d = bupu_place(t, snap_of(rs, {1, 2, 3, 4}));
  CHECK(d.failed.size() == 1);
  CHECK(d.placement.size() == 3);
}

TEST_CASE("BUPU pushes everything to the cheapest level when capacity is abundant") {
  TreeSpec spec;
  spec.height = 4;
  spec.fanouts = {2};
  spec.cpuPerLeaf = 200;
  const Topology t = build_tree(spec);
  std::vector<Request> rs;
  for (std::uint16_t i = 1; i <= 6; ++i) rs.push_back(req(i, i % 2 ? "RT" : "NonRT", t.leaves()[i % t.leaves().size()]));
  const Decisions d = bupu_place(t, snap_of(rs, {1, 2, 3, 4, 5, 6}));
  for (const Request& r : rs) CHECK(d.placement.at(r.id) == t.feasible_prefix(r.poa, r.cls.maxLevels).back());
}

TEST_CASE("BUPU and the protocol agree when capacity is abundant") {
  TreeSpec spec;
  spec.height = 4;
  spec.fanouts = {2};
  spec.cpuPerLeaf = 400;
  const Topology t = build_tree(spec);
  std::ostringstream tr;
  for (int u = 1; u <= 10; ++u) tr << "0," << u << ",arrive," << (u % 8) + 1 << ',' << (u % 3 ? "NonRT" : "RT") << "\n";
  for (int u = 1; u <= 10; ++u) tr << "3," << u << ",move," << ((u + 3) % 8) + 1 << "\n";
  std::istringstream in(tr.str());
  const auto trace = parse_trace(in, t, classes());

  SimConfig sc;
  sc.recordTimeline = true;
  EpochConfig ec;
  ec.recordTimeline = true;
  const RunStats dapp = run(trace, t, classes(), sc);
  const RunStats bupu = run_bupu(trace, t, classes(), ec);
  auto last = [](const RunStats& st) {
    std::map<RequestId, DatacenterId> m;
    for (const auto& row : st.timeline) {
      if (row.to.valid()) m[row.request] = row.to;
    }
    return m;
  };
  CHECK(last(dapp) == last(bupu));
  CHECK(dapp.aggregate.total == doctest::Approx(bupu.aggregate.total));
}

TEST_CASE("LBound examples") {
  CostParams p;
  const Topology t = chain(6, {});
  const auto one = lbound_cost(t, p, snap_of({req(1, "NonRT", DatacenterId(1))}, {1}));
  REQUIRE(one.status == LpStatus::Optimal);
  CHECK(one.objective == doctest::Approx(47));

  const Topology tight = chain(6, {{6, 17}});
  const auto two =
      lbound_cost(tight, p, snap_of({req(1, "NonRT", DatacenterId(1)), req(2, "NonRT", DatacenterId(1))}, {1, 2}));
  REQUIRE(two.status == LpStatus::Optimal);
  CHECK(two.objective == doctest::Approx(105));

  // Staying is cheaper than a 600 migration for a small saving.
  const auto stay = lbound_cost(t, p, snap_of({req(1, "NonRT", DatacenterId(1), DatacenterId(5))}, {}));
  CHECK(stay.objective == doctest::Approx(58));

  const Topology none = chain(1, {{1, 10}});
  CHECK(lbound_cost(none, p, snap_of({req(1, "NonRT", DatacenterId(1))}, {1})).status == LpStatus::Infeasible);
}

TEST_CASE("property: grouped LBound equals the per-request relaxation and bounds every integral placement") {
  std::mt19937_64 rng(99);
  CostParams p;
  int feasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const PlacementInstance inst = random_instance(rng);
    const LboundResult lb = lbound_cost(inst.topo, p, inst.snap);
    const VertexOptimum o = enumerate_vertices(placement_lp(inst.topo, p, inst.snap));
    CAPTURE(trial);
    if (!o.feasible) {
      CHECK(lb.status == LpStatus::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(lb.status == LpStatus::Optimal);
    CHECK(close_rel(lb.objective, o.objective));
    for (double c : integral_placement_costs(inst.topo, p, inst.snap)) CHECK(lb.objective <= c + 1e-7);
  }
  CHECK(feasible > 100);
}

TEST_CASE("LBound minimum CPU") {
  const Topology t = chain(2, {});
  LbGroup g;
  g.cls = &classes().by_name("NonRT");
  g.poa = DatacenterId(1);
  g.count = 3;
  // Capacities C and 2C must hold 51 units: C = 17.
  CHECK(lbound_min_cpu_groups(t, {g}) == doctest::Approx(17));

  std::ostringstream tr;
  tr << "0,1,arrive,1,NonRT\n0,2,arrive,1,NonRT\n0,3,arrive,1,NonRT\n";
  std::istringstream in(tr.str());
  const auto trace = parse_trace(in, t, classes());
  CHECK(lbound_min_cpu(trace, t, classes()) == doctest::Approx(17));
}

TEST_CASE("algorithm names") {
  for (Algorithm a : {Algorithm::DAPP, Algorithm::FFit, Algorithm::BUPU, Algorithm::LBound}) {
    CHECK(parse_algorithm(to_string(a)) == a);
  }
  CHECK(parse_algorithm("dapp") == Algorithm::DAPP);
  CHECK(parse_algorithm("lb") == Algorithm::LBound);
  CHECK_THROWS(parse_algorithm("greedy"));
}

TEST_CASE("epoch runners keep placements feasible") {
  TreeSpec spec;
  spec.height = 4;
  spec.fanouts = {2};
  spec.cpuPerLeaf = 30;
  const Topology t = build_tree(spec);
  SynthParams sp;
  sp.nUsers = 40;
  sp.durationSeconds = 60;
  sp.rtRatio = 0.5;
  const auto trace = synth_trace(sp, t, classes());
  EpochConfig ec;
  for (const RunStats& st : {run_ffit(trace, t, classes(), ec), run_bupu(trace, t, classes(), ec)}) {
    CHECK(st.feasibilityChecks > 0);
    CHECK(st.feasibilityViolations == 0);
    CHECK(st.capacityViolations == 0);
  }
  const RunStats lb = run_lbound(trace, t, classes(), ec);
  CHECK_FALSE(lb.lpInfeasible);
  CHECK(lb.diagnostics.contains("event_cost_undefined"));
}
