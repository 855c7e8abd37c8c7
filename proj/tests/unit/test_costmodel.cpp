#include <doctest.h>

#include "dapp/costmodel.hpp"

using namespace dapp;

namespace {

Topology tree6() {
  TreeSpec s;
  s.height = 6;
  s.fanouts = {2};
  return build_tree(s);
}

Request req(std::uint16_t id, const std::string& cls, DatacenterId poa) {
  Request r;
  r.id = RequestId(id);
  r.cls = default_classes().by_name(cls);
  r.poa = poa;
  return r;
}

}  // namespace

TEST_CASE("beta and computational cost per level") {
  const Topology t = tree6();
  const DatacenterId leaf = t.leaves()[0];
  const Request rt = req(1, "RT", leaf);
  const Request nrt = req(2, "NonRT", leaf);
  CHECK(beta(t, rt, *t.ancestor_at_level(leaf, 2)) == 19);
  CHECK(beta(t, rt, leaf) == 17);
  for (int l = 0; l < 6; ++l) CHECK(beta(t, nrt, *t.ancestor_at_level(leaf, l)) == 17);
  CHECK_THROWS_AS(beta(t, rt, *t.ancestor_at_level(leaf, 3)), DomainError);
  CHECK_THROWS_AS(beta(t, rt, t.leaves()[1]), DomainError);

  CHECK(comp_cost(t, rt, *t.ancestor_at_level(leaf, 2)) == 164);
  CHECK(comp_cost(t, nrt, t.root()) == 47);
  CHECK(comp_cost(t, nrt, leaf) == 544);
}

TEST_CASE("migration cost") {
  CostParams p;
  CHECK(mig_cost(p, DatacenterId(1), DatacenterId(2)) == 600);
  CHECK(mig_cost(p, std::nullopt, DatacenterId(2)) == 0);
  p.migrationCost = 250;
  CHECK(mig_cost(p, DatacenterId(1), DatacenterId(2)) == 250);
  CHECK_THROWS_AS(mig_cost(p, DatacenterId(2), DatacenterId(2)), DomainError);
}

TEST_CASE("objective") {
  const Topology t = tree6();
  const DatacenterId leaf = t.leaves()[0];
  CostParams p;

  PlacementSnapshot one;
  one.requests.push_back(req(1, "NonRT", leaf));
  one.assigned[RequestId(1)] = t.root();
  CHECK(objective(t, p, one, {RequestId(1)}) == CostBreakdown{0, 47, 47});

  PlacementSnapshot mig;
  mig.requests.push_back(req(2, "RT", leaf));
  mig.previous[RequestId(2)] = leaf;
  mig.assigned[RequestId(2)] = *t.ancestor_at_level(leaf, 2);
  CHECK(objective(t, p, mig, {RequestId(2)}) == CostBreakdown{600, 164, 764});

  CHECK(objective(t, p, mig, {}) == CostBreakdown{0, 0, 0});

  PlacementSnapshot missing;
  missing.requests.push_back(req(3, "RT", leaf));
  CHECK_THROWS_AS(objective(t, p, missing, {RequestId(3)}), std::invalid_argument);
}

TEST_CASE("feasibility check") {
  TreeSpec s;
  s.height = 6;
  s.fanouts = {2};
  s.cpuPerLeaf = 34;
  const Topology t = build_tree(s);
  const DatacenterId leaf = t.leaves()[0];

  PlacementSnapshot snap;
  snap.requests = {req(1, "NonRT", leaf), req(2, "NonRT", leaf)};
  snap.assigned = {{RequestId(1), leaf}, {RequestId(2), leaf}};
  CHECK(check_feasible(t, snap).feasible);

  snap.requests.push_back(req(3, "NonRT", leaf));
  snap.assigned[RequestId(3)] = leaf;
  const auto over = check_feasible(t, snap);
  CHECK_FALSE(over.feasible);
  REQUIRE(over.overloadBy.contains(leaf));
  CHECK(over.overloadBy.at(leaf) == 17);

  PlacementSnapshot delay;
  delay.requests = {req(4, "RT", leaf)};
  delay.assigned[RequestId(4)] = *t.ancestor_at_level(leaf, 3);
  const auto d = check_feasible(t, delay);
  CHECK_FALSE(d.feasible);
  CHECK(d.delayViolations == std::vector<RequestId>{RequestId(4)});

  PlacementSnapshot unplaced;
  unplaced.requests = {req(5, "RT", leaf)};
  CHECK_FALSE(check_feasible(t, unplaced).feasible);

  // Failed and departed requests are not checked.
  unplaced.requests[0].state = RequestState::Failed;
  CHECK(check_feasible(t, unplaced).feasible);
}
