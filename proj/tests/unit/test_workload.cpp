#include <doctest.h>

#include <set>
#include <sstream>

#include "dapp/config.hpp"
#include "dapp/workload.hpp"

using namespace dapp;

namespace {

Topology tree(int h, int f) {
  TreeSpec s;
  s.height = h;
  s.fanouts = {f};
  return build_tree(s);
}

std::vector<TraceEvent> parse(const std::string& text, const Topology& t) {
  std::istringstream in(text);
  return parse_trace(in, t, default_classes());
}

}  // namespace

TEST_CASE("default classes") {
  const ClassTable c = default_classes();
  const ServiceClass& rt = c.by_name("RT");
  CHECK(rt.maxLevels == 3);
  CHECK(rt.betaPerLevel == std::vector<Cpu>{17, 17, 19});
  CHECK(rt.compCostPerLevel == std::vector<Cost>{544, 278, 164});
  const ServiceClass& nrt = c.by_name("NonRT");
  CHECK(nrt.maxLevels == 6);
  CHECK(nrt.betaPerLevel == std::vector<Cpu>(6, 17));
  CHECK(nrt.compCostPerLevel == std::vector<Cost>{544, 278, 148, 86, 58, 47});
}

TEST_CASE("class table round trip and validation") {
  std::ostringstream out;
  write_class_table(out, default_classes());
  std::istringstream in(out.str());
  CHECK(parse_class_table(in) == default_classes());

  std::istringstream bad("X,1,2,17;17,100;100\n");
  CHECK_THROWS_AS(parse_class_table(bad), ParseError);
  std::istringstream wide("X,1,1,40,100\n");
  CHECK_THROWS_AS(parse_class_table(wide), ParseError);
  std::istringstream dup("A,1,1,3,5\nB,1,1,3,5\n");
  CHECK_THROWS_AS(parse_class_table(dup), ParseError);
}

TEST_CASE("trace line parsing") {
  const Topology t = tree(3, 2);
  const auto ev = parse("0.0,7,arrive,3,RT\n", t);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].time == 0);
  CHECK(ev[0].user == RequestId(7));
  CHECK(ev[0].kind == TraceKind::Arrive);
  CHECK(ev[0].poa == DatacenterId(3));
  CHECK(ev[0].className == "RT");
}

TEST_CASE("trace errors") {
  const Topology t = tree(3, 2);
  CHECK_THROWS_AS(parse("1.0,4,move,2\n", t), ParseError);
  CHECK_THROWS_AS(parse("0,1,arrive,2,RT\n0,1,arrive,2,RT\n", t), ParseError);
  CHECK_THROWS_AS(parse("0,1,arrive,5,RT\n", t), ParseError);  // not a leaf
  CHECK_THROWS_AS(parse("0,1,arrive,2,Gold\n", t), ParseError);
  CHECK_THROWS_AS(parse("x,1,depart\n", t), ParseError);
}

TEST_CASE("equal timestamps keep file order") {
  const Topology t = tree(3, 2);
  const auto ev = parse("1.0,2,arrive,1,RT\n0.5,1,arrive,2,NonRT\n1.0,1,move,3\n1.0,3,arrive,4,RT\n", t);
  REQUIRE(ev.size() == 4);
  CHECK(ev[0].user == RequestId(1));
  CHECK(ev[1].user == RequestId(2));
  CHECK(ev[2].user == RequestId(1));
  CHECK(ev[3].user == RequestId(3));
}

TEST_CASE("trace write/parse round trip") {
  const Topology t = build_tree(desk_tree_spec());
  SynthParams p;
  p.nUsers = 40;
  p.durationSeconds = 60;
  const auto trace = synth_trace(p, t, default_classes());
  std::ostringstream out;
  write_trace(out, trace);
  CHECK(parse(out.str(), t) == trace);
}

TEST_CASE("synthetic traces") {
  const Topology t = build_tree(desk_tree_spec());
  const ClassTable classes = default_classes();
  SynthParams p;
  p.nUsers = 100;
  p.durationSeconds = 120;

  SUBCASE("same seed, same trace") { CHECK(synth_trace(p, t, classes) == synth_trace(p, t, classes)); }
  SUBCASE("different seeds differ") {
    SynthParams q = p;
    q.seed = 2;
    CHECK_FALSE(synth_trace(p, t, classes) == synth_trace(q, t, classes));
  }
  SUBCASE("rtRatio 1 gives only RT") {
    p.rtRatio = 1.0;
    for (const auto& e : synth_trace(p, t, classes)) {
      if (e.kind == TraceKind::Arrive) CHECK(e.className == "RT");
    }
  }
  SUBCASE("RT fraction tracks the ratio") {
    p.rtRatio = 0.3;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      p.seed = seed;
      int rt = 0, all = 0;
      for (const auto& e : synth_trace(p, t, classes)) {
        if (e.kind != TraceKind::Arrive) continue;
        ++all;
        rt += e.className == "RT";
      }
      CHECK(all == 100);
      const double frac = static_cast<double>(rt) / all;
      CHECK(frac >= 0.2);
      CHECK(frac <= 0.4);
    }
  }
  SUBCASE("every user arrives once, moves to a different PoA and departs") {
    std::map<RequestId, DatacenterId> at;
    std::set<RequestId> gone;
    for (const auto& e : synth_trace(p, t, classes)) {
      switch (e.kind) {
        case TraceKind::Arrive:
          CHECK_FALSE(at.contains(e.user));
          CHECK(t.is_leaf(e.poa));
          at[e.user] = e.poa;
          break;
        case TraceKind::Move:
          REQUIRE(at.contains(e.user));
          CHECK(at[e.user] != e.poa);
          at[e.user] = e.poa;
          break;
        case TraceKind::Depart:
          CHECK(at.contains(e.user));
          gone.insert(e.user);
          break;
      }
    }
    CHECK(gone.size() <= at.size());
  }
}

TEST_CASE("criticality") {
  const Topology t = tree(6, 2);
  const ClassTable c = default_classes();
  Request r;
  r.cls = c.by_name("RT");
  r.poa = t.leaves()[0];
  r.state = RequestState::Placed;

  const DatacenterId l2 = *t.ancestor_at_level(r.poa, 2);
  r.curPlace = l2;
  CHECK_FALSE(is_critical(t, r, t.leaves()[3]));  // same level-2 subtree

  const DatacenterId l1 = *t.ancestor_at_level(r.poa, 1);
  r.curPlace = l1;
  CHECK(is_critical(t, r, t.leaves()[2]));  // outside l1's subtree

  r.cls = c.by_name("NonRT");
  r.curPlace = t.root();
  for (DatacenterId leaf : t.leaves()) CHECK_FALSE(is_critical(t, r, leaf));

  r.curPlace.reset();
  CHECK_FALSE(is_critical(t, r, t.leaves()[9]));
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, "trace") == derive_seed(1, "trace"));
  CHECK(derive_seed(1, "trace") != derive_seed(2, "trace"));
  CHECK(derive_seed(1, "trace") != derive_seed(1, "mobility"));
}
