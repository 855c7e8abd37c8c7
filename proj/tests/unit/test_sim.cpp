#include <doctest.h>

#include <sstream>

#include "dapp/config.hpp"
#include "dapp/log.hpp"
#include "dapp/sim.hpp"

using namespace dapp;

namespace {

std::vector<TraceEvent> parse(const std::string& text, const Topology& t, const ClassTable& c) {
  std::istringstream in(text);
  return parse_trace(in, t, c);
}

Topology tree(int h, int f, Cpu c) {
  TreeSpec s;
  s.height = h;
  s.fanouts = {f};
  s.cpuPerLeaf = c;
  return build_tree(s);
}

// Two-level class: the leaf or its parent.
ClassTable two_level() {
  ServiceClass x{"X", 0, 2, {17, 17}, {500, 300}};
  return ClassTable({x});
}

}  // namespace

TEST_CASE("empty trace") {
  const Topology t = tree(3, 2, 20);
  const RunStats st = run({}, t, default_classes(), SimConfig{});
  CHECK(st.totalMessages == 0);
  CHECK(st.aggregate.total == 0);
  CHECK(st.eventCost.total == 0);
  CHECK(st.success());
}

TEST_CASE("single arrival on a one-node tree") {
  const Topology t = tree(1, 1, 20);
  const auto trace = parse("0,1,arrive,1,NonRT\n5,1,depart\n", t, default_classes());
  const RunStats st = run(trace, t, default_classes(), SimConfig{});
  CHECK(st.totalControlBytes == 0);
  CHECK(st.placements == 1);
  CHECK(st.failures == 0);
  CHECK(st.success());
}

TEST_CASE("migration sends a release along the tree path") {
  const Topology t = tree(3, 2, 40);
  const ClassTable c = two_level();
  // s1 and s3 sit under different level-1 nodes (s5 and s6).
  const auto trace = parse("0,1,arrive,1,X\n2,1,move,3\n", t, c);
  SimConfig cfg;
  cfg.recordTimeline = true;
  const RunStats st = run(trace, t, c, cfg);
  CHECK(st.success());
  CHECK(st.migrations == 1);
  CHECK(st.messagesByKind.at("RELEASE") == 2);
  CHECK(st.bytesByKind.at("RELEASE") == 24);
  // First placement at s5 (pushed up), then s6.
  REQUIRE_FALSE(st.timeline.empty());
  CHECK(st.timeline.back().to == DatacenterId(6));
  CHECK(st.timeline.back().from == DatacenterId(5));
}

TEST_CASE("first placement sends no release; departure releases from the PoA") {
  const Topology t = tree(3, 2, 40);
  const ClassTable c = two_level();
  const RunStats first = run(parse("0,1,arrive,1,X\n", t, c), t, c, SimConfig{});
  CHECK(first.messagesByKind.at("RELEASE") == 0);
  const RunStats gone = run(parse("0,1,arrive,1,X\n3,1,depart\n", t, c), t, c, SimConfig{});
  CHECK(gone.messagesByKind.at("RELEASE") == 1);
}

TEST_CASE("runs are deterministic") {
  const Topology t = build_tree(desk_tree_spec()).with_cpu_per_leaf(30);
  SynthParams p;
  p.nUsers = 80;
  p.durationSeconds = 120;
  const auto trace = synth_trace(p, t, default_classes());
  const RunStats a = run(trace, t, default_classes(), SimConfig{});
  const RunStats b = run(trace, t, default_classes(), SimConfig{});
  CHECK(to_json_string(a) == to_json_string(b));
}

TEST_CASE("audits stay clean under contention") {
  const Topology base = build_tree(desk_tree_spec());
  SynthParams p;
  p.nUsers = 120;
  p.durationSeconds = 120;
  p.rtRatio = 0.5;
  const auto trace = synth_trace(p, base, default_classes());
  for (Cpu c : {20, 26, 34}) {
    CAPTURE(c);
    const RunStats st = run(trace, base.with_cpu_per_leaf(c), default_classes(), SimConfig{});
    CHECK_FALSE(st.diverged);
    CHECK(st.capacityAudits > 0);
    CHECK(st.capacityViolations == 0);
    CHECK(st.feasibilityChecks > 0);
    CHECK(st.feasibilityViolations == 0);
  }
}

TEST_CASE("the watchdog reports divergence") {
  const Topology t = build_tree(desk_tree_spec()).with_cpu_per_leaf(20);
  SynthParams p;
  p.nUsers = 60;
  p.durationSeconds = 60;
  const auto trace = synth_trace(p, t, default_classes());
  SimConfig cfg;
  cfg.maxMessagesPerInvocation = 3;
  set_log_level(LogLevel::Off);
  const RunStats st = run(trace, t, default_classes(), cfg);
  CHECK(st.diverged);
  CHECK_FALSE(st.success());
  CHECK(st.divergence.find("watchdog") != std::string::npos);
  set_log_level(LogLevel::Warn);
}

TEST_CASE("sample instants") {
  const Topology t = tree(2, 2, 20);
  const auto trace = parse("0,1,arrive,1,NonRT\n2.2,1,depart\n", t, default_classes());
  const auto s = sample_times(trace);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == 500 * kNanosPerMilli);
  CHECK(s[2] == 2500 * kNanosPerMilli);
}
