#include <doctest.h>

#include <random>

#include "dapp/config.hpp"
#include "dapp/topology.hpp"

using namespace dapp;

namespace {

Topology uniform(int height, int fanout, Cpu c = 20) {
  TreeSpec s;
  s.height = height;
  s.fanouts = {fanout};
  s.cpuPerLeaf = c;
  return build_tree(s);
}

}  // namespace

TEST_CASE("uniform binary tree of height 6") {
  const Topology t = uniform(6, 2);
  CHECK(t.leaves().size() == 32);
  CHECK(t.size() == 63);
  CHECK(t.level(t.root()) == 5);
  CHECK(t.node(t.root()).capacity == 120);
  CHECK(t.node(t.leaves().front()).capacity == 20);
}

TEST_CASE("ids run bottom-up with the root last") {
  const Topology t = uniform(4, 3);
  CHECK(t.root().value == t.size());
  int prevLevel = 0;
  for (const auto& n : t.nodes()) {
    CHECK(n.level >= prevLevel);
    prevLevel = n.level;
    for (std::size_t i = 1; i < n.children.size(); ++i) CHECK(n.children[i - 1] < n.children[i]);
  }
  for (std::size_t i = 0; i < t.leaves().size(); ++i) CHECK(t.leaves()[i].value == i + 1);
}

TEST_CASE("single-node tree") {
  const Topology t = uniform(1, 2, 13);
  REQUIRE(t.size() == 1);
  CHECK(t.level(t.root()) == 0);
  CHECK(t.node(t.root()).capacity == 13);
  CHECK(t.is_leaf(t.root()));
  CHECK(t.path_to_root(t.root()) == std::vector<DatacenterId>{t.root()});
}

TEST_CASE("grid cells without a PoA are pruned") {
  TreeSpec s;
  s.height = 3;
  GridSpec g;
  g.cols = 2;
  g.rows = 2;
  g.splits = {2, 2};
  g.poaCells = {{0, 0}, {1, 0}, {0, 1}};
  s.grid = g;
  const Topology t = build_tree(s);
  CHECK(t.leaves().size() == 3);
  // Root, two level-1 halves (one with a single PoA) and three leaves.
  CHECK(t.size() == 6);
  for (const auto& n : t.nodes()) {
    if (n.level > 0) CHECK_FALSE(n.children.empty());
  }
}

TEST_CASE("desk tree shape") {
  const Topology t = build_tree(desk_tree_spec());
  CHECK(t.leaves().size() == 64);
  CHECK(t.size() == 125);
  CHECK(t.height() == 6);
  CHECK(t.root().value == 125);
  CHECK(t.node(t.root()).children.size() == 4);
}

TEST_CASE("path to root") {
  const Topology t = uniform(6, 2);
  const DatacenterId leaf = t.leaves().front();
  const auto p = t.path_to_root(leaf);
  CHECK(p.size() == 6);
  CHECK(p.back() == t.root());
  CHECK(t.path_to_root(t.root()).size() == 1);
  const DatacenterId l2 = *t.ancestor_at_level(leaf, 2);
  CHECK(t.path_to_root(l2).size() == 4);
}

TEST_CASE("feasible prefix") {
  const Topology t = uniform(6, 2);
  const DatacenterId leaf = t.leaves()[5];
  const auto rt = t.feasible_prefix(leaf, 3);
  REQUIRE(rt.size() == 3);
  CHECK(t.level(rt[0]) == 0);
  CHECK(t.level(rt[2]) == 2);
  CHECK(rt[2] == *t.ancestor_at_level(leaf, 2));
  const auto nonRt = t.feasible_prefix(leaf, 6);
  CHECK(nonRt.size() == 6);
  CHECK(nonRt.back() == t.root());
  CHECK(t.feasible_prefix(leaf, 1) == std::vector<DatacenterId>{leaf});
  // Longer than the path: clipped at the root.
  CHECK(t.feasible_prefix(leaf, 9).size() == 6);
  CHECK_THROWS_AS(t.feasible_prefix(t.root(), 2), std::invalid_argument);
}

TEST_CASE("ancestry") {
  const Topology t = uniform(3, 2);
  const DatacenterId a = t.leaves()[0], b = t.leaves()[1];
  CHECK(t.is_ancestor(t.root(), a));
  CHECK_FALSE(t.is_ancestor(a, a));
  CHECK_FALSE(t.is_ancestor(a, b));
  CHECK_FALSE(t.is_ancestor(a, t.root()));
}

TEST_CASE("next hop walks the tree path") {
  const Topology t = uniform(3, 2);
  const DatacenterId a = t.leaves()[0], d = t.leaves()[3];
  const DatacenterId up = t.next_hop(a, d);
  CHECK(up == *t.node(a).parent);
  CHECK(t.next_hop(t.root(), d) == *t.node(d).parent);
  CHECK_THROWS(t.next_hop(a, a));
}

TEST_CASE("malformed specs are rejected") {
  TreeSpec s;
  s.height = 0;
  CHECK_THROWS_AS(build_tree(s), std::invalid_argument);
  s = TreeSpec{};
  s.cpuPerLeaf = 0;
  CHECK_THROWS_AS(build_tree(s), std::invalid_argument);
  s = desk_tree_spec();
  s.grid->splits = {3, 2, 2, 2, 2};
  CHECK_THROWS_AS(build_tree(s), std::invalid_argument);
  s = desk_tree_spec();
  s.grid->splits = {4, 2};
  CHECK_THROWS_AS(build_tree(s), std::invalid_argument);
  s = TreeSpec{};
  s.capacityOverrides[9999] = 5;
  CHECK_THROWS_AS(build_tree(s), std::invalid_argument);
}

TEST_CASE("capacity scaling keeps shape and ids") {
  TreeSpec s;
  s.height = 3;
  s.fanouts = {2};
  s.capacityOverrides[1] = 3;
  const Topology t = build_tree(s);
  CHECK(t.node(DatacenterId(1)).capacity == 3);
  const Topology u = t.with_cpu_per_leaf(11);
  CHECK(u.size() == t.size());
  CHECK(u.node(DatacenterId(1)).capacity == 11);
  CHECK(u.node(u.root()).capacity == 33);
}

TEST_CASE("property: prefixes are paths of the right length") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = std::uniform_int_distribution<int>(1, 5)(rng);
    const int f = std::uniform_int_distribution<int>(1, 3)(rng);
    const Topology t = uniform(h, f);
    for (DatacenterId leaf : t.leaves()) {
      for (int k = 1; k <= h; ++k) {
        const auto p = t.feasible_prefix(leaf, k);
        REQUIRE(p.size() == static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < p.size(); ++i) {
          CHECK(t.level(p[i]) == static_cast<int>(i));
          if (i > 0) CHECK(t.node(p[i - 1]).parent == p[i]);
        }
      }
    }
    std::size_t leaves = 0;
    for (DatacenterId c : t.node(t.root()).children) leaves += t.leaf_count(c);
    if (h > 1) CHECK(leaves == t.leaves().size());
  }
}
