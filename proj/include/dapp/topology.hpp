#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dapp/types.hpp"

namespace dapp {

struct DatacenterNode {
  DatacenterId id;
  int level = 0;
  std::optional<DatacenterId> parent;
  std::vector<DatacenterId> children;  // ascending id order
  Cpu capacity = 0;
};

/// Cell of the PoA grid, in (column, row) coordinates.
struct GridCell {
  int col = 0;
  int row = 0;
  auto operator<=>(const GridCell&) const = default;
};

/// Describes a rectangular PoA grid that is recursively partitioned into the
/// tree. `splits[i]` is the split factor (2 = bisection along the longer side,
/// 4 = quad-section) applied when descending from level height-1-i to the
/// level below it. `poaCells` empty means every cell hosts a PoA.
struct GridSpec {
  int cols = 1;
  int rows = 1;
  std::vector<int> splits;
  std::vector<GridCell> poaCells;
};

struct TreeSpec {
  int height = 6;
  /// Per-level fanout, root first (size height-1, or a single uniform value).
  /// Ignored when `grid` is set.
  std::vector<int> fanouts{2};
  std::optional<GridSpec> grid;
  Cpu cpuPerLeaf = 20;  // C_cpu: a level-l node gets (l+1) * C_cpu
  std::map<std::uint16_t, Cpu> capacityOverrides;
};

/// Spatial layout of the leaves, used by the synthetic mobility generator.
struct PoaLayout {
  int cols = 0;
  int rows = 0;
  std::map<GridCell, DatacenterId> cellToPoa;
};

/// Immutable fat-tree of datacenters. Leaves are co-located with PoAs, so a
/// PoA is identified by its leaf's DatacenterId.
class Topology {
 public:
  Topology() = default;

  const DatacenterNode& node(DatacenterId id) const;
  bool contains(DatacenterId id) const;

  DatacenterId root() const { return root_; }
  int height() const { return height_; }
  int level(DatacenterId id) const { return node(id).level; }
  std::size_t size() const { return nodes_.size(); }

  /// All nodes in ascending id order (leaves first, root last).
  std::span<const DatacenterNode> nodes() const { return nodes_; }
  std::span<const DatacenterId> leaves() const { return leaves_; }
  bool is_leaf(DatacenterId id) const { return node(id).children.empty(); }

  const PoaLayout& layout() const { return layout_; }

  /// Path from `s` up to the root, inclusive at both ends.
  std::vector<DatacenterId> path_to_root(DatacenterId s) const;

  /// First min(k, path length) entries of the path from the PoA leaf to the
  /// root. The last entry is the topmost delay-feasible datacenter.
  std::vector<DatacenterId> feasible_prefix(DatacenterId poa, int maxLevels) const;

  /// True iff `a` is a strict ancestor of `b`.
  bool is_ancestor(DatacenterId a, DatacenterId b) const;

  /// Ancestor of `s` at the given level, if `s` is at or below that level.
  std::optional<DatacenterId> ancestor_at_level(DatacenterId s, int level) const;

  /// Next hop on the unique tree path from `from` towards `to` (from != to).
  DatacenterId next_hop(DatacenterId from, DatacenterId to) const;

  /// Number of PoA leaves in the subtree of `s`.
  std::size_t leaf_count(DatacenterId s) const;

  /// Human-readable adjacency listing, one node per line.
  std::string dump() const;

  /// Returns a copy whose capacities follow (l+1) * cpuPerLeaf, keeping the
  /// same shape and ids. Per-node overrides are dropped.
  Topology with_cpu_per_leaf(Cpu cpuPerLeaf) const;

 private:
  friend Topology build_tree(const TreeSpec& spec);

  std::vector<DatacenterNode> nodes_;  // index = id - 1
  std::vector<DatacenterId> leaves_;
  std::vector<std::size_t> leafCount_;
  DatacenterId root_;
  int height_ = 0;
  PoaLayout layout_;
};

/// Builds the tree described by `spec`, pruning every internal node without a
/// PoA in its subtree. Throws std::invalid_argument on malformed specs.
Topology build_tree(const TreeSpec& spec);

}  // namespace dapp
