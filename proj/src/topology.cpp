#include "dapp/topology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <set>
#include <sstream>

namespace dapp {

std::string to_string(DatacenterId id) { return "s" + std::to_string(id.value); }
std::string to_string(RequestId id) { return "r" + std::to_string(id.value); }

namespace {

struct Rect {
  int c0, c1, r0, r1;  // half-open
  int width() const { return c1 - c0; }
  int heightCells() const { return r1 - r0; }
};

struct ProtoNode {
  int level = 0;
  std::optional<GridCell> cell;  // leaves only
  std::vector<std::unique_ptr<ProtoNode>> children;
};

std::vector<Rect> split_rect(const Rect& r, int factor) {
  auto bisect_cols = [](const Rect& x) {
    int mid = x.c0 + (x.width() + 1) / 2;
    return std::vector<Rect>{{x.c0, mid, x.r0, x.r1}, {mid, x.c1, x.r0, x.r1}};
  };
  auto bisect_rows = [](const Rect& x) {
    int mid = x.r0 + (x.heightCells() + 1) / 2;
    return std::vector<Rect>{{x.c0, x.c1, x.r0, mid}, {x.c0, x.c1, mid, x.r1}};
  };
  if (r.width() == 1 && r.heightCells() == 1) return {r};
  if (factor == 2) {
    return r.width() >= r.heightCells() ? bisect_cols(r) : bisect_rows(r);
  }
  // quad-section; degenerates to bisection when one side is a single cell
  if (r.width() == 1) return bisect_rows(r);
  if (r.heightCells() == 1) return bisect_cols(r);
  std::vector<Rect> out;
  for (const Rect& half : bisect_rows(r)) {
    for (const Rect& q : bisect_cols(half)) out.push_back(q);
  }
  return out;
}

std::unique_ptr<ProtoNode> build_grid(const Rect& rect, int level, const GridSpec& grid,
                                      const std::set<GridCell>& poas, int height) {
  if (level == 0) {
    if (rect.width() != 1 || rect.heightCells() != 1) {
      throw std::invalid_argument("grid is too fine for the tree height: a leaf covers " +
                                  std::to_string(rect.width() * rect.heightCells()) + " cells");
    }
    GridCell cell{rect.c0, rect.r0};
    if (!poas.contains(cell)) return nullptr;
    auto leaf = std::make_unique<ProtoNode>();
    leaf->cell = cell;
    return leaf;
  }
  auto node = std::make_unique<ProtoNode>();
  node->level = level;
  const int factor = grid.splits[static_cast<std::size_t>(height - 1 - level)];
  for (const Rect& sub : split_rect(rect, factor)) {
    if (auto child = build_grid(sub, level - 1, grid, poas, height)) {
      node->children.push_back(std::move(child));
    }
  }
  if (node->children.empty()) return nullptr;  // pruned: no PoA below
  return node;
}

std::unique_ptr<ProtoNode> build_fanout(int level, const std::vector<int>& fanouts, int height) {
  auto node = std::make_unique<ProtoNode>();
  node->level = level;
  if (level == 0) return node;
  const int fan = fanouts[static_cast<std::size_t>(height - 1 - level)];
  for (int i = 0; i < fan; ++i) node->children.push_back(build_fanout(level - 1, fanouts, height));
  return node;
}

}  // namespace

Topology build_tree(const TreeSpec& spec) {
  if (spec.height < 1) throw std::invalid_argument("tree height must be >= 1");
  if (spec.cpuPerLeaf <= 0) throw std::invalid_argument("cpu per leaf must be positive");

  std::unique_ptr<ProtoNode> protoRoot;
  if (spec.grid) {
    const GridSpec& g = *spec.grid;
    if (g.cols < 1 || g.rows < 1) throw std::invalid_argument("grid dimensions must be positive");
    GridSpec grid = g;
    if (grid.splits.empty()) grid.splits.assign(static_cast<std::size_t>(spec.height - 1), 2);
    if (grid.splits.size() == 1) grid.splits.assign(static_cast<std::size_t>(spec.height - 1), grid.splits[0]);
    if (spec.height > 1 && grid.splits.size() != static_cast<std::size_t>(spec.height - 1)) {
      throw std::invalid_argument("grid splits must list height-1 entries");
    }
    for (int f : grid.splits) {
      if (f != 2 && f != 4) throw std::invalid_argument("grid split factor must be 2 or 4");
    }
    std::set<GridCell> poas;
    if (g.poaCells.empty()) {
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) poas.insert({c, r});
    } else {
      for (const GridCell& cell : g.poaCells) {
        if (cell.col < 0 || cell.col >= g.cols || cell.row < 0 || cell.row >= g.rows) {
          throw std::invalid_argument("PoA cell outside the grid");
        }
        poas.insert(cell);
      }
    }
    if (poas.empty()) throw std::invalid_argument("tree needs at least one PoA");
    protoRoot = build_grid({0, g.cols, 0, g.rows}, spec.height - 1, grid, poas, spec.height);
    if (!protoRoot) throw std::invalid_argument("tree needs at least one PoA");
  } else {
    std::vector<int> fanouts = spec.fanouts;
    if (spec.height > 1) {
      if (fanouts.empty()) throw std::invalid_argument("fanout list is empty");
      if (fanouts.size() == 1) fanouts.assign(static_cast<std::size_t>(spec.height - 1), fanouts[0]);
      if (fanouts.size() != static_cast<std::size_t>(spec.height - 1)) {
        throw std::invalid_argument("fanouts must list height-1 entries");
      }
      for (int f : fanouts) {
        if (f < 1) throw std::invalid_argument("tree needs at least one PoA: fanout must be >= 1");
      }
    }
    protoRoot = build_fanout(spec.height - 1, fanouts, spec.height);
  }

  // Collect nodes per level in left-to-right DFS order, then number them
  // bottom-up so leaves (PoAs) get the smallest ids.
  std::vector<std::vector<const ProtoNode*>> byLevel(static_cast<std::size_t>(spec.height));
  std::function<void(const ProtoNode*)> collect = [&](const ProtoNode* n) {
    byLevel[static_cast<std::size_t>(n->level)].push_back(n);
    for (const auto& c : n->children) collect(c.get());
  };
  collect(protoRoot.get());

  std::size_t total = 0;
  for (const auto& lv : byLevel) total += lv.size();
  if (total > kMaxDatacenterId) {
    throw std::invalid_argument("tree has " + std::to_string(total) + " datacenters; ids are 12-bit");
  }

  std::map<const ProtoNode*, DatacenterId> ids;
  std::uint16_t next = 1;
  for (const auto& lv : byLevel) {
    for (const ProtoNode* n : lv) ids[n] = DatacenterId{next++};
  }

  Topology t;
  t.height_ = spec.height;
  t.nodes_.resize(total);
  for (const auto& [proto, id] : ids) {
    DatacenterNode& dn = t.nodes_[id.value - 1u];
    dn.id = id;
    dn.level = proto->level;
    dn.capacity = static_cast<Cpu>(proto->level + 1) * spec.cpuPerLeaf;
    for (const auto& c : proto->children) {
      DatacenterId cid = ids.at(c.get());
      dn.children.push_back(cid);
      t.nodes_[cid.value - 1u].parent = id;
    }
    std::sort(dn.children.begin(), dn.children.end());
    if (proto->cell) t.layout_.cellToPoa[*proto->cell] = id;
  }
  t.root_ = ids.at(protoRoot.get());

  for (const auto& [rawId, cap] : spec.capacityOverrides) {
    if (rawId == 0 || rawId > total) {
      throw std::invalid_argument("capacity override for unknown datacenter " + std::to_string(rawId));
    }
    if (cap <= 0) throw std::invalid_argument("capacity override must be positive");
    t.nodes_[rawId - 1u].capacity = cap;
  }

  for (const DatacenterNode& n : t.nodes_) {
    if (n.children.empty()) t.leaves_.push_back(n.id);
  }

  if (spec.grid) {
    t.layout_.cols = spec.grid->cols;
    t.layout_.rows = spec.grid->rows;
  } else {
    // Lay the leaves out row-major on a near-square grid.
    const int n = static_cast<int>(t.leaves_.size());
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    t.layout_.cols = cols;
    t.layout_.rows = (n + cols - 1) / cols;
    for (int i = 0; i < n; ++i) t.layout_.cellToPoa[{i % cols, i / cols}] = t.leaves_[static_cast<std::size_t>(i)];
  }

  t.leafCount_.assign(total, 0);
  for (DatacenterId leaf : t.leaves_) {
    for (DatacenterId a : t.path_to_root(leaf)) ++t.leafCount_[a.value - 1u];
  }
  return t;
}

const DatacenterNode& Topology::node(DatacenterId id) const {
  if (!contains(id)) throw std::out_of_range("unknown datacenter " + to_string(id));
  return nodes_[id.value - 1u];
}

bool Topology::contains(DatacenterId id) const {
  return id.value >= 1 && id.value <= nodes_.size();
}

std::vector<DatacenterId> Topology::path_to_root(DatacenterId s) const {
  std::vector<DatacenterId> path;
  const DatacenterNode* n = &node(s);
  path.push_back(n->id);
  while (n->parent) {
    n = &node(*n->parent);
    path.push_back(n->id);
  }
  return path;
}

std::vector<DatacenterId> Topology::feasible_prefix(DatacenterId poa, int maxLevels) const {
  if (!is_leaf(poa)) throw std::invalid_argument(to_string(poa) + " is not a PoA leaf");
  if (maxLevels < 1) throw std::invalid_argument("delay-feasible prefix needs at least one level");
  std::vector<DatacenterId> path = path_to_root(poa);
  if (path.size() > static_cast<std::size_t>(maxLevels)) path.resize(static_cast<std::size_t>(maxLevels));
  return path;
}

bool Topology::is_ancestor(DatacenterId a, DatacenterId b) const {
  const DatacenterNode& nb = node(b);
  const DatacenterNode& na = node(a);
  if (na.level <= nb.level) return false;
  return ancestor_at_level(b, na.level) == a;
}

std::optional<DatacenterId> Topology::ancestor_at_level(DatacenterId s, int lvl) const {
  const DatacenterNode* n = &node(s);
  if (n->level > lvl) return std::nullopt;
  while (n->level < lvl) {
    if (!n->parent) return std::nullopt;
    n = &node(*n->parent);
  }
  return n->id;
}

DatacenterId Topology::next_hop(DatacenterId from, DatacenterId to) const {
  if (from == to) throw std::invalid_argument("next_hop called with identical endpoints");
  if (is_ancestor(from, to)) return *ancestor_at_level(to, level(from) - 1);
  return *node(from).parent;
}

std::size_t Topology::leaf_count(DatacenterId s) const {
  node(s);
  return leafCount_[s.value - 1u];
}

std::string Topology::dump() const {
  std::ostringstream os;
  for (const DatacenterNode& n : nodes_) {
    os << to_string(n.id) << " level=" << n.level << " cap=" << n.capacity;
    os << " parent=" << (n.parent ? to_string(*n.parent) : std::string("-"));
    os << " children=[";
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) os << ',';
      os << to_string(n.children[i]);
    }
    os << "]\n";
  }
  return os.str();
}

Topology Topology::with_cpu_per_leaf(Cpu cpuPerLeaf) const {
  if (cpuPerLeaf <= 0) throw std::invalid_argument("cpu per leaf must be positive");
  Topology t = *this;
  for (DatacenterNode& n : t.nodes_) n.capacity = static_cast<Cpu>(n.level + 1) * cpuPerLeaf;
  return t;
}

}  // namespace dapp
