#include "dapp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace dapp {

using nlohmann::json;
namespace fs = std::filesystem;

TreeSpec desk_tree_spec() {
  TreeSpec t;
  t.height = 6;
  GridSpec g;
  g.cols = 8;
  g.rows = 8;
  g.splits = {4, 2, 2, 2, 2};
  t.grid = g;
  t.cpuPerLeaf = 40;
  return t;
}

RunContext Config::context() const {
  RunContext c;
  c.topo = build_tree(tree);
  c.classes = classes;
  c.sim = sim;
  c.epoch.costs = sim.costs;
  c.epoch.recordTimeline = sim.recordTimeline;
  return c;
}

namespace {

// Object view that remembers which keys were read, so typos are reported
// instead of silently ignored.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + "must be an object");
  }
  ~Obj() = default;

  bool has(const std::string& k) {
    used_.insert(k);
    return j_.contains(k) && !j_.at(k).is_null();
  }
  const json& at(const std::string& k) {
    used_.insert(k);
    return j_.at(k);
  }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  template <class T>
  void get(const std::string& k, T& out) {
    if (!has(k)) return;
    try {
      out = j_.at(k).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(key(k) + ": wrong type");
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) throw ConfigError("unknown key '" + key(it.key()) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void positive(double v, const std::string& what) {
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
}
void non_negative(double v, const std::string& what) {
  if (!(v >= 0) || !std::isfinite(v)) throw ConfigError(what + " must be non-negative");
}
void ratio(double v, const std::string& what) {
  if (!(v >= 0 && v <= 1)) throw ConfigError(what + " must lie in [0, 1]");
}

SimTime us(double v) { return static_cast<SimTime>(std::llround(v * kNanosPerMicro)); }
double to_us(SimTime t) { return static_cast<double>(t) / kNanosPerMicro; }

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  if (q.is_relative() && !base.empty()) q = base / q;
  return fs::absolute(q).lexically_normal();
}

TreeSpec parse_tree(const json& j) {
  Obj o(j, "topology");
  TreeSpec t = desk_tree_spec();
  o.get("height", t.height);
  o.get("cpu_per_leaf", t.cpuPerLeaf);
  if (o.has("fanouts")) {
    o.get("fanouts", t.fanouts);
    t.grid.reset();
  }
  if (o.has("grid")) {
    Obj g(o.at("grid"), "topology.grid");
    GridSpec gs;
    g.get("cols", gs.cols);
    g.get("rows", gs.rows);
    g.get("splits", gs.splits);
    if (g.has("poa_cells")) {
      for (const auto& c : g.at("poa_cells")) {
        if (!c.is_array() || c.size() != 2) throw ConfigError("topology.grid.poa_cells: entries are [col, row]");
        gs.poaCells.push_back({c[0].get<int>(), c[1].get<int>()});
      }
    }
    g.finish();
    t.grid = gs;
  }
  if (o.has("capacity_overrides")) {
    Obj c(o.at("capacity_overrides"), "topology.capacity_overrides");
    for (auto it = o.at("capacity_overrides").begin(); it != o.at("capacity_overrides").end(); ++it) {
      c.has(it.key());
      unsigned long id = 0;
      try {
        id = std::stoul(it.key());
      } catch (const std::exception&) {
        throw ConfigError("topology.capacity_overrides: key '" + it.key() + "' is not a datacenter id");
      }
      if (id == 0 || id > kMaxDatacenterId) throw ConfigError("topology.capacity_overrides: id out of range");
      t.capacityOverrides[static_cast<std::uint16_t>(id)] = it.value().get<Cpu>();
    }
    c.finish();
  }
  o.finish();
  positive(t.height, "topology.height");
  positive(static_cast<double>(t.cpuPerLeaf), "topology.cpu_per_leaf");
  try {
    (void)build_tree(t);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
  return t;
}

ServiceClass parse_class(const json& j, std::size_t i) {
  Obj o(j, "classes[" + std::to_string(i) + "]");
  ServiceClass c;
  int id = -1;
  o.get("name", c.name);
  o.get("id", id);
  o.get("max_levels", c.maxLevels);
  o.get("beta", c.betaPerLevel);
  o.get("cost", c.compCostPerLevel);
  o.finish();
  if (id < 0 || id > 15) throw ConfigError(o.key("id") + " must lie in [0, 15]");
  c.id = static_cast<ClassId>(id);
  try {
    validate_class(c);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json class_json(const ServiceClass& c) {
  return json{{"name", c.name},
              {"id", c.id},
              {"max_levels", c.maxLevels},
              {"beta", c.betaPerLevel},
              {"cost", c.compCostPerLevel}};
}

SynthParams parse_synth(const json& j) {
  Obj o(j, "workload.synth");
  SynthParams p;
  o.get("n_users", p.nUsers);
  o.get("duration_s", p.durationSeconds);
  o.get("speed_cells_per_s", p.speedCellsPerSecond);
  o.get("rt_ratio", p.rtRatio);
  o.get("seed", p.seed);
  o.get("move_gap_s", p.minMoveGapSeconds);
  o.get("rt_class", p.rtClass);
  o.get("nonrt_class", p.nonRtClass);
  o.finish();
  positive(p.nUsers, "workload.synth.n_users");
  if (p.nUsers > static_cast<int>(kMaxRequestId)) throw ConfigError("workload.synth.n_users exceeds the 14-bit request id");
  positive(p.durationSeconds, "workload.synth.duration_s");
  non_negative(p.speedCellsPerSecond, "workload.synth.speed_cells_per_s");
  ratio(p.rtRatio, "workload.synth.rt_ratio");
  positive(p.minMoveGapSeconds, "workload.synth.move_gap_s");
  return p;
}

json synth_json(const SynthParams& p) {
  return json{{"n_users", p.nUsers},         {"duration_s", p.durationSeconds}, {"speed_cells_per_s", p.speedCellsPerSecond},
              {"rt_ratio", p.rtRatio},       {"seed", p.seed},                  {"move_gap_s", p.minMoveGapSeconds},
              {"rt_class", p.rtClass},       {"nonrt_class", p.nonRtClass}};
}

void parse_experiment(const json& j, ExperimentPlan& plan) {
  Obj o(j, "experiment");
  o.get("seeds", plan.seeds);
  if (o.has("algorithms")) {
    plan.algorithms.clear();
    for (const auto& a : o.at("algorithms")) {
      try {
        plan.algorithms.push_back(parse_algorithm(a.get<std::string>()));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("experiment.algorithms: ") + e.what());
      }
    }
  }
  o.get("feasibility", plan.runFeasibility);
  o.get("feasibility_rt_ratios", plan.feasibilityRtRatios);
  o.get("search_start_cpu", plan.search.start);
  o.get("search_limit_cpu", plan.search.limit);
  o.get("overhead", plan.runOverhead);
  o.get("overhead_rt_ratios", plan.overheadRtRatios);
  if (o.has("t_bu_sweep_us")) {
    std::vector<double> v;
    o.get("t_bu_sweep_us", v);
    plan.buDelays.clear();
    for (double x : v) {
      positive(x, "experiment.t_bu_sweep_us");
      plan.buDelays.push_back(us(x));
    }
  }
  o.get("pd_to_bu_ratio", plan.pdToBuRatio);
  o.get("overhead_augmentation", plan.overheadAugmentation);
  o.get("cost", plan.runCost);
  o.get("cost_rt_ratio", plan.costRtRatio);
  o.get("augmentations", plan.augmentations);
  o.finish();

  if (plan.seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
  if (plan.algorithms.empty()) throw ConfigError("experiment.algorithms must not be empty");
  if (plan.runFeasibility && plan.feasibilityRtRatios.empty()) throw ConfigError("experiment.feasibility_rt_ratios is empty");
  if (plan.runOverhead && (plan.overheadRtRatios.empty() || plan.buDelays.empty())) {
    throw ConfigError("experiment overhead sweep values must not be empty");
  }
  if (plan.runCost && plan.augmentations.empty()) throw ConfigError("experiment.augmentations is empty");
  for (double r : plan.feasibilityRtRatios) ratio(r, "experiment.feasibility_rt_ratios");
  for (double r : plan.overheadRtRatios) ratio(r, "experiment.overhead_rt_ratios");
  ratio(plan.costRtRatio, "experiment.cost_rt_ratio");
  for (double a : plan.augmentations) positive(a, "experiment.augmentations");
  positive(plan.pdToBuRatio, "experiment.pd_to_bu_ratio");
  positive(plan.overheadAugmentation, "experiment.overhead_augmentation");
  positive(static_cast<double>(plan.search.start), "experiment.search_start_cpu");
  if (plan.search.limit < plan.search.start) throw ConfigError("experiment.search_limit_cpu is below search_start_cpu");
}

}  // namespace

Config parse_config(const json& j, const fs::path& baseDir) {
  Config c;
  Obj o(j, "");
  int version = 0;
  o.get("schema_version", version);
  if (version != kConfigSchemaVersion) {
    throw ConfigError("schema_version must be " + std::to_string(kConfigSchemaVersion));
  }
  if (o.has("topology")) c.tree = parse_tree(o.at("topology"));

  if (o.has("classes")) {
    const json& cj = o.at("classes");
    if (cj.is_string()) {
      const fs::path p = resolve(baseDir, cj.get<std::string>());
      std::ifstream in(p);
      if (!in) throw ConfigError("class table not found: " + p.string());
      try {
        c.classes = parse_class_table(in);
      } catch (const ParseError& e) {
        throw ConfigError(p.string() + ": " + e.what());
      }
      c.classesPath = p;
    } else if (cj.is_array()) {
      std::vector<ServiceClass> v;
      for (std::size_t i = 0; i < cj.size(); ++i) v.push_back(parse_class(cj[i], i));
      try {
        c.classes = ClassTable(std::move(v));
      } catch (const ParseError& e) {
        throw ConfigError(std::string("classes: ") + e.what());
      }
    } else {
      throw ConfigError("classes must be a file path or a list of classes");
    }
  }

  if (o.has("workload")) {
    Obj w(o.at("workload"), "workload");
    if (w.has("trace")) {
      const fs::path p = resolve(baseDir, w.at("trace").get<std::string>());
      if (!fs::exists(p)) throw ConfigError("trace file not found: " + p.string());
      c.tracePath = p;
    }
    if (w.has("synth")) c.synth = parse_synth(w.at("synth"));
    w.finish();
  }
  if (!c.classes.find(c.synth.rtClass) || !c.classes.find(c.synth.nonRtClass)) {
    throw ConfigError("workload.synth refers to a class missing from the class table");
  }

  if (o.has("protocol")) {
    Obj p(o.at("protocol"), "protocol");
    double buUs = to_us(c.sim.protocol.buDelay), pdUs = to_us(c.sim.protocol.pdDelay);
    double fS = sim_to_seconds(c.sim.protocol.fModePeriod);
    p.get("t_bu_us", buUs);
    p.get("t_pd_us", pdUs);
    p.get("f_mode_period_s", fS);
    p.get("release_on_critical", c.sim.protocol.releaseOnCritical);
    p.get("max_messages_per_invocation", c.sim.maxMessagesPerInvocation);
    p.get("audit_every_event", c.sim.auditEveryEvent);
    p.get("record_timeline", c.sim.recordTimeline);
    p.finish();
    positive(buUs, "protocol.t_bu_us");
    positive(pdUs, "protocol.t_pd_us");
    positive(fS, "protocol.f_mode_period_s");
    positive(static_cast<double>(c.sim.maxMessagesPerInvocation), "protocol.max_messages_per_invocation");
    c.sim.protocol.buDelay = us(buUs);
    c.sim.protocol.pdDelay = us(pdUs);
    c.sim.protocol.fModePeriod = seconds_to_sim(fS);
  }
  if (o.has("delay")) {
    Obj d(o.at("delay"), "delay");
    double propUs = to_us(c.sim.delay.propagation), procUs = to_us(c.sim.delay.processing);
    d.get("bandwidth_bps", c.sim.delay.bandwidthBitsPerSecond);
    d.get("propagation_us", propUs);
    d.get("processing_us", procUs);
    d.finish();
    positive(static_cast<double>(c.sim.delay.bandwidthBitsPerSecond), "delay.bandwidth_bps");
    non_negative(propUs, "delay.propagation_us");
    non_negative(procUs, "delay.processing_us");
    c.sim.delay.propagation = us(propUs);
    c.sim.delay.processing = us(procUs);
  }
  if (o.has("costs")) {
    Obj k(o.at("costs"), "costs");
    k.get("migration", c.sim.costs.migrationCost);
    k.finish();
    non_negative(static_cast<double>(c.sim.costs.migrationCost), "costs.migration");
  }
  c.plan.synth = c.synth;
  if (o.has("experiment")) parse_experiment(o.at("experiment"), c.plan);
  o.finish();
  return c;
}

Config load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config file not found: " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return parse_config(j, fs::absolute(file).parent_path());
}

json to_json(const Config& c) {
  json topo;
  topo["height"] = c.tree.height;
  topo["cpu_per_leaf"] = c.tree.cpuPerLeaf;
  if (c.tree.grid) {
    json g{{"cols", c.tree.grid->cols}, {"rows", c.tree.grid->rows}, {"splits", c.tree.grid->splits}};
    if (!c.tree.grid->poaCells.empty()) {
      json cells = json::array();
      for (const auto& p : c.tree.grid->poaCells) cells.push_back({p.col, p.row});
      g["poa_cells"] = cells;
    }
    topo["grid"] = g;
  } else {
    topo["fanouts"] = c.tree.fanouts;
  }
  if (!c.tree.capacityOverrides.empty()) {
    json ov = json::object();
    for (const auto& [id, cap] : c.tree.capacityOverrides) ov[std::to_string(id)] = cap;
    topo["capacity_overrides"] = ov;
  }

  json classes = json::array();
  for (const auto& k : c.classes.classes()) classes.push_back(class_json(k));

  json workload{{"synth", synth_json(c.synth)}};
  if (c.tracePath) workload["trace"] = c.tracePath->string();

  json bu = json::array();
  for (SimTime t : c.plan.buDelays) bu.push_back(to_us(t));
  json algs = json::array();
  for (Algorithm a : c.plan.algorithms) algs.push_back(to_string(a));

  return json{
      {"schema_version", kConfigSchemaVersion},
      {"topology", topo},
      {"classes", classes},
      {"workload", workload},
      {"protocol",
       {{"t_bu_us", to_us(c.sim.protocol.buDelay)},
        {"t_pd_us", to_us(c.sim.protocol.pdDelay)},
        {"f_mode_period_s", sim_to_seconds(c.sim.protocol.fModePeriod)},
        {"release_on_critical", c.sim.protocol.releaseOnCritical},
        {"max_messages_per_invocation", c.sim.maxMessagesPerInvocation},
        {"audit_every_event", c.sim.auditEveryEvent},
        {"record_timeline", c.sim.recordTimeline}}},
      {"delay",
       {{"bandwidth_bps", c.sim.delay.bandwidthBitsPerSecond},
        {"propagation_us", to_us(c.sim.delay.propagation)},
        {"processing_us", to_us(c.sim.delay.processing)}}},
      {"costs", {{"migration", c.sim.costs.migrationCost}}},
      {"experiment",
       {{"seeds", c.plan.seeds},
        {"algorithms", algs},
        {"feasibility", c.plan.runFeasibility},
        {"feasibility_rt_ratios", c.plan.feasibilityRtRatios},
        {"search_start_cpu", c.plan.search.start},
        {"search_limit_cpu", c.plan.search.limit},
        {"overhead", c.plan.runOverhead},
        {"overhead_rt_ratios", c.plan.overheadRtRatios},
        {"t_bu_sweep_us", bu},
        {"pd_to_bu_ratio", c.plan.pdToBuRatio},
        {"overhead_augmentation", c.plan.overheadAugmentation},
        {"cost", c.plan.runCost},
        {"cost_rt_ratio", c.plan.costRtRatio},
        {"augmentations", c.plan.augmentations}}},
  };
}

bool same_config(const Config& a, const Config& b) { return to_json(a) == to_json(b); }

}  // namespace dapp
