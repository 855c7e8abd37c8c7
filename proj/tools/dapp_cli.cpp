#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dapp/config.hpp"

#ifndef DAPP_VERSION
#define DAPP_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dapp;

namespace {

enum Exit { kOk = 0, kConfigError = 1, kDiverged = 2, kFailed = 3 };

struct Options {
  std::string config;
  std::string trace;
  std::string out;
  std::string snapshot;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> algorithms;
  std::vector<std::string> sweeps;
  bool echo = false;
  bool dumpTopology = false;
};

Config load_or_default(const Options& o) {
  Config c = o.config.empty() ? Config{} : load_config(o.config);
  if (!o.trace.empty()) {
    const fs::path p = fs::absolute(o.trace);
    if (!fs::exists(p)) throw ConfigError("trace file not found: " + p.string());
    c.tracePath = p;
  }
  if (!o.seeds.empty()) {
    c.synth.seed = o.seeds.front();
    c.plan.synth.seed = o.seeds.front();
    c.plan.seeds = o.seeds;
  }
  if (!o.algorithms.empty()) {
    c.plan.algorithms.clear();
    for (const auto& a : o.algorithms) {
      try {
        c.plan.algorithms.push_back(parse_algorithm(a));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("--algorithms: ") + e.what());
      }
    }
  }
  return c;
}

std::vector<TraceEvent> load_trace(const Config& c, const Topology& topo) {
  if (!c.tracePath) return synth_trace(c.synth, topo, c.classes);
  std::ifstream in(*c.tracePath);
  if (!in) throw ConfigError("cannot open trace " + c.tracePath->string());
  try {
    return parse_trace(in, topo, c.classes);
  } catch (const ParseError& e) {
    throw ConfigError(c.tracePath->string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory " + p.string() + ": " + ec.message());
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << body;
}

int cmd_simulate(const Options& o) {
  const Config c = load_or_default(o);
  const RunContext ctx = c.context();
  const auto trace = load_trace(c, ctx.topo);
  // Simulating a single algorithm is the common case, so DAPP-ECC alone
  // unless --algorithms asks for more.
  std::vector<Algorithm> algs = o.algorithms.empty() ? std::vector<Algorithm>{Algorithm::DAPP} : c.plan.algorithms;
  const fs::path out = o.out.empty() ? fs::path("runs") : fs::path(o.out);
  ensure_dir(out);

  int code = kOk;
  for (Algorithm a : algs) {
    const RunStats st = run_algorithm(a, trace, ctx.topo, ctx);
    std::string name = to_string(a);
    write_file(out / (name + ".json"), to_json_string(st) + "\n");
    if (c.sim.recordTimeline) {
      std::ofstream tl(out / (name + "_timeline.csv"));
      write_timeline_csv(tl, st.timeline);
    }
    std::cout << name << ": failures=" << st.failures << " migrations=" << st.migrations
              << " aggregate_cost=" << st.aggregate.total << " bytes_per_request=" << st.bytesPerRequest
              << (st.diverged ? " DIVERGED" : "") << "\n";
    if (st.diverged) {
      code = kDiverged;
    } else if (!st.success() && code == kOk) {
      code = kFailed;
    }
  }
  return code;
}

int cmd_experiment(const Options& o) {
  Config c = load_or_default(o);
  if (!o.sweeps.empty()) {
    c.plan.runFeasibility = c.plan.runOverhead = c.plan.runCost = false;
    for (const auto& s : o.sweeps) {
      if (s == "all") {
        c.plan.runFeasibility = c.plan.runOverhead = c.plan.runCost = true;
      } else if (s == "feasibility" || s == "figure2") {
        c.plan.runFeasibility = true;
      } else if (s == "overhead" || s == "figure3") {
        c.plan.runOverhead = true;
      } else if (s == "cost" || s == "costs") {
        c.plan.runCost = true;
      } else {
        throw ConfigError("--sweep: unknown sweep '" + s + "'");
      }
    }
  }
  const RunContext ctx = c.context();
  const fs::path out = o.out.empty() ? fs::path("results") : fs::path(o.out);
  ensure_dir(out);

  // Each file is written even when its sweep is skipped, so the output
  // directory always has the same shape.
  std::vector<Figure2Row> f2;
  std::vector<Figure3Row> f3;
  std::vector<CostRow> costs;
  if (c.plan.runFeasibility) f2 = feasibility_study(c.plan, ctx);
  if (c.plan.runOverhead) f3 = overhead_study(c.plan, ctx);
  if (c.plan.runCost) costs = cost_study(c.plan, ctx);

  std::ostringstream s2, s3, sc;
  write_figure2_csv(s2, f2);
  write_figure3_csv(s3, f3);
  write_costs_csv(sc, costs);
  write_file(out / "figure2.csv", s2.str());
  write_file(out / "figure3.csv", s3.str());
  write_file(out / "costs.csv", sc.str());

  json meta{{"version", DAPP_VERSION},
            {"config_schema_version", kConfigSchemaVersion},
            {"seeds", c.plan.seeds},
            {"config", to_json(c)},
            {"sweeps",
             {{"feasibility", c.plan.runFeasibility}, {"overhead", c.plan.runOverhead}, {"cost", c.plan.runCost}}}};
  write_file(out / "meta.json", meta.dump(2) + "\n");
  std::cout << "wrote " << (out / "figure2.csv").string() << ", figure3.csv, costs.csv, meta.json\n";

  for (const auto& r : f3) {
    if (r.diverged) return kDiverged;
  }
  // Failures at a sweep point are data, not errors; only an LBound
  // relaxation that cannot be solved makes the experiment itself fail.
  for (const auto& r : costs) {
    if (r.lpInfeasible && r.algorithm == to_string(Algorithm::LBound)) return kFailed;
  }
  return kOk;
}

int cmd_gen_trace(const Options& o) {
  const Config c = load_or_default(o);
  const Topology topo = build_tree(c.tree);
  const auto trace = synth_trace(c.synth, topo, c.classes);
  if (o.out.empty() || o.out == "-") {
    write_trace(std::cout, trace);
  } else {
    if (fs::path(o.out).has_parent_path()) ensure_dir(fs::path(o.out).parent_path());
    std::ofstream f(o.out);
    if (!f) throw ConfigError("cannot write " + o.out);
    write_trace(f, trace);
  }
  return kOk;
}

int cmd_validate(const Options& o) {
  if (o.config.empty()) throw ConfigError("validate-config needs --config");
  const Config c = load_or_default(o);
  const Topology topo = build_tree(c.tree);
  if (c.tracePath) (void)load_trace(c, topo);
  if (o.dumpTopology) std::cout << topo.dump();
  if (o.echo) {
    std::cout << to_json(c).dump(2) << "\n";
  } else {
    std::cout << "ok: " << o.config << " (" << topo.size() << " datacenters, " << topo.leaves().size() << " PoAs, "
              << c.classes.classes().size() << " classes)\n";
  }
  return kOk;
}

// Snapshot file: {"cpu_per_leaf": n (optional), "requests": [{"id", "class",
// "poa", "place" (optional)}]}. Topology and classes come from --config.
int cmd_lp_solve(const Options& o) {
  const Config c = load_or_default(o);
  std::ifstream in(o.snapshot);
  if (!in) throw ConfigError("snapshot file not found: " + o.snapshot);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(o.snapshot + ": " + e.what());
  }
  TreeSpec spec = c.tree;
  Snapshot snap;
  try {
    if (j.contains("cpu_per_leaf")) spec.cpuPerLeaf = j.at("cpu_per_leaf").get<Cpu>();
    const Topology topo = build_tree(spec);
    std::uint64_t seq = 0;
    for (const auto& rj : j.at("requests")) {
      Request r;
      r.id = RequestId(rj.at("id").get<std::uint16_t>());
      r.cls = c.classes.by_name(rj.at("class").get<std::string>());
      r.poa = DatacenterId(rj.at("poa").get<std::uint16_t>());
      if (r.poa.value == 0 || r.poa.value > topo.size() || !topo.is_leaf(r.poa)) {
        throw ConfigError("request " + std::to_string(r.id.value) + ": poa is not a leaf");
      }
      r.arrivalSeq = seq++;
      if (rj.contains("place") && !rj.at("place").is_null()) {
        r.curPlace = DatacenterId(rj.at("place").get<std::uint16_t>());
        r.state = RequestState::Placed;
      }
      snap.requests.push_back(r);
    }
    const LboundResult res = lbound_cost(topo, c.sim.costs, snap);
    std::cout << "status " << to_string(res.status) << "\n";
    if (res.status != LpStatus::Optimal) return kFailed;
    std::cout << "objective " << res.objective << "\n";
    return kOk;
  } catch (const json::exception& e) {
    throw ConfigError(o.snapshot + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(o.snapshot + ": " + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(o.snapshot + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DAPP-ECC placement simulator and baselines"};
  app.set_version_flag("--version", DAPP_VERSION);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seeds, "top-level seed(s); overrides the config");
  };

  auto* sim = app.add_subcommand("simulate", "run algorithms over one trace and write RunStats JSON");
  common(sim);
  sim->add_option("--trace", o.trace, "trace CSV (default: synthetic trace from the config)");
  sim->add_option("--out", o.out, "output directory (default runs/)");
  sim->add_option("--algorithms", o.algorithms, "dapp, ffit, bupu, lbound")->delimiter(',');

  auto* exp = app.add_subcommand("experiment", "run the sweeps and write figure2/figure3/costs CSVs");
  common(exp);
  exp->add_option("--out", o.out, "output directory (default results/)");
  exp->add_option("--algorithms", o.algorithms, "algorithms for the feasibility and cost sweeps")->delimiter(',');
  exp->add_option("--sweep", o.sweeps, "all, feasibility, overhead, cost")->delimiter(',');

  auto* gen = app.add_subcommand("gen-trace", "write the synthetic trace of the config");
  common(gen);
  gen->add_option("--out", o.out, "trace CSV path (default stdout)");

  auto* val = app.add_subcommand("validate-config", "parse and check a config");
  common(val);
  val->add_option("--trace", o.trace, "also parse this trace");
  val->add_flag("--echo", o.echo, "print the normalized config");
  val->add_flag("--dump-topology", o.dumpTopology, "print the adjacency listing");

  auto* lp = app.add_subcommand("lp-solve", "solve the LBound relaxation of a snapshot");
  common(lp);
  lp->add_option("--snapshot", o.snapshot, "snapshot JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*exp) return cmd_experiment(o);
    if (*gen) return cmd_gen_trace(o);
    if (*val) return cmd_validate(o);
    if (*lp) return cmd_lp_solve(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
