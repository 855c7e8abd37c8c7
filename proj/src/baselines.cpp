#include "dapp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "dapp/log.hpp"

namespace dapp {

namespace {

std::size_t idx(DatacenterId s) { return static_cast<std::size_t>(s.value) - 1u; }

Cpu beta_at(const Topology& t, const ServiceClass& c, DatacenterId s) {
  return c.betaPerLevel[static_cast<std::size_t>(t.level(s))];
}

Cost comp_at(const Topology& t, const ServiceClass& c, DatacenterId s) {
  return c.compCostPerLevel[static_cast<std::size_t>(t.level(s))];
}

DatacenterId top_of(const Topology& t, const Request& r) { return t.feasible_prefix(r.poa, r.cls.maxLevels).back(); }

// Same ordering as the protocol's Sort(): most urgent first, then the
// smaller footprint, then arrival order.
void sort_at(const Topology& t, DatacenterId s, std::vector<const Request*>& v) {
  auto key = [&](const Request* r) {
    return std::make_tuple(t.level(top_of(t, *r)) - t.level(s), beta_at(t, r->cls, s), r->arrivalSeq, r->id);
  };
  std::stable_sort(v.begin(), v.end(), [&](const Request* a, const Request* b) { return key(a) < key(b); });
}

// A critical MS keeps its old resources until it has been re-placed, as in
// the protocol, so its current place stays charged for the whole epoch.
std::vector<Cpu> residuals(const Topology& t, const Snapshot& snap) {
  std::vector<Cpu> res(t.size());
  for (const auto& n : t.nodes()) res[idx(n.id)] = n.capacity;
  for (const Request& r : snap.requests) {
    if (r.curPlace) res[idx(*r.curPlace)] -= beta_at(t, r.cls, *r.curPlace);
  }
  return res;
}

std::vector<const Request*> handled_in_arrival_order(const Snapshot& snap) {
  std::vector<const Request*> out;
  for (const Request& r : snap.requests) {
    if (snap.toHandle.contains(r.id)) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(), [](const Request* a, const Request* b) {
    return std::tie(a->arrivalSeq, a->id) < std::tie(b->arrivalSeq, b->id);
  });
  return out;
}

class BupuPass {
 public:
  BupuPass(const Topology& t, const Snapshot& snap) : t_(t), snap_(snap), resid_(residuals(t, snap)), u_(t.size()) {
    for (const Request& r : snap.requests) {
      if (snap.toHandle.contains(r.id)) {
        u_[idx(r.poa)].push_back(&r);
        handled_.insert(r.id);
      } else if (r.curPlace) {
        y_[r.id] = *r.curPlace;
      }
    }
  }

  Decisions run() {
    for (const auto& n : t_.nodes()) process(n.id, true);
    push_up();
    Decisions d;
    d.failed = failed_;
    for (RequestId r : handled_) {
      if (auto it = y_.find(r); it != y_.end()) d.placement[r] = it->second;
    }
    d.handled = handled_;
    return d;
  }

  int reshuffles() const { return reshuffles_; }

 private:
  void process(DatacenterId s, bool mayReshuffle) {
    std::vector<const Request*> work;
    work.swap(u_[idx(s)]);
    sort_at(t_, s, work);
    std::vector<const Request*> keep;
    for (std::size_t i = 0; i < work.size(); ++i) {
      const Request* r = work[i];
      const Cpu b = beta_at(t_, r->cls, s);
      if (resid_[idx(s)] >= b) {
        resid_[idx(s)] -= b;
        y_[r->id] = s;
      } else if (top_of(t_, *r) == s) {
        if (mayReshuffle) {
          std::vector<const Request*> pending(keep);
          pending.insert(pending.end(), work.begin() + static_cast<std::ptrdiff_t>(i), work.end());
          reshuffle(s, pending);
          return;
        }
        failed_.push_back(r->id);
      } else {
        keep.push_back(r);
      }
    }
    if (const auto p = t_.node(s).parent) {
      auto& up = u_[idx(*p)];
      up.insert(up.end(), keep.begin(), keep.end());
    }
  }

  // Re-place everything held in the subtree of s, plus what is still
  // unassigned at s, from scratch. A second failure inside is final.
  void reshuffle(DatacenterId s, const std::vector<const Request*>& pending) {
    ++reshuffles_;
    std::vector<DatacenterId> sub{s};
    for (std::size_t i = 0; i < sub.size(); ++i) {
      for (DatacenterId c : t_.node(sub[i]).children) sub.push_back(c);
    }
    std::sort(sub.begin(), sub.end());
    for (const Request& r : snap_.requests) {
      auto it = y_.find(r.id);
      if (it == y_.end()) continue;
      if (it->second != s && !t_.is_ancestor(s, it->second)) continue;
      resid_[idx(it->second)] += beta_at(t_, r.cls, it->second);
      y_.erase(it);
      handled_.insert(r.id);
      u_[idx(r.poa)].push_back(&r);
    }
    for (const Request* r : pending) u_[idx(r->poa)].push_back(r);
    for (DatacenterId n : sub) process(n, false);
  }

  void push_up() {
    const auto nodes = t_.nodes();
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
      const DatacenterId s = it->id;
      std::vector<const Request*> cands;
      for (const Request& r : snap_.requests) {
        if (!handled_.contains(r.id)) continue;
        auto y = y_.find(r.id);
        if (y == y_.end() || !t_.is_ancestor(s, y->second)) continue;
        if (!delay_feasible(t_, r, s)) continue;
        cands.push_back(&r);
      }
      sort_at(t_, s, cands);
      for (const Request* r : cands) {
        const Cpu b = beta_at(t_, r->cls, s);
        if (resid_[idx(s)] < b) continue;
        DatacenterId& cur = y_.at(r->id);
        resid_[idx(cur)] += beta_at(t_, r->cls, cur);
        resid_[idx(s)] -= b;
        cur = s;
      }
    }
  }

  const Topology& t_;
  const Snapshot& snap_;
  std::vector<Cpu> resid_;
  std::vector<std::vector<const Request*>> u_;
  std::map<RequestId, DatacenterId> y_;
  std::set<RequestId> handled_;
  std::vector<RequestId> failed_;
  int reshuffles_ = 0;
};

using GroupKey = std::pair<ClassId, std::uint16_t>;

}  // namespace

Decisions ffit_place(const Topology& t, const Snapshot& snap) {
  std::vector<Cpu> resid = residuals(t, snap);
  Decisions d;
  for (const Request* r : handled_in_arrival_order(snap)) {
    d.handled.insert(r->id);
    bool done = false;
    for (DatacenterId s : t.feasible_prefix(r->poa, r->cls.maxLevels)) {
      const Cpu b = beta_at(t, r->cls, s);
      if (resid[idx(s)] >= b) {
        resid[idx(s)] -= b;
        d.placement[r->id] = s;
        done = true;
        break;
      }
    }
    if (!done) d.failed.push_back(r->id);
  }
  return d;
}

Decisions bupu_place(const Topology& t, const Snapshot& snap) { return BupuPass(t, snap).run(); }

LbSolution solve_lbound_groups(const Topology& t, const CostParams& costs, const std::vector<LbGroup>& groups) {
  LinearProgram lp;
  SimplexOptions opt;
  const double psi = static_cast<double>(costs.migrationCost);
  std::vector<std::vector<std::pair<int, double>>> capRows(t.size());
  struct Col {
    std::size_t group;
    DatacenterId s;
    bool stay;
  };
  std::vector<Col> cols;
  double constant = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const LbGroup& grp = groups[g];
    double existing = 0;
    for (const auto& [s, m] : grp.mass) existing += m;
    constant -= psi * std::max(0.0, grp.count - existing);
    std::vector<std::pair<int, double>> row;
    for (DatacenterId s : t.feasible_prefix(grp.poa, grp.cls->maxLevels)) {
      const double c = static_cast<double>(comp_at(t, *grp.cls, s));
      const double b = static_cast<double>(beta_at(t, *grp.cls, s));
      if (auto m = grp.mass.find(s); m != grp.mass.end() && m->second > 0) {
        const int j = lp.add_variable(c, 0.0, m->second);
        opt.startAtUpper.resize(static_cast<std::size_t>(j) + 1, false);
        opt.startAtUpper[static_cast<std::size_t>(j)] = true;
        row.emplace_back(j, 1.0);
        capRows[idx(s)].emplace_back(j, b);
        cols.push_back({g, s, true});
      }
      const int j = lp.add_variable(c + psi);
      row.emplace_back(j, 1.0);
      capRows[idx(s)].emplace_back(j, b);
      cols.push_back({g, s, false});
    }
    lp.add_row(std::move(row), LinearProgram::Sense::EQ, grp.count);
  }
  for (const auto& n : t.nodes()) {
    if (!capRows[idx(n.id)].empty()) {
      lp.add_row(std::move(capRows[idx(n.id)]), LinearProgram::Sense::LE, static_cast<double>(n.capacity));
    }
  }
  opt.startAtUpper.resize(static_cast<std::size_t>(lp.num_variables()), false);
  const LpResult res = simplex_solve(lp, opt);

  LbSolution out;
  out.status = res.status;
  if (res.status != LpStatus::Optimal) return out;
  out.objective = res.objective + constant;
  out.y.resize(groups.size());
  double moved = 0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const double v = res.x[j];
    if (v <= 1e-12) continue;
    out.y[cols[j].group][cols[j].s] += v;
    if (!cols[j].stay) moved += v;
  }
  double fresh = 0;
  for (const LbGroup& g : groups) {
    double existing = 0;
    for (const auto& [s, m] : g.mass) existing += m;
    fresh += std::max(0.0, g.count - existing);
  }
  out.migratedMass = std::max(0.0, moved - fresh);
  return out;
}

LboundResult lbound_cost(const Topology& t, const CostParams& costs, const Snapshot& snap) {
  std::map<GroupKey, LbGroup> byKey;
  for (const Request& r : snap.requests) {
    LbGroup& g = byKey[{r.cls.id, r.poa.value}];
    g.cls = &r.cls;
    g.poa = r.poa;
    g.count += 1;
    if (r.curPlace) g.mass[*r.curPlace] += 1;
  }
  std::vector<LbGroup> groups;
  for (auto& [k, g] : byKey) groups.push_back(std::move(g));
  const LbSolution s = solve_lbound_groups(t, costs, groups);
  return {s.status, s.objective};
}

namespace {

struct DemandGroup {
  const ServiceClass* cls;
  DatacenterId poa;
  double count;
};

// Lower bound on C_cpu: whatever must live inside a subtree needs at least
// its cheapest footprint there.
double hall_bound(const Topology& t, const std::vector<DemandGroup>& groups) {
  std::vector<double> demand(t.size(), 0.0), weight(t.size(), 0.0);
  for (const DemandGroup& g : groups) {
    const auto prefix = t.feasible_prefix(g.poa, g.cls->maxLevels);
    Cpu b = beta_at(t, *g.cls, prefix.front());
    for (DatacenterId s : prefix) b = std::min(b, beta_at(t, *g.cls, s));
    demand[idx(prefix.back())] += g.count * static_cast<double>(b);
  }
  for (const auto& n : t.nodes()) weight[idx(n.id)] = n.level + 1;
  // Children have smaller ids, so a single ascending sweep accumulates subtrees.
  double best = 0;
  for (const auto& n : t.nodes()) {
    const std::size_t i = idx(n.id);
    if (weight[i] > 0) best = std::max(best, demand[i] / weight[i]);
    if (n.parent) {
      demand[idx(*n.parent)] += demand[i];
      weight[idx(*n.parent)] += weight[i];
    }
  }
  return best;
}

double min_cpu_lp(const Topology& t, const std::vector<DemandGroup>& groups, LpStatus& status) {
  LinearProgram lp;
  const int c = lp.add_variable(1.0);
  std::vector<std::vector<std::pair<int, double>>> capRows(t.size());
  for (const DemandGroup& g : groups) {
    std::vector<std::pair<int, double>> row;
    for (DatacenterId s : t.feasible_prefix(g.poa, g.cls->maxLevels)) {
      const int j = lp.add_variable(0.0);
      row.emplace_back(j, 1.0);
      capRows[idx(s)].emplace_back(j, static_cast<double>(beta_at(t, *g.cls, s)));
    }
    lp.add_row(std::move(row), LinearProgram::Sense::EQ, g.count);
  }
  for (const auto& n : t.nodes()) {
    auto& row = capRows[idx(n.id)];
    if (row.empty()) continue;
    row.emplace_back(c, -static_cast<double>(n.level + 1));
    lp.add_row(std::move(row), LinearProgram::Sense::LE, 0.0);
  }
  const LpResult res = simplex_solve(lp);
  status = res.status;
  return res.status == LpStatus::Optimal ? res.objective : 0.0;
}

std::vector<DemandGroup> to_demand(const std::vector<LbGroup>& groups) {
  std::vector<DemandGroup> out;
  for (const LbGroup& g : groups) {
    if (g.count > 0) out.push_back({g.cls, g.poa, g.count});
  }
  return out;
}

}  // namespace

double lbound_min_cpu_groups(const Topology& t, const std::vector<LbGroup>& groups, LpStatus* status) {
  LpStatus st = LpStatus::Optimal;
  const auto demand = to_demand(groups);
  const double v = demand.empty() ? 0.0 : min_cpu_lp(t, demand, st);
  if (status) *status = st;
  return v;
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::DAPP: return "DAPP-ECC";
    case Algorithm::FFit: return "F-Fit";
    case Algorithm::BUPU: return "BUPU";
    case Algorithm::LBound: return "LBound";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  std::string k;
  for (char ch : s) {
    if (ch != '-' && ch != '_') k += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (k == "dapp" || k == "dappecc") return Algorithm::DAPP;
  if (k == "ffit") return Algorithm::FFit;
  if (k == "bupu") return Algorithm::BUPU;
  if (k == "lbound" || k == "lb") return Algorithm::LBound;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

namespace {

// Walks the trace one second at a time. Events stamped in (k-1, k] seconds
// are applied at epoch k; samples are taken at k + 0.5 s.
class EpochClock {
 public:
  explicit EpochClock(const std::vector<TraceEvent>& trace) : trace_(trace) {
    SimTime last = 0;
    for (const auto& e : trace) last = std::max(last, e.time);
    lastEpoch_ = trace.empty() ? -1 : (last + kNanosPerSecond - 1) / kNanosPerSecond;
    samples_ = trace.empty() ? 0 : last / kNanosPerSecond + 1;
  }

  std::int64_t last_epoch() const { return lastEpoch_; }
  bool sampled(std::int64_t k) const { return k < samples_; }

  template <class F>
  void apply_until(std::int64_t k, F&& f) {
    while (next_ < trace_.size() && trace_[next_].time <= k * kNanosPerSecond) f(trace_[next_++]);
  }

 private:
  const std::vector<TraceEvent>& trace_;
  std::size_t next_ = 0;
  std::int64_t lastEpoch_ = -1;
  std::int64_t samples_ = 0;
};

template <class Place>
RunStats run_epochs(const std::vector<TraceEvent>& trace, const Topology& t, const ClassTable& classes,
                    const EpochConfig& cfg, Algorithm alg, Place place) {
  RunStats st;
  st.algorithm = to_string(alg);
  std::map<RequestId, Request> live;
  std::set<RequestId> fresh;
  std::set<RequestId> gone;
  std::uint64_t nextArrival = 0;
  EpochClock clock(trace);

  auto record = [&](std::int64_t k, RequestId r, std::optional<DatacenterId> from, std::optional<DatacenterId> to,
                    const char* why) {
    if (!cfg.recordTimeline) return;
    st.timeline.push_back({k * kNanosPerSecond, r, from.value_or(DatacenterId{}), to.value_or(DatacenterId{}), why});
  };

  for (std::int64_t k = 0; k <= clock.last_epoch(); ++k) {
    clock.apply_until(k, [&](const TraceEvent& e) {
      if (gone.contains(e.user)) return;
      switch (e.kind) {
        case TraceKind::Arrive: {
          Request r;
          r.id = e.user;
          r.cls = classes.by_name(e.className);
          r.poa = e.poa;
          r.arrivalSeq = nextArrival++;
          live[e.user] = r;
          fresh.insert(e.user);
          st.newRequests += 1;
          break;
        }
        case TraceKind::Move:
          if (auto it = live.find(e.user); it != live.end()) it->second.poa = e.poa;
          break;
        case TraceKind::Depart:
          if (auto it = live.find(e.user); it != live.end()) record(k, e.user, it->second.curPlace, std::nullopt, "departed");
          live.erase(e.user);
          fresh.erase(e.user);
          gone.insert(e.user);
          break;
      }
    });

    Snapshot snap;
    for (const auto& [id, r] : live) {
      snap.requests.push_back(r);
      if (fresh.contains(id)) {
        snap.toHandle.insert(id);
      } else if (r.curPlace && !delay_feasible(t, r, *r.curPlace)) {
        snap.toHandle.insert(id);
        st.criticalRequests += 1;
      }
    }
    fresh.clear();

    if (!snap.toHandle.empty()) {
      st.invocations += 1;
      const Decisions d = place(t, snap);
      EpochRow row;
      row.epoch = k;
      row.algorithm = st.algorithm;
      PlacementSnapshot cs;
      std::set<RequestId> decided;
      for (const auto& [id, to] : d.placement) {
        Request& r = live.at(id);
        if (r.curPlace) cs.previous[id] = *r.curPlace;
        cs.assigned[id] = to;
        cs.requests.push_back(r);
        decided.insert(id);
        if (r.curPlace && *r.curPlace == to) continue;
        row.placements += 1;
        st.placements += 1;
        if (r.curPlace) {
          row.migrations += 1;
          st.migrations += 1;
          st.aggregate.migrations += 1;
        }
        record(k, id, r.curPlace, to, r.curPlace ? "migrate" : "new");
        r.curPlace = to;
        r.state = RequestState::Placed;
      }
      for (RequestId id : d.failed) {
        st.failures += 1;
        record(k, id, live.at(id).curPlace, std::nullopt, "failed");
        live.erase(id);
        gone.insert(id);
      }
      const CostBreakdown c = objective(t, cfg.costs, cs, decided);
      st.eventCost += c;
      row.objective = static_cast<double>(c.total);
      row.status = d.failed.empty() ? "ok" : "failed";
      st.epochs.push_back(row);
    }

    // Every epoch leaves a feasible placement behind; check it.
    PlacementSnapshot fs;
    for (const auto& [id, r] : live) {
      fs.requests.push_back(r);
      if (r.curPlace) fs.assigned[id] = *r.curPlace;
    }
    st.feasibilityChecks += 1;
    const FeasibilityReport rep = check_feasible(t, fs);
    if (!rep.feasible) {
      st.feasibilityViolations += 1;
      for (const auto& m : rep.messages) {
        if (st.auditMessages.size() < 20) st.auditMessages.push_back("epoch " + std::to_string(k) + ": " + m);
      }
    }

    if (clock.sampled(k)) {
      Cost sum = 0;
      for (const auto& [id, r] : live) {
        if (r.curPlace) sum += comp_at(t, r.cls, *r.curPlace);
      }
      st.aggregate.computationalCost += static_cast<double>(sum);
      st.aggregate.samples += 1;
    }
    st.endTime = k * kNanosPerSecond;
  }
  st.aggregate.migrationCost = static_cast<double>(st.aggregate.migrations * cfg.costs.migrationCost);
  st.aggregate.total = st.aggregate.migrationCost + st.aggregate.computationalCost;
  return st;
}

}  // namespace

RunStats run_ffit(const std::vector<TraceEvent>& trace, const Topology& t, const ClassTable& classes,
                  const EpochConfig& cfg) {
  return run_epochs(trace, t, classes, cfg, Algorithm::FFit, ffit_place);
}

RunStats run_bupu(const std::vector<TraceEvent>& trace, const Topology& t, const ClassTable& classes,
                  const EpochConfig& cfg) {
  std::int64_t reshuffles = 0;
  RunStats st = run_epochs(trace, t, classes, cfg, Algorithm::BUPU, [&](const Topology& tp, const Snapshot& s) {
    BupuPass pass(tp, s);
    Decisions d = pass.run();
    reshuffles += pass.reshuffles();
    return d;
  });
  st.diagnostics["reshuffles"] = reshuffles;
  return st;
}

RunStats run_lbound(const std::vector<TraceEvent>& trace, const Topology& t, const ClassTable& classes,
                    const EpochConfig& cfg) {
  RunStats st;
  st.algorithm = to_string(Algorithm::LBound);
  std::map<GroupKey, LbGroup> groups;
  std::map<RequestId, GroupKey> member;
  std::set<RequestId> gone;
  EpochClock clock(trace);
  double migratedMass = 0;

  auto take_share = [&](const GroupKey& k) {
    LbGroup& g = groups.at(k);
    std::map<DatacenterId, double> share;
    const double f = g.count > 0 ? 1.0 / g.count : 0.0;
    for (auto& [s, m] : g.mass) {
      share[s] = m * f;
      m -= m * f;
    }
    g.count -= 1;
    if (g.count <= 1e-9) g.mass.clear();
    return share;
  };
  auto group_for = [&](const ServiceClass& cls, DatacenterId poa) -> LbGroup& {
    LbGroup& g = groups[{cls.id, poa.value}];
    g.cls = &classes.by_id(cls.id);
    g.poa = poa;
    return g;
  };

  for (std::int64_t k = 0; k <= clock.last_epoch(); ++k) {
    bool needLp = false;
    clock.apply_until(k, [&](const TraceEvent& e) {
      if (gone.contains(e.user)) return;
      switch (e.kind) {
        case TraceKind::Arrive: {
          const ServiceClass& cls = classes.by_name(e.className);
          group_for(cls, e.poa).count += 1;
          member[e.user] = {cls.id, e.poa.value};
          st.newRequests += 1;
          needLp = true;
          break;
        }
        case TraceKind::Move: {
          auto it = member.find(e.user);
          if (it == member.end()) return;
          const ServiceClass& cls = classes.by_id(it->second.first);
          auto share = take_share(it->second);
          LbGroup& g = group_for(cls, e.poa);
          g.count += 1;
          const auto prefix = t.feasible_prefix(e.poa, cls.maxLevels);
          bool critical = false;
          for (const auto& [s, m] : share) {
            g.mass[s] += m;
            if (m > 1e-12 && std::find(prefix.begin(), prefix.end(), s) == prefix.end()) critical = true;
          }
          if (critical) {
            st.criticalRequests += 1;
            needLp = true;
          }
          it->second = {cls.id, e.poa.value};
          break;
        }
        case TraceKind::Depart: {
          auto it = member.find(e.user);
          if (it == member.end()) return;
          take_share(it->second);
          member.erase(it);
          gone.insert(e.user);
          break;
        }
      }
    });

    // Staying put is optimal unless something has to be (re)placed: any
    // voluntary move pays the migration cost, which exceeds every
    // computational saving available within one epoch.
    if (needLp) {
      std::vector<GroupKey> keys;
      std::vector<LbGroup> active;
      for (auto& [key, g] : groups) {
        if (g.count <= 1e-9) continue;
        keys.push_back(key);
        active.push_back(g);
      }
      st.invocations += 1;
      const LbSolution sol = solve_lbound_groups(t, cfg.costs, active);
      EpochRow row;
      row.epoch = k;
      row.algorithm = st.algorithm;
      row.status = to_string(sol.status);
      if (sol.status != LpStatus::Optimal) {
        st.lpInfeasible = true;
        st.epochs.push_back(row);
        log_msg(LogLevel::Warn, "LBound LP " + row.status + " at epoch " + std::to_string(k));
        break;
      }
      for (std::size_t i = 0; i < keys.size(); ++i) {
        LbGroup& g = groups.at(keys[i]);
        g.mass.clear();
        for (const auto& [s, m] : sol.y[i]) g.mass[s] = m;
      }
      migratedMass += sol.migratedMass;
      row.objective = sol.objective;
      row.migrations = std::llround(sol.migratedMass);
      st.epochs.push_back(row);
    }

    if (clock.sampled(k)) {
      double sum = 0;
      for (const auto& [key, g] : groups) {
        for (const auto& [s, m] : g.mass) sum += m * static_cast<double>(comp_at(t, *g.cls, s));
      }
      st.aggregate.computationalCost += sum;
      st.aggregate.samples += 1;
    }
    st.endTime = k * kNanosPerSecond;
  }
  st.aggregate.migrations = std::llround(migratedMass);
  st.aggregate.migrationCost = migratedMass * static_cast<double>(cfg.costs.migrationCost);
  st.aggregate.total = st.aggregate.migrationCost + st.aggregate.computationalCost;
  st.diagnostics["event_cost_undefined"] = 1;
  return st;
}

double lbound_min_cpu(const std::vector<TraceEvent>& trace, const Topology& t, const ClassTable& classes) {
  std::map<GroupKey, double> counts;
  std::map<RequestId, GroupKey> member;
  std::set<std::map<GroupKey, double>> distinct;
  EpochClock clock(trace);
  for (std::int64_t k = 0; k <= clock.last_epoch(); ++k) {
    clock.apply_until(k, [&](const TraceEvent& e) {
      switch (e.kind) {
        case TraceKind::Arrive: {
          const GroupKey key{classes.by_name(e.className).id, e.poa.value};
          counts[key] += 1;
          member[e.user] = key;
          break;
        }
        case TraceKind::Move: {
          auto it = member.find(e.user);
          if (it == member.end()) return;
          if (--counts[it->second] <= 0) counts.erase(it->second);
          it->second.second = e.poa.value;
          counts[it->second] += 1;
          break;
        }
        case TraceKind::Depart: {
          auto it = member.find(e.user);
          if (it == member.end()) return;
          if (--counts[it->second] <= 0) counts.erase(it->second);
          member.erase(it);
          break;
        }
      }
    });
    if (!counts.empty()) distinct.insert(counts);
  }

  struct Candidate {
    double bound;
    std::vector<DemandGroup> groups;
  };
  std::vector<Candidate> cands;
  for (const auto& c : distinct) {
    Candidate cand;
    for (const auto& [key, n] : c) cand.groups.push_back({&classes.by_id(key.first), DatacenterId{key.second}, n});
    cand.bound = hall_bound(t, cand.groups);
    cands.push_back(std::move(cand));
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.bound > b.bound; });
  double best = 0;
  for (const Candidate& c : cands) {
    if (c.bound <= best + 1e-9) break;
    LpStatus status;
    const double v = min_cpu_lp(t, c.groups, status);
    if (status != LpStatus::Optimal) throw std::runtime_error("min-CPU LP not solved: " + to_string(status));
    best = std::max(best, v);
  }
  return best;
}

}  // namespace dapp
