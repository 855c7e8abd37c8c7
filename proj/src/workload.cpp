#include "dapp/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace dapp {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::optional<T> parse_int(const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Exact decimal seconds -> nanoseconds.
std::optional<SimTime> parse_seconds(const std::string& s) {
  if (s.empty() || s[0] == '-' || s[0] == '+') return std::nullopt;
  const auto dot = s.find('.');
  const std::string whole = s.substr(0, dot);
  std::string frac = dot == std::string::npos ? std::string() : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  std::int64_t w = 0;
  if (!whole.empty()) {
    auto pw = parse_int<std::int64_t>(whole);
    if (!pw) return std::nullopt;
    w = *pw;
  }
  if (frac.size() > 9) frac.resize(9);
  while (frac.size() < 9) frac.push_back('0');
  auto pf = parse_int<std::int64_t>(frac);
  if (!pf) return std::nullopt;
  return w * kNanosPerSecond + *pf;
}

std::string format_seconds(SimTime t) {
  std::string s = std::to_string(t / kNanosPerSecond);
  const SimTime frac = t % kNanosPerSecond;
  if (frac != 0) {
    std::string f = std::to_string(frac);
    f.insert(0, 9 - f.size(), '0');
    while (!f.empty() && f.back() == '0') f.pop_back();
    s += "." + f;
  } else {
    s += ".0";
  }
  return s;
}

// Portable uniform draws from a 64-bit engine.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1u;
  return lo + static_cast<std::int64_t>(rng() % span);
}

}  // namespace

void validate_class(const ServiceClass& c) {
  const std::string who = "class '" + c.name + "': ";
  if (c.name.empty()) throw ParseError("service class needs a name");
  if (c.id >= (1u << kClassIdBits)) throw ParseError(who + "classId must fit in 4 bits");
  if (c.maxLevels < 1) throw ParseError(who + "maxLevels must be >= 1");
  const auto k = static_cast<std::size_t>(c.maxLevels);
  if (c.betaPerLevel.size() != k || c.compCostPerLevel.size() != k) {
    throw ParseError(who + "needs exactly maxLevels beta and cost entries");
  }
  for (Cpu b : c.betaPerLevel) {
    if (b < 1 || b >= (1 << kBetaBits)) throw ParseError(who + "beta must be in [1, 31]");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (c.compCostPerLevel[i] < 0) throw ParseError(who + "costs must be non-negative");
    if (i > 0 && c.compCostPerLevel[i] >= c.compCostPerLevel[i - 1]) {
      throw ParseError(who + "computational cost must strictly decrease with level");
    }
  }
}

ClassTable::ClassTable(std::vector<ServiceClass> classes) : classes_(std::move(classes)) {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    validate_class(classes_[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (classes_[j].name == classes_[i].name) throw ParseError("duplicate class name " + classes_[i].name);
      if (classes_[j].id == classes_[i].id) {
        throw ParseError("duplicate classId " + std::to_string(classes_[i].id));
      }
    }
  }
}

const ServiceClass* ClassTable::find(const std::string& name) const {
  for (const auto& c : classes_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const ServiceClass& ClassTable::by_name(const std::string& name) const {
  if (const ServiceClass* c = find(name)) return *c;
  throw std::out_of_range("unknown service class " + name);
}

const ServiceClass& ClassTable::by_id(ClassId id) const {
  for (const auto& c : classes_) {
    if (c.id == id) return c;
  }
  throw std::out_of_range("unknown classId " + std::to_string(id));
}

ClassTable default_classes() {
  return ClassTable({
      ServiceClass{"RT", 0, 3, {17, 17, 19}, {544, 278, 164}},
      ServiceClass{"NonRT", 1, 6, {17, 17, 17, 17, 17, 17}, {544, 278, 148, 86, 58, 47}},
  });
}

ClassTable parse_class_table(std::istream& in) {
  std::vector<ServiceClass> classes;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "class table line " + std::to_string(lineNo) + ": ";
    auto f = split(line, ',');
    if (f.size() != 5) throw ParseError(where + "expected 5 comma-separated fields");
    ServiceClass c;
    c.name = trim(f[0]);
    auto id = parse_int<unsigned>(trim(f[1]));
    auto k = parse_int<int>(trim(f[2]));
    if (!id || !k) throw ParseError(where + "classId and maxLevels must be integers");
    if (*id >= (1u << kClassIdBits)) throw ParseError(where + "classId must fit in 4 bits");
    c.id = static_cast<ClassId>(*id);
    c.maxLevels = *k;
    for (const auto& b : split(trim(f[3]), ';')) {
      auto v = parse_int<Cpu>(trim(b));
      if (!v) throw ParseError(where + "bad beta entry '" + b + "'");
      c.betaPerLevel.push_back(*v);
    }
    for (const auto& b : split(trim(f[4]), ';')) {
      auto v = parse_int<Cost>(trim(b));
      if (!v) throw ParseError(where + "bad cost entry '" + b + "'");
      c.compCostPerLevel.push_back(*v);
    }
    try {
      validate_class(c);
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
    classes.push_back(std::move(c));
  }
  return ClassTable(std::move(classes));
}

void write_class_table(std::ostream& out, const ClassTable& table) {
  for (const auto& c : table.classes()) {
    out << c.name << ',' << static_cast<unsigned>(c.id) << ',' << c.maxLevels << ',';
    for (std::size_t i = 0; i < c.betaPerLevel.size(); ++i) out << (i ? ";" : "") << c.betaPerLevel[i];
    out << ',';
    for (std::size_t i = 0; i < c.compCostPerLevel.size(); ++i) out << (i ? ";" : "") << c.compCostPerLevel[i];
    out << '\n';
  }
}

std::string to_string(RequestState s) {
  switch (s) {
    case RequestState::Unplaced: return "unplaced";
    case RequestState::Placed: return "placed";
    case RequestState::Failed: return "failed";
    case RequestState::Departed: return "departed";
  }
  return "?";
}

std::vector<TraceEvent> parse_trace(std::istream& in, const Topology& topo, const ClassTable& classes) {
  struct Parsed {
    TraceEvent ev;
    int line;
  };
  std::vector<Parsed> parsed;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "trace line " + std::to_string(lineNo) + ": ";
    auto f = split(line, ',');
    for (auto& x : f) x = trim(x);
    if (f.size() < 3) throw ParseError(where + "expected time_s,user_id,kind[,args]");
    TraceEvent ev;
    auto t = parse_seconds(f[0]);
    if (!t) throw ParseError(where + "bad time '" + f[0] + "'");
    ev.time = *t;
    auto user = parse_int<std::uint32_t>(f[1]);
    if (!user || *user > kMaxRequestId) throw ParseError(where + "user id must be an integer in [0, 16383]");
    ev.user = RequestId{static_cast<std::uint16_t>(*user)};
    auto parse_poa = [&](const std::string& s) {
      auto p = parse_int<std::uint32_t>(s);
      if (!p || *p == 0 || *p > kMaxDatacenterId || !topo.contains(DatacenterId{static_cast<std::uint16_t>(*p)}) ||
          !topo.is_leaf(DatacenterId{static_cast<std::uint16_t>(*p)})) {
        throw ParseError(where + "unknown PoA id '" + s + "'");
      }
      return DatacenterId{static_cast<std::uint16_t>(*p)};
    };
    if (f[2] == "arrive") {
      if (f.size() != 5) throw ParseError(where + "arrive needs a PoA and a class name");
      ev.kind = TraceKind::Arrive;
      ev.poa = parse_poa(f[3]);
      if (!classes.find(f[4])) throw ParseError(where + "unknown class '" + f[4] + "'");
      ev.className = f[4];
    } else if (f[2] == "move") {
      if (f.size() != 4) throw ParseError(where + "move needs exactly one PoA");
      ev.kind = TraceKind::Move;
      ev.poa = parse_poa(f[3]);
    } else if (f[2] == "depart") {
      if (f.size() != 3) throw ParseError(where + "depart takes no arguments");
      ev.kind = TraceKind::Depart;
    } else {
      throw ParseError(where + "unknown event kind '" + f[2] + "'");
    }
    parsed.push_back({std::move(ev), lineNo});
  }

  std::stable_sort(parsed.begin(), parsed.end(),
                   [](const Parsed& a, const Parsed& b) { return a.ev.time < b.ev.time; });

  enum class Phase { Absent, Live, Gone };
  std::map<RequestId, Phase> phase;
  std::vector<TraceEvent> out;
  out.reserve(parsed.size());
  for (auto& p : parsed) {
    const std::string where = "trace line " + std::to_string(p.line) + ": ";
    Phase& ph = phase[p.ev.user];
    switch (p.ev.kind) {
      case TraceKind::Arrive:
        if (ph != Phase::Absent) throw ParseError(where + "user " + std::to_string(p.ev.user.value) + " arrives twice");
        ph = Phase::Live;
        break;
      case TraceKind::Move:
        if (ph == Phase::Absent) throw ParseError(where + "move before arrive for user " + std::to_string(p.ev.user.value));
        if (ph == Phase::Gone) throw ParseError(where + "move after depart for user " + std::to_string(p.ev.user.value));
        break;
      case TraceKind::Depart:
        if (ph != Phase::Live) throw ParseError(where + "depart for user " + std::to_string(p.ev.user.value) + " that is not live");
        ph = Phase::Gone;
        break;
    }
    out.push_back(std::move(p.ev));
  }
  return out;
}

void write_trace(std::ostream& out, const std::vector<TraceEvent>& events) {
  for (const auto& e : events) {
    out << format_seconds(e.time) << ',' << e.user.value << ',';
    switch (e.kind) {
      case TraceKind::Arrive: out << "arrive," << e.poa.value << ',' << e.className; break;
      case TraceKind::Move: out << "move," << e.poa.value; break;
      case TraceKind::Depart: out << "depart"; break;
    }
    out << '\n';
  }
}

std::vector<TraceEvent> synth_trace(const SynthParams& p, const Topology& topo, const ClassTable& classes) {
  const PoaLayout& layout = topo.layout();
  if (layout.cellToPoa.empty()) throw std::invalid_argument("synthetic trace needs at least one PoA");
  if (p.rtRatio < 0.0 || p.rtRatio > 1.0) throw std::invalid_argument("rtRatio must be in [0, 1]");
  if (p.nUsers < 0 || p.nUsers > static_cast<int>(kMaxRequestId) + 1) {
    throw std::invalid_argument("user count must fit the 14-bit request id");
  }
  if (p.durationSeconds <= 0 || p.minMoveGapSeconds <= 0) {
    throw std::invalid_argument("duration and move gap must be positive");
  }
  classes.by_name(p.rtClass);
  classes.by_name(p.nonRtClass);

  // Cells without an antenna are served by the nearest PoA.
  std::vector<DatacenterId> cellPoa(static_cast<std::size_t>(layout.cols * layout.rows));
  for (int r = 0; r < layout.rows; ++r) {
    for (int c = 0; c < layout.cols; ++c) {
      auto it = layout.cellToPoa.find({c, r});
      DatacenterId best;
      if (it != layout.cellToPoa.end()) {
        best = it->second;
      } else {
        long bestD = -1;
        for (const auto& [cell, poa] : layout.cellToPoa) {
          const long d = static_cast<long>(cell.col - c) * (cell.col - c) + static_cast<long>(cell.row - r) * (cell.row - r);
          if (bestD < 0 || d < bestD || (d == bestD && poa < best)) {
            bestD = d;
            best = poa;
          }
        }
      }
      cellPoa[static_cast<std::size_t>(r * layout.cols + c)] = best;
    }
  }
  auto poa_at = [&](double x, double y) {
    const int c = std::clamp(static_cast<int>(x), 0, layout.cols - 1);
    const int r = std::clamp(static_cast<int>(y), 0, layout.rows - 1);
    return cellPoa[static_cast<std::size_t>(r * layout.cols + c)];
  };

  std::mt19937_64 rng(derive_seed(p.seed, "synth_trace"));
  const SimTime step = seconds_to_sim(p.minMoveGapSeconds);
  const SimTime duration = seconds_to_sim(p.durationSeconds);
  const std::int64_t totalSteps = duration / step;

  std::vector<TraceEvent> events;
  for (int u = 0; u < p.nUsers; ++u) {
    const RequestId id{static_cast<std::uint16_t>(u)};
    const bool rt = uniform01(rng) < p.rtRatio;
    const std::int64_t arriveStep = uniform_int(rng, 0, std::max<std::int64_t>(0, totalSteps / 2 - 1));
    const std::int64_t stay = uniform_int(rng, std::max<std::int64_t>(1, totalSteps / 4), std::max<std::int64_t>(1, totalSteps / 2));
    const std::int64_t departStep = std::min(totalSteps, arriveStep + stay);

    double x = uniform01(rng) * layout.cols;
    double y = uniform01(rng) * layout.rows;
    double wx = uniform01(rng) * layout.cols;
    double wy = uniform01(rng) * layout.rows;
    DatacenterId poa = poa_at(x, y);
    events.push_back({arriveStep * step, id, TraceKind::Arrive, poa, rt ? p.rtClass : p.nonRtClass});

    const double stride = p.speedCellsPerSecond * p.minMoveGapSeconds;
    for (std::int64_t s = arriveStep + 1; s < departStep; ++s) {
      double dx = wx - x;
      double dy = wy - y;
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (dist <= stride) {
        x = wx;
        y = wy;
        wx = uniform01(rng) * layout.cols;
        wy = uniform01(rng) * layout.rows;
      } else {
        x += dx / dist * stride;
        y += dy / dist * stride;
      }
      const DatacenterId now = poa_at(x, y);
      if (now != poa) {
        poa = now;
        events.push_back({s * step, id, TraceKind::Move, poa, {}});
      }
    }
    events.push_back({departStep * step, id, TraceKind::Depart, {}, {}});
  }
  std::stable_sort(events.begin(), events.end(), [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });
  return events;
}

bool is_critical(const Topology& topo, const Request& r, DatacenterId newPoa) {
  if (r.state != RequestState::Placed || !r.curPlace) return false;
  const auto prefix = topo.feasible_prefix(newPoa, r.cls.maxLevels);
  return std::find(prefix.begin(), prefix.end(), *r.curPlace) == prefix.end();
}

std::uint64_t derive_seed(std::uint64_t parent, const std::string& label) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = parent ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace dapp
