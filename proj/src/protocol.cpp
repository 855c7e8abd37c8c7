#include "dapp/protocol.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace dapp {

namespace {

std::uint32_t wire_deficit(std::int64_t d) {
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(d, 0, (1 << kDeficitBits) - 1));
}

template <typename T>
std::vector<std::vector<T>> chunks(const std::vector<T>& v) {
  std::vector<std::vector<T>> out;
  for (std::size_t i = 0; i < v.size(); i += kMaxListEntries) {
    out.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(i),
                     v.begin() + static_cast<std::ptrdiff_t>(std::min(v.size(), i + kMaxListEntries)));
  }
  return out;
}

}  // namespace

ProtocolNode::ProtocolNode(DatacenterId id, const Topology& topo, const ProtocolConfig& cfg)
    : id_(id), topo_(&topo), cfg_(&cfg), level_(topo.level(id)), capacity_(topo.node(id).capacity),
      avail_(capacity_) {}

Cpu ProtocolNode::charged() const {
  Cpu sum = 0;
  for (const auto& [r, b] : placed_) sum += b;
  for (const auto& [r, b] : potPlaced_) sum += b;
  return sum;
}

bool ProtocolNode::idle() const {
  return potPlaced_.empty() && unassigned_.empty() && pushUp_.empty() && pendingPuToParent_.empty() &&
         awaitingPd_.empty() && !pd_ && pdQueue_.empty() && !buTimer_ && !pdTimer_ && !ownPdDeferred_;
}

std::string ProtocolNode::describe() const {
  std::ostringstream os;
  os << to_string(id_) << " a=" << avail_ << "/" << capacity_ << " placed=" << placed_.size()
     << " pot=" << potPlaced_.size() << " U=" << unassigned_.size() << " PU=" << pushUp_.size()
     << " pendingPU=" << pendingPuToParent_.size() << " awaitingPD=" << awaitingPd_.size()
     << " pd=" << (pd_ ? to_string(pd_->initiator) : std::string("-")) << " queuedPD=" << pdQueue_.size();
  return os.str();
}

bool ProtocolNode::in_feasible_set(const RequestView& v, DatacenterId s) const {
  const int lvl = topo_->level(s);
  if (lvl >= v.cls->maxLevels) return false;
  return topo_->ancestor_at_level(v.poa, lvl) == s;
}

DatacenterId ProtocolNode::top_of(const RequestView& v) const {
  const int top = std::min(v.cls->maxLevels, topo_->height()) - 1;
  return *topo_->ancestor_at_level(v.poa, top);
}

Cpu ProtocolNode::beta_at(const RequestView& v, DatacenterId s) const {
  const int lvl = topo_->level(s);
  if (lvl >= v.cls->maxLevels) return 0;
  return v.cls->betaPerLevel[static_cast<std::size_t>(lvl)];
}

void ProtocolNode::sort_requests(ProtocolContext& ctx, std::vector<RequestId>& reqs) const {
  // Timing-critical first, then smaller beta, then FIFO.
  using Key = std::tuple<int, Cpu, std::uint64_t, std::uint16_t>;
  std::vector<std::pair<Key, RequestId>> keyed;
  keyed.reserve(reqs.size());
  for (RequestId r : reqs) {
    const RequestView v = ctx.view(r);
    keyed.push_back({{topo_->level(top_of(v)) - level_, beta_at(v, id_), v.arrivalSeq, r.value}, r});
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < reqs.size(); ++i) reqs[i] = keyed[i].second;
}

RequestEntry ProtocolNode::entry(ProtocolContext& ctx, RequestId r, DatacenterId place) const {
  const RequestView v = ctx.view(r);
  return RequestEntry{r, v.cls ? v.cls->id : ClassId{0}, place};
}

void ProtocolNode::send_to(ProtocolContext& ctx, DatacenterId to, Payload p, DatacenterId destination) {
  ControlMessage m;
  m.header.sender = id_;
  m.header.receiver = to;
  m.header.origin = id_;
  m.header.destination = destination.valid() ? destination : to;
  m.payload = std::move(p);
  m.header.kind = m.kind();
  ctx.send(std::move(m));
}

void ProtocolNode::arm(ProtocolContext& ctx, TimerKind k) {
  bool& armed = k == TimerKind::BU ? buTimer_ : pdTimer_;
  if (armed) return;
  armed = true;
  const SimTime base = k == TimerKind::BU ? cfg_->buDelay : cfg_->pdDelay;
  ctx.arm_timer(id_, k, base * (level_ + 1));
}

void ProtocolNode::enter_f_mode(ProtocolContext& ctx) { fModeUntil_ = ctx.now() + cfg_->fModePeriod; }

void ProtocolNode::on_ingress(ProtocolContext& ctx, RequestId r) {
  unassigned_.push_back(r);
  arm(ctx, TimerKind::BU);
}

void ProtocolNode::on_timer(ProtocolContext& ctx, TimerKind k) {
  if (k == TimerKind::BU) {
    buTimer_ = false;
    run_bu(ctx);
    return;
  }
  pdTimer_ = false;
  if (awaitingPd_.empty()) return;
  if (pd_) {
    ownPdDeferred_ = true;
    return;
  }
  start_own_pd(ctx);
}

void ProtocolNode::on_message(ProtocolContext& ctx, const ControlMessage& m) {
  const DatacenterId from = m.header.sender;
  switch (m.kind()) {
    case MsgKind::BU: {
      const auto& p = std::get<BuPayload>(m.payload);
      for (const auto& e : p.unassigned) unassigned_.push_back(e.req);
      for (const auto& e : p.pushUp) {
        pushUp_[e.req] = e.place;
        downRoute_[e.req] = from;
      }
      arm(ctx, TimerKind::BU);
      break;
    }
    case MsgKind::PU: {
      const auto& p = std::get<PuPayload>(m.payload);
      for (const auto& e : p.records) {
        pushUp_[e.req] = e.place;
        pendingPuToParent_.erase(e.req);
      }
      run_pu(ctx);
      break;
    }
    case MsgKind::PdReq:
      handle_pd_request(ctx, from, std::get<PdReqPayload>(m.payload));
      break;
    case MsgKind::PdReply:
      handle_pd_reply(ctx, from, std::get<PdReplyPayload>(m.payload));
      break;
    case MsgKind::Release: {
      const RequestId r = std::get<ReleasePayload>(m.payload).req;
      release_towards(ctx, r, m.header.destination);
      break;
    }
  }
}

void ProtocolNode::release_towards(ProtocolContext& ctx, RequestId r, DatacenterId dest) {
  if (dest == id_) {
    release_local(ctx, r);
    return;
  }
  send_to(ctx, topo_->next_hop(id_, dest), ReleasePayload{r}, dest);
}

void ProtocolNode::release_local(ProtocolContext& ctx, RequestId r) {
  auto it = placed_.find(r);
  if (it == placed_.end()) {
    ctx.count("release_not_held");
    return;
  }
  avail_ += it->second;
  placed_.erase(it);
}

// Seek a feasible solution: reserve as low as possible, place where the
// request cannot go any higher, escalate the rest to the parent.
void ProtocolNode::run_bu(ProtocolContext& ctx) {
  const bool fmode = f_mode(ctx.now());
  std::vector<RequestId> work;
  work.swap(unassigned_);
  sort_requests(ctx, work);
  std::vector<RequestId> keep;
  for (RequestId r : work) {
    const RequestView v = ctx.view(r);
    if (!v.live) {
      ctx.count("bu_dropped_inactive");
      continue;
    }
    const Cpu b = beta_at(v, id_);
    const bool mustPlace = top_of(v) == id_;
    if (avail_ >= b) {
      avail_ -= b;
      if (mustPlace || fmode) {
        if (ctx.commit(r, id_, std::nullopt)) {
          placed_[r] = b;
        } else {
          avail_ += b;
          ctx.count("commit_rejected");
        }
      } else {
        potPlaced_[r] = b;
        pushUp_[r] = id_;
      }
    } else if (mustPlace) {
      if (fmode) {
        ctx.fail(r, id_);
      } else {
        awaitingPd_.push_back(r);
        arm(ctx, TimerKind::PD);
      }
    } else {
      keep.push_back(r);
    }
  }

  std::vector<RequestEntry> up;
  const auto parent = topo_->node(id_).parent;
  if (!fmode && parent) {
    for (const auto& [r, holder] : pushUp_) {
      const RequestView v = ctx.view(r);
      if (v.cls && in_feasible_set(v, *parent)) up.push_back(entry(ctx, r, holder));
    }
  }
  if (!keep.empty() || !up.empty()) {
    std::vector<RequestEntry> ua;
    for (RequestId r : keep) ua.push_back(entry(ctx, r, ctx.view(r).curPlace));
    auto uaChunks = chunks(ua);
    auto upChunks = chunks(up);
    const std::size_t n = std::max(uaChunks.size(), upChunks.size());
    for (std::size_t i = 0; i < n; ++i) {
      BuPayload p;
      if (i < uaChunks.size()) p.unassigned = std::move(uaChunks[i]);
      if (i < upChunks.size()) p.pushUp = std::move(upChunks[i]);
      send_to(ctx, *parent, std::move(p));
    }
    for (const auto& e : up) {
      pushUp_.erase(e.req);
      pendingPuToParent_.insert(e.req);
    }
  }
  if (up.empty()) run_pu(ctx);
}

// Push-up: settle own reservations, adopt what fits here, hand the rest down.
void ProtocolNode::run_pu(ProtocolContext& ctx) {
  for (auto it = pushUp_.begin(); it != pushUp_.end();) {
    const RequestId r = it->first;
    auto own = potPlaced_.find(r);
    if (own == potPlaced_.end()) {
      ++it;
      continue;
    }
    const Cpu b = own->second;
    potPlaced_.erase(own);
    if (it->second == id_ && ctx.commit(r, id_, std::nullopt)) {
      placed_[r] = b;
    } else {
      if (it->second == id_) ctx.count("commit_rejected");
      avail_ += b;
    }
    downRoute_.erase(r);
    it = pushUp_.erase(it);
  }

  std::vector<RequestId> recs;
  for (const auto& [r, holder] : pushUp_) recs.push_back(r);
  if (!f_mode(ctx.now())) {
    sort_requests(ctx, recs);
    for (RequestId r : recs) {
      const DatacenterId holder = pushUp_.at(r);
      if (holder == id_ || !topo_->is_ancestor(id_, holder)) continue;
      const RequestView v = ctx.view(r);
      if (!v.live || !in_feasible_set(v, id_)) continue;
      const Cpu b = beta_at(v, id_);
      if (avail_ < b) continue;
      if (ctx.commit(r, id_, std::nullopt)) {
        avail_ -= b;
        placed_[r] = b;
        pushUp_[r] = id_;
      }
    }
  }
  send_pu_to_children(ctx, recs);
}

void ProtocolNode::send_pu_to_children(ProtocolContext& ctx, const std::vector<RequestId>& records) {
  std::map<DatacenterId, std::vector<RequestEntry>> perChild;
  for (RequestId r : records) {
    auto it = pushUp_.find(r);
    if (it == pushUp_.end()) continue;
    std::optional<DatacenterId> child;
    if (auto d = downRoute_.find(r); d != downRoute_.end()) {
      child = d->second;
      downRoute_.erase(d);
    } else {
      const RequestView v = ctx.view(r);
      ctx.count("pu_route_fallback");
      if (level_ > 0 && topo_->is_ancestor(id_, v.poa)) child = topo_->ancestor_at_level(v.poa, level_ - 1);
    }
    if (!child) {
      ctx.count("pu_record_unroutable");
    } else {
      perChild[*child].push_back(entry(ctx, r, it->second));
    }
    pushUp_.erase(it);
    pendingPuToParent_.erase(r);
  }
  for (auto& [c, recs] : perChild) {
    for (auto& part : chunks(recs)) send_to(ctx, c, PuPayload{std::move(part)});
  }
}

void ProtocolNode::start_own_pd(ProtocolContext& ctx) {
  std::vector<RequestId> live;
  Cpu need = 0;
  for (RequestId r : awaitingPd_) {
    const RequestView v = ctx.view(r);
    if (!v.live) continue;
    live.push_back(r);
    need += beta_at(v, id_);
  }
  awaitingPd_ = live;
  const std::int64_t deficit = need - avail_;
  if (deficit <= 0) {
    for (RequestId r : awaitingPd_) unassigned_.push_back(r);
    awaitingPd_.clear();
    if (!unassigned_.empty()) run_bu(ctx);
    return;
  }
  enter_f_mode(ctx);
  ctx.count("pd_initiated");
  PdContext c;
  c.initiator = id_;
  c.deficit = deficit;
  for (RequestId r : awaitingPd_) c.entries.push_back({r, id_, true});
  for (const auto& [r, b] : placed_) c.entries.push_back({r, id_, true});
  pd_ = std::move(c);
  continue_pd(ctx);
}

void ProtocolNode::handle_pd_request(ProtocolContext& ctx, DatacenterId sender, const PdReqPayload& p) {
  if (pd_ && pd_->initiator != p.initiator) {
    ctx.count("pd_busy_reply");
    send_to(ctx, sender, PdReplyPayload{p.deficit, {}, p.entries});
    return;
  }
  if (pd_) {
    pdQueue_.push_back({sender, p});
    return;
  }
  enter_f_mode(ctx);
  PdContext c;
  c.initiator = p.initiator;
  c.caller = sender;
  c.deficit = p.deficit;
  for (const auto& e : p.entries) c.entries.push_back({e.req, e.place, true});
  for (const auto& [r, b] : placed_) c.entries.push_back({r, id_, false});
  pd_ = std::move(c);
  continue_pd(ctx);
}

bool ProtocolNode::can_nullify_locally(ProtocolContext& ctx) const {
  if (pd_->initiator == id_) return false;
  Cpu a = avail_;
  std::int64_t d = pd_->deficit;
  for (const PdEntry& e : pd_->entries) {
    if (e.curPlace != pd_->initiator) continue;
    const RequestView v = ctx.view(e.req);
    if (!v.live || !in_feasible_set(v, id_)) continue;
    const Cpu b = beta_at(v, id_);
    if (b > a) continue;
    a -= b;
    d -= beta_at(v, pd_->initiator);
    if (d <= 0) return true;
  }
  return false;
}

void ProtocolNode::continue_pd(ProtocolContext& ctx) {
  const auto& children = topo_->node(id_).children;
  while (pd_->nextChild < children.size()) {
    if (pd_->deficit <= 0 || can_nullify_locally(ctx)) break;
    const DatacenterId c = children[pd_->nextChild++];
    std::vector<RequestEntry> forChild;
    pd_->sentToChild.clear();
    for (const PdEntry& e : pd_->entries) {
      if (forChild.size() == kMaxListEntries) {
        ctx.count("pd_list_truncated");
        break;
      }
      const RequestView v = ctx.view(e.req);
      if (!v.live || !in_feasible_set(v, c)) continue;
      if (!topo_->is_ancestor(e.curPlace, c)) continue;
      forChild.push_back(entry(ctx, e.req, e.curPlace));
      pd_->sentToChild.push_back(e.req);
    }
    if (forChild.empty()) continue;
    pd_->awaiting = c;
    send_to(ctx, c, PdReqPayload{pd_->initiator, wire_deficit(pd_->deficit), std::move(forChild)});
    return;
  }
  finish_pd(ctx);
}

void ProtocolNode::handle_pd_reply(ProtocolContext& ctx, DatacenterId sender, const PdReplyPayload& p) {
  if (!pd_ || pd_->awaiting != sender) {
    ctx.count("pd_reply_unmatched");
    return;
  }
  pd_->awaiting.reset();
  for (const PlacedEntry& pe : p.placed) {
    auto it = std::find_if(pd_->entries.begin(), pd_->entries.end(), [&](const PdEntry& e) { return e.req == pe.req; });
    bool fromCaller = true;
    if (it != pd_->entries.end()) {
      fromCaller = it->fromCaller;
      pd_->entries.erase(it);
    }
    if (pd_->initiator == id_) {
      auto w = std::find(awaitingPd_.begin(), awaitingPd_.end(), pe.req);
      if (w != awaitingPd_.end()) awaitingPd_.erase(w);
    }
    if (placed_.contains(pe.req)) {
      release_local(ctx, pe.req);
    } else if (fromCaller) {
      pd_->placedBelow.push_back(pe);
    }
  }
  pd_->deficit = std::min<std::int64_t>(pd_->deficit, p.deficit);
  continue_pd(ctx);
}

// Pull entries held above (or not yet placed) down onto this node.
void ProtocolNode::self_push_down(ProtocolContext& ctx) {
  PdContext& c = *pd_;
  for (auto it = c.entries.begin(); it != c.entries.end();) {
    const bool above = it->curPlace != id_ && topo_->is_ancestor(it->curPlace, id_);
    const RequestView v = ctx.view(it->req);
    if (!above || !v.live || !in_feasible_set(v, id_) || beta_at(v, id_) > avail_) {
      ++it;
      continue;
    }
    const Cpu b = beta_at(v, id_);
    if (!ctx.commit(it->req, id_, it->curPlace)) {
      ctx.count("pd_commit_rejected");
      it = c.entries.erase(it);
      continue;
    }
    avail_ -= b;
    placed_[it->req] = b;
    if (it->curPlace == c.initiator) c.deficit -= beta_at(v, c.initiator);
    c.placedBelow.push_back({it->req, id_});
    it = c.entries.erase(it);
  }
}

void ProtocolNode::finish_pd(ProtocolContext& ctx) {
  if (pd_->initiator != id_) {
    self_push_down(ctx);
    PdReplyPayload reply;
    reply.deficit = wire_deficit(pd_->deficit);
    reply.placed = std::move(pd_->placedBelow);
    for (const PdEntry& e : pd_->entries) {
      if (e.fromCaller) reply.remaining.push_back(entry(ctx, e.req, e.curPlace));
    }
    if (reply.placed.size() > kMaxListEntries || reply.remaining.size() > kMaxListEntries) {
      ctx.count("pd_reply_truncated");
      if (reply.remaining.size() > kMaxListEntries) reply.remaining.resize(kMaxListEntries);
    }
    const DatacenterId caller = *pd_->caller;
    pd_.reset();
    send_to(ctx, caller, std::move(reply));
  } else {
    pd_.reset();
    for (RequestId r : awaitingPd_) unassigned_.push_back(r);
    awaitingPd_.clear();
  }
  after_pd(ctx);
}

void ProtocolNode::after_pd(ProtocolContext& ctx) {
  if (!unassigned_.empty()) run_bu(ctx);
  if (pd_) return;
  if (!pdQueue_.empty()) {
    QueuedPd q = std::move(pdQueue_.front());
    pdQueue_.pop_front();
    handle_pd_request(ctx, q.sender, q.payload);
    return;
  }
  if (ownPdDeferred_) {
    ownPdDeferred_ = false;
    if (!awaitingPd_.empty() && !pdTimer_) start_own_pd(ctx);
  }
}

}  // namespace dapp
