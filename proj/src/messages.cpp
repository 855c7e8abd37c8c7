#include "dapp/messages.hpp"

namespace dapp {

namespace {

constexpr unsigned kKindBits = 4;
constexpr unsigned kSeqBits = 16;
constexpr unsigned kLengthBits = 12;
constexpr unsigned kEntryBits = kRequestIdBits + kClassIdBits + kDatacenterIdBits;  // 30
constexpr unsigned kPlacedBits = kRequestIdBits + kDatacenterIdBits;                // 26

static_assert(kKindBits + 4 * kDatacenterIdBits + kSeqBits + kLengthBits == kHeaderBits);

void check_count(std::size_t n, const char* what) {
  if (n > kMaxListEntries) {
    throw LayoutError(std::string(what) + " has " + std::to_string(n) + " entries; the count field is 8 bits");
  }
}

void check_deficit(std::uint32_t d) {
  if (d >= (1u << kDeficitBits)) throw LayoutError("deficitCpu " + std::to_string(d) + " does not fit in 16 bits");
}

struct SizeVisitor {
  std::size_t operator()(const BuPayload& p) const {
    check_count(p.unassigned.size(), "BU unassigned list");
    check_count(p.pushUp.size(), "BU push-up list");
    return 2 * kCountBits + (p.unassigned.size() + p.pushUp.size()) * kEntryBits;
  }
  std::size_t operator()(const PuPayload& p) const {
    check_count(p.records.size(), "PU list");
    return kCountBits + p.records.size() * kEntryBits;
  }
  std::size_t operator()(const PdReqPayload& p) const {
    check_count(p.entries.size(), "PD request list");
    check_deficit(p.deficit);
    return kDatacenterIdBits + kDeficitBits + kCountBits + p.entries.size() * kEntryBits;
  }
  std::size_t operator()(const PdReplyPayload& p) const {
    check_count(p.placed.size(), "PD reply placed list");
    check_count(p.remaining.size(), "PD reply remaining list");
    check_deficit(p.deficit);
    return kDeficitBits + 2 * kCountBits + p.placed.size() * kPlacedBits + p.remaining.size() * kEntryBits;
  }
  std::size_t operator()(const ReleasePayload&) const { return kRequestIdBits; }
};

void put_entry(BitWriter& w, const RequestEntry& e) {
  w.put(e.req.value, kRequestIdBits);
  w.put(e.cls, kClassIdBits);
  w.put(e.place.value, kDatacenterIdBits);
}

RequestEntry get_entry(BitReader& r) {
  RequestEntry e;
  e.req = RequestId{static_cast<std::uint16_t>(r.get(kRequestIdBits))};
  e.cls = static_cast<ClassId>(r.get(kClassIdBits));
  e.place = DatacenterId{static_cast<std::uint16_t>(r.get(kDatacenterIdBits))};
  return e;
}

std::vector<RequestEntry> get_entries(BitReader& r, std::size_t n) {
  std::vector<RequestEntry> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.push_back(get_entry(r));
  return v;
}

DatacenterId get_dc(BitReader& r) { return DatacenterId{static_cast<std::uint16_t>(r.get(kDatacenterIdBits))}; }

}  // namespace

const char* to_string(MsgKind k) {
  switch (k) {
    case MsgKind::BU: return "BU";
    case MsgKind::PU: return "PU";
    case MsgKind::PdReq: return "PD_REQ";
    case MsgKind::PdReply: return "PD_REPLY";
    case MsgKind::Release: return "RELEASE";
  }
  return "?";
}

MsgKind ControlMessage::kind() const {
  return static_cast<MsgKind>(payload.index() + 1);
}

std::size_t message_size_bits(const ControlMessage& m) {
  return kHeaderBits + std::visit(SizeVisitor{}, m.payload);
}

void BitWriter::put(std::uint64_t value, unsigned bits) {
  if (bits < 64 && value >= (std::uint64_t{1} << bits)) {
    throw LayoutError("value " + std::to_string(value) + " does not fit in " + std::to_string(bits) + " bits");
  }
  for (unsigned i = bits; i-- > 0;) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> i) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
    ++bits_;
  }
}

std::uint64_t BitReader::get(unsigned bits) {
  if (pos_ + bits > bytes_.size() * 8) throw LayoutError("truncated message");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < bits; ++i, ++pos_) {
    v = (v << 1) | ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u);
  }
  return v;
}

std::vector<std::uint8_t> encode(const ControlMessage& m) {
  const std::size_t bits = message_size_bits(m);
  BitWriter w;
  const Header& h = m.header;
  w.put(static_cast<unsigned>(m.kind()), kKindBits);
  w.put(h.sender.value, kDatacenterIdBits);
  w.put(h.receiver.value, kDatacenterIdBits);
  w.put(h.origin.value, kDatacenterIdBits);
  w.put(h.destination.value, kDatacenterIdBits);
  w.put(h.seq, kSeqBits);
  w.put((bits + 7) / 8, kLengthBits);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BuPayload>) {
          w.put(p.unassigned.size(), kCountBits);
          w.put(p.pushUp.size(), kCountBits);
          for (const auto& e : p.unassigned) put_entry(w, e);
          for (const auto& e : p.pushUp) put_entry(w, e);
        } else if constexpr (std::is_same_v<T, PuPayload>) {
          w.put(p.records.size(), kCountBits);
          for (const auto& e : p.records) put_entry(w, e);
        } else if constexpr (std::is_same_v<T, PdReqPayload>) {
          w.put(p.initiator.value, kDatacenterIdBits);
          w.put(p.deficit, kDeficitBits);
          w.put(p.entries.size(), kCountBits);
          for (const auto& e : p.entries) put_entry(w, e);
        } else if constexpr (std::is_same_v<T, PdReplyPayload>) {
          w.put(p.deficit, kDeficitBits);
          w.put(p.placed.size(), kCountBits);
          for (const auto& e : p.placed) {
            w.put(e.req.value, kRequestIdBits);
            w.put(e.newPlace.value, kDatacenterIdBits);
          }
          w.put(p.remaining.size(), kCountBits);
          for (const auto& e : p.remaining) put_entry(w, e);
        } else {
          w.put(p.req.value, kRequestIdBits);
        }
      },
      m.payload);
  return w.take();
}

ControlMessage decode(const std::vector<std::uint8_t>& bytes) {
  BitReader r(bytes);
  ControlMessage m;
  const auto kind = r.get(kKindBits);
  if (kind < 1 || kind > kMsgKindCount) throw LayoutError("unknown message kind " + std::to_string(kind));
  m.header.kind = static_cast<MsgKind>(kind);
  m.header.sender = get_dc(r);
  m.header.receiver = get_dc(r);
  m.header.origin = get_dc(r);
  m.header.destination = get_dc(r);
  m.header.seq = static_cast<std::uint16_t>(r.get(kSeqBits));
  m.header.lengthBytes = static_cast<std::uint16_t>(r.get(kLengthBits));
  switch (m.header.kind) {
    case MsgKind::BU: {
      BuPayload p;
      const auto nU = r.get(kCountBits);
      const auto nP = r.get(kCountBits);
      p.unassigned = get_entries(r, nU);
      p.pushUp = get_entries(r, nP);
      m.payload = std::move(p);
      break;
    }
    case MsgKind::PU: {
      PuPayload p;
      p.records = get_entries(r, r.get(kCountBits));
      m.payload = std::move(p);
      break;
    }
    case MsgKind::PdReq: {
      PdReqPayload p;
      p.initiator = get_dc(r);
      p.deficit = static_cast<std::uint32_t>(r.get(kDeficitBits));
      p.entries = get_entries(r, r.get(kCountBits));
      m.payload = std::move(p);
      break;
    }
    case MsgKind::PdReply: {
      PdReplyPayload p;
      p.deficit = static_cast<std::uint32_t>(r.get(kDeficitBits));
      const auto n = r.get(kCountBits);
      for (std::uint64_t i = 0; i < n; ++i) {
        PlacedEntry e;
        e.req = RequestId{static_cast<std::uint16_t>(r.get(kRequestIdBits))};
        e.newPlace = get_dc(r);
        p.placed.push_back(e);
      }
      p.remaining = get_entries(r, r.get(kCountBits));
      m.payload = std::move(p);
      break;
    }
    case MsgKind::Release: {
      ReleasePayload p;
      p.req = RequestId{static_cast<std::uint16_t>(r.get(kRequestIdBits))};
      m.payload = p;
      break;
    }
  }
  if ((message_size_bits(m) + 7) / 8 != m.header.lengthBytes) throw LayoutError("length field disagrees with payload");
  return m;
}

}  // namespace dapp
