#pragma once

#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "dapp/types.hpp"

namespace dapp {

enum class MsgKind : std::uint8_t { BU = 1, PU = 2, PdReq = 3, PdReply = 4, Release = 5 };

inline constexpr int kMsgKindCount = 5;
const char* to_string(MsgKind k);

/// Raised when a payload cannot be laid out on the wire (a list longer than
/// an 8-bit count allows, a deficit outside 16 bits, a truncated buffer).
class LayoutError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr std::size_t kMaxListEntries = 255;

// Header: kind:4 sender:12 receiver:12 origin:12 destination:12 seq:16 length:12.
// `length` is the total message size in bytes.
struct Header {
  MsgKind kind = MsgKind::BU;
  DatacenterId sender;
  DatacenterId receiver;
  DatacenterId origin;
  DatacenterId destination;
  std::uint16_t seq = 0;
  std::uint16_t lengthBytes = 0;

  bool operator==(const Header&) const = default;
};

/// (reqId:14, classId:4, placeId:12). `place` is the current place for
/// unassigned and push-down entries and the holder for push-up records.
struct RequestEntry {
  RequestId req;
  ClassId cls = 0;
  DatacenterId place;  // 0 = none

  bool operator==(const RequestEntry&) const = default;
};

/// (reqId:14, newPlaceId:12)
struct PlacedEntry {
  RequestId req;
  DatacenterId newPlace;

  bool operator==(const PlacedEntry&) const = default;
};

struct BuPayload {
  std::vector<RequestEntry> unassigned;
  std::vector<RequestEntry> pushUp;
  bool operator==(const BuPayload&) const = default;
};

struct PuPayload {
  std::vector<RequestEntry> records;
  bool operator==(const PuPayload&) const = default;
};

struct PdReqPayload {
  DatacenterId initiator;
  std::uint32_t deficit = 0;
  std::vector<RequestEntry> entries;
  bool operator==(const PdReqPayload&) const = default;
};

struct PdReplyPayload {
  std::uint32_t deficit = 0;
  std::vector<PlacedEntry> placed;
  std::vector<RequestEntry> remaining;
  bool operator==(const PdReplyPayload&) const = default;
};

struct ReleasePayload {
  RequestId req;
  bool operator==(const ReleasePayload&) const = default;
};

using Payload = std::variant<BuPayload, PuPayload, PdReqPayload, PdReplyPayload, ReleasePayload>;

struct ControlMessage {
  Header header;
  Payload payload;

  MsgKind kind() const;
  bool operator==(const ControlMessage&) const = default;
};

/// Exact wire size of the message. Throws LayoutError on oversized lists.
std::size_t message_size_bits(const ControlMessage& m);
inline std::size_t message_size_bytes(const ControlMessage& m) { return (message_size_bits(m) + 7) / 8; }

/// MSB-first bit packing; the last byte is zero-padded.
std::vector<std::uint8_t> encode(const ControlMessage& m);
ControlMessage decode(const std::vector<std::uint8_t>& bytes);

class BitWriter {
 public:
  void put(std::uint64_t value, unsigned bits);
  std::size_t bit_count() const { return bits_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}
  std::uint64_t get(unsigned bits);
  std::size_t position() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace dapp
