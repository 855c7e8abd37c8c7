#include <doctest.h>

#include <random>

#include "../support/goldens.hpp"
#include "dapp/messages.hpp"
#include "dapp/sim.hpp"

using namespace dapp;
using namespace dapp::testing;

TEST_CASE("wire sizes match the layouts") {
  for (const Golden& g : golden_messages()) {
    CAPTURE(g.name);
    CHECK(message_size_bits(g.msg) == g.bits);
    CHECK(message_size_bytes(g.msg) == (g.bits + 7) / 8);
    CHECK(encode(g.msg).size() == (g.bits + 7) / 8);
  }
  CHECK(message_size_bytes(golden_messages()[0].msg) == 16);
  CHECK(message_size_bytes(golden_messages()[5].msg) == 22);
  CHECK(message_size_bytes(golden_messages()[9].msg) == 12);
}

TEST_CASE("goldens decode to themselves") {
  for (Golden g : golden_messages()) {
    CAPTURE(g.name);
    g.msg.header.lengthBytes = static_cast<std::uint16_t>(message_size_bytes(g.msg));
    CHECK(decode(encode(g.msg)) == g.msg);
  }
}

TEST_CASE("oversized lists are a layout error") {
  PuPayload p;
  p.records.assign(kMaxListEntries + 1, RequestEntry{RequestId(1), 0, DatacenterId(1)});
  CHECK_THROWS_AS(message_size_bits(msg(p)), LayoutError);
  p.records.pop_back();
  CHECK(message_size_bits(msg(p)) == 88 + 30 * kMaxListEntries);
}

TEST_CASE("truncated buffers are rejected") {
  auto bytes = encode(golden_messages()[5].msg);
  bytes.pop_back();
  CHECK_THROWS_AS(decode(bytes), LayoutError);
}

TEST_CASE("property: random messages survive encode/decode") {
  std::mt19937_64 rng(7);
  auto u = [&](std::uint32_t hi) { return static_cast<std::uint32_t>(std::uniform_int_distribution<std::uint32_t>(0, hi)(rng)); };
  auto entry = [&] {
    return RequestEntry{RequestId(static_cast<std::uint16_t>(u(kMaxRequestId))), static_cast<ClassId>(u(15)),
                        DatacenterId(static_cast<std::uint16_t>(u(kMaxDatacenterId)))};
  };
  auto list = [&] {
    std::vector<RequestEntry> v(u(6));
    for (auto& e : v) e = entry();
    return v;
  };
  for (int i = 0; i < 500; ++i) {
    Payload p;
    switch (u(4)) {
      case 0: p = BuPayload{list(), list()}; break;
      case 1: p = PuPayload{list()}; break;
      case 2: p = PdReqPayload{DatacenterId(static_cast<std::uint16_t>(u(kMaxDatacenterId))), u(65535), list()}; break;
      case 3: {
        PdReplyPayload r{u(65535), {}, list()};
        for (std::uint32_t k = u(4); k > 0; --k) {
          r.placed.push_back({RequestId(static_cast<std::uint16_t>(u(kMaxRequestId))),
                              DatacenterId(static_cast<std::uint16_t>(u(kMaxDatacenterId)))});
        }
        p = r;
        break;
      }
      default: p = ReleasePayload{RequestId(static_cast<std::uint16_t>(u(kMaxRequestId)))};
    }
    ControlMessage m = msg(p);
    m.header.seq = static_cast<std::uint16_t>(u(65535));
    m.header.lengthBytes = static_cast<std::uint16_t>(message_size_bytes(m));
    const auto bytes = encode(m);
    REQUIRE(bytes.size() == message_size_bytes(m));
    CHECK(decode(bytes) == m);
  }
}

TEST_CASE("link delay") {
  DelayModel d;
  const ControlMessage bu = golden_messages()[0].msg;
  CHECK(transmission_time(126, d) == 12'600);
  CHECK(link_delay(bu, d) == 34'600);
  d.propagation = 8 * kNanosPerMicro;
  CHECK(link_delay(bu, d) == 20'600);
  CHECK(transmission_time(80, d) == 8 * kNanosPerMicro);
}
