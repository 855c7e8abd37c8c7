#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace dapp {

// Wire widths of the control plane.
inline constexpr unsigned kDatacenterIdBits = 12;
inline constexpr unsigned kRequestIdBits = 14;
inline constexpr unsigned kClassIdBits = 4;
inline constexpr unsigned kBetaBits = 5;
inline constexpr unsigned kDeficitBits = 16;
inline constexpr unsigned kCountBits = 8;
inline constexpr unsigned kHeaderBits = 80;

/// Identifier of a datacenter. Value 0 is reserved on the wire for "none",
/// so valid ids live in [1, 4095].
struct DatacenterId {
  std::uint16_t value = 0;

  constexpr DatacenterId() = default;
  constexpr explicit DatacenterId(std::uint16_t v) : value(v) {}

  constexpr bool valid() const { return value != 0; }
  auto operator<=>(const DatacenterId&) const = default;
};

inline constexpr std::uint16_t kMaxDatacenterId = (1u << kDatacenterIdBits) - 1;

/// Identifier of a service request (one per user). 14 bits on the wire.
struct RequestId {
  std::uint16_t value = 0;

  constexpr RequestId() = default;
  constexpr explicit RequestId(std::uint16_t v) : value(v) {}

  auto operator<=>(const RequestId&) const = default;
};

inline constexpr std::uint32_t kMaxRequestId = (1u << kRequestIdBits) - 1;

/// Class identifier of a service class (4 bits on the wire).
using ClassId = std::uint8_t;

/// CPU quantity, in integral CPU units (1 unit = 1 GHz in the default tables).
using Cpu = std::int64_t;

/// Cost quantity, in integral cost units.
using Cost = std::int64_t;

/// Simulation time in nanoseconds.
using SimTime = std::int64_t;

inline constexpr SimTime kNanosPerMicro = 1'000;
inline constexpr SimTime kNanosPerMilli = 1'000'000;
inline constexpr SimTime kNanosPerSecond = 1'000'000'000;

inline SimTime seconds_to_sim(double s) {
  return static_cast<SimTime>(s * static_cast<double>(kNanosPerSecond) + (s >= 0 ? 0.5 : -0.5));
}
inline double sim_to_seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(kNanosPerSecond);
}

std::string to_string(DatacenterId id);
std::string to_string(RequestId id);

/// Raised on malformed input files (trace, class table, config).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on domain violations, such as asking for the CPU demand of a request
/// on a datacenter that is not delay-feasible for it.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace dapp

template <>
struct std::hash<dapp::DatacenterId> {
  std::size_t operator()(dapp::DatacenterId id) const noexcept { return id.value; }
};

template <>
struct std::hash<dapp::RequestId> {
  std::size_t operator()(dapp::RequestId id) const noexcept { return id.value; }
};
