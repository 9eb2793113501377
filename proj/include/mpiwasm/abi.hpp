#pragma once

// Guest-visible MPI ABI, version 1.
//
// Every MPI object a guest can name is a 32-bit integer code. The values in
// this header are the single source of truth: the guest `mpi.h` is generated
// from the manifest produced by `abi_manifest()`.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mpiwasm::abi {

inline constexpr std::int32_t kAbiVersion = 1;

// Error codes returned by every hostcall.
inline constexpr std::int32_t kSuccess = 0;
inline constexpr std::int32_t kErrType = 3;
inline constexpr std::int32_t kErrComm = 5;
inline constexpr std::int32_t kErrOp = 9;
inline constexpr std::int32_t kErrArg = 12;
inline constexpr std::int32_t kErrOther = 15;

inline constexpr std::int32_t kCommWorld = 0;
inline constexpr std::int32_t kCommSelf = 1;
inline constexpr std::int32_t kCommNull = -1;

enum class Datatype : std::int32_t {
  byte = 0,
  char_ = 1,
  int_ = 2,
  float_ = 3,
  double_ = 4,
  long_ = 5,
  unsigned_ = 6,
  long_long = 7,
  unsigned_long = 8,
};
inline constexpr std::int32_t kDatatypeNull = -1;
inline constexpr std::int32_t kDatatypeCount = 9;

enum class Op : std::int32_t {
  sum = 0,
  max = 1,
  min = 2,
  prod = 3,
  land = 4,
  lor = 5,
  band = 6,
  bor = 7,
};
inline constexpr std::int32_t kOpNull = -1;
inline constexpr std::int32_t kOpCount = 8;

inline constexpr std::int32_t kAnySource = -1;
inline constexpr std::int32_t kAnyTag = -1;
inline constexpr std::uint32_t kStatusIgnore = 0;
inline constexpr std::int32_t kUndefined = -32766;

// MPI_Status as laid out in guest memory: four little-endian i32 fields.
struct StatusWire {
  std::int32_t source = 0;
  std::int32_t tag = 0;
  std::int32_t error = 0;
  std::int32_t count_bytes = 0;

  friend bool operator==(const StatusWire&, const StatusWire&) = default;
};
inline constexpr std::uint32_t kStatusSize = 16;
static_assert(sizeof(StatusWire) == kStatusSize);

/// Element width in bytes, or nullopt for an unknown code. `long` is 8 bytes
/// in this ABI even though wasm32 C `long` is 4.
constexpr std::optional<std::uint32_t> datatype_size(std::int32_t code) {
  switch (code) {
    case 0:
    case 1:
      return 1;
    case 2:
    case 3:
    case 6:
      return 4;
    case 4:
    case 5:
    case 7:
    case 8:
      return 8;
    default:
      return std::nullopt;
  }
}

constexpr bool is_predefined_datatype(std::int32_t code) {
  return code >= 0 && code < kDatatypeCount;
}

constexpr bool is_predefined_op(std::int32_t code) {
  return code >= 0 && code < kOpCount;
}

std::string_view datatype_name(std::int32_t code);
std::string_view op_name(std::int32_t code);

/// `KEY=value` lines, one per constant, in a fixed order.
std::string abi_manifest();

/// Thrown inside hostcall bodies; the dispatcher turns it into the code.
class AbiError : public std::runtime_error {
 public:
  AbiError(std::int32_t code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  std::int32_t code() const noexcept { return code_; }

 private:
  std::int32_t code_;
};

}  // namespace mpiwasm::abi
