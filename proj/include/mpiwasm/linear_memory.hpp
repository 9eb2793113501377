#pragma once

// Translation between 32-bit guest addresses and host addresses.
//
// A guest only ever holds offsets into its own linear memory. The embedder
// records where that memory lives in the host address space and turns an
// (offset, length) pair into a host span after a bounds check. Nothing is
// copied: the span aliases guest memory directly.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace mpiwasm {

static_assert(std::endian::native == std::endian::little,
              "guest memory is little-endian and is handed to the host unchanged");

inline constexpr std::uint64_t kWasmPageSize = 65536;
inline constexpr std::uint64_t kMaxMemoryPages = 65536;
inline constexpr std::uint64_t kMaxMemoryBytes = kWasmPageSize * kMaxMemoryPages;

struct GuestAddress {
  std::uint32_t offset = 0;

  constexpr bool is_null() const noexcept { return offset == 0; }
  friend constexpr auto operator<=>(GuestAddress, GuestAddress) = default;
};

/// Host view of one instance's linear memory.
struct LinearMemoryView {
  std::byte* base = nullptr;
  std::uint64_t length = 0;
};

struct HostSpan {
  std::byte* start = nullptr;
  std::size_t length = 0;

  std::span<std::byte> bytes() const noexcept { return {start, length}; }
};

enum class MemoryErrorKind { out_of_bounds, not_in_region };

class MemoryFault : public std::runtime_error {
 public:
  MemoryFault(MemoryErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  MemoryErrorKind kind() const noexcept { return kind_; }

 private:
  MemoryErrorKind kind_;
};

/// True when [offset, offset+len) lies inside the view. Summed in 64 bits so a
/// 32-bit offset plus any 32-bit length cannot wrap.
constexpr bool in_bounds(const LinearMemoryView& view, std::uint32_t offset,
                         std::uint64_t len) noexcept {
  return len <= view.length && static_cast<std::uint64_t>(offset) <= view.length - len;
}

HostSpan to_host(const LinearMemoryView& view, GuestAddress addr, std::uint64_t len);

GuestAddress to_guest(const LinearMemoryView& view, const std::byte* host);

template <class T>
concept WasmScalar = std::is_same_v<T, std::int32_t> || std::is_same_v<T, std::int64_t> ||
                     std::is_same_v<T, float> || std::is_same_v<T, double> ||
                     std::is_same_v<T, std::uint32_t> || std::is_same_v<T, std::uint64_t>;

template <WasmScalar T>
T read_scalar(const LinearMemoryView& view, GuestAddress addr) {
  T value;
  std::memcpy(&value, to_host(view, addr, sizeof(T)).start, sizeof(T));
  return value;
}

template <WasmScalar T>
void write_scalar(const LinearMemoryView& view, GuestAddress addr, T value) {
  std::memcpy(to_host(view, addr, sizeof(T)).start, &value, sizeof(T));
}

}  // namespace mpiwasm
