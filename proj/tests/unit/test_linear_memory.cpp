#include <doctest.h>

#include <random>
#include <vector>

#include "mpiwasm/linear_memory.hpp"

using namespace mpiwasm;

namespace {

bool reference_in_bounds(std::uint64_t len_mem, std::uint64_t off, std::uint64_t len) {
  // Arbitrary precision is not needed: both operands are below 2^33.
  return off + len <= len_mem;
}

}  // namespace

TEST_CASE("spans alias guest memory without copying") {
  std::vector<std::byte> mem(65536);
  LinearMemoryView view{mem.data(), mem.size()};
  HostSpan s = to_host(view, GuestAddress{100}, 32);
  CHECK(s.start == mem.data() + 100);
  CHECK(s.length == 32);
  s.start[0] = std::byte{42};
  CHECK(mem[100] == std::byte{42});
  CHECK(to_guest(view, s.start) == GuestAddress{100});
}

TEST_CASE("edges of the region") {
  std::vector<std::byte> mem(65536);
  LinearMemoryView view{mem.data(), mem.size()};
  CHECK_NOTHROW(to_host(view, GuestAddress{65535}, 1));
  CHECK_NOTHROW(to_host(view, GuestAddress{65536}, 0));
  CHECK_NOTHROW(to_host(view, GuestAddress{0}, 65536));
  CHECK_THROWS_AS(to_host(view, GuestAddress{65536}, 1), MemoryFault);
  CHECK_THROWS_AS(to_host(view, GuestAddress{65537}, 0), MemoryFault);
  CHECK_THROWS_AS(to_host(view, GuestAddress{0xffffffffu}, 2), MemoryFault);
  CHECK_THROWS_AS(to_host(view, GuestAddress{1}, 0xffffffffffffffffull), MemoryFault);
  CHECK_THROWS_AS(to_guest(view, mem.data() + mem.size()), MemoryFault);
  CHECK_THROWS_AS(to_guest(view, mem.data() - 1), MemoryFault);
}

TEST_CASE("property: bounds check agrees with 64-bit reference arithmetic") {
  std::vector<std::byte> mem(3 * 65536);
  LinearMemoryView view{mem.data(), mem.size()};
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200000; ++i) {
    const auto off = static_cast<std::uint32_t>(rng());
    const std::uint64_t len = rng() % 2 ? rng() % 300000 : static_cast<std::uint32_t>(rng());
    const auto near_off = static_cast<std::uint32_t>(rng() % (mem.size() + 10));
    for (std::uint32_t o : {off, near_off}) {
      const bool expect = reference_in_bounds(mem.size(), o, len);
      CHECK(in_bounds(view, o, len) == expect);
    }
  }
}

TEST_CASE("scalar round trip is little-endian") {
  std::vector<std::byte> mem(64);
  LinearMemoryView view{mem.data(), mem.size()};
  write_scalar<std::int32_t>(view, GuestAddress{4}, 0x01020304);
  CHECK(mem[4] == std::byte{4});
  CHECK(mem[7] == std::byte{1});
  write_scalar<double>(view, GuestAddress{8}, 2.5);
  CHECK(read_scalar<double>(view, GuestAddress{8}) == 2.5);
  CHECK_THROWS_AS(read_scalar<std::int64_t>(view, GuestAddress{60}), MemoryFault);
}
