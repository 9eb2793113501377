#include <doctest.h>

#include <map>

#include "harness.hpp"

using namespace mpiwasm;
using harness::f64_at;
using harness::i32_at;

namespace {

const ModuleArtifact& fixture(const std::string& name) {
  static std::map<std::string, ModuleArtifact> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, harness::compile_fixture(name)).first;
  return it->second;
}

}  // namespace

TEST_CASE("collectives") {
  for (int n : {1, 2, 3, 4, 8}) {
    CAPTURE(n);
    auto snap = harness::run_snapshot(fixture("collectives.wat"), n, 4096);
    REQUIRE(snap.result.exit_code() == 0);
    for (int r = 0; r < n; ++r) {
      CAPTURE(r);
      const auto& m = snap.memory[static_cast<std::size_t>(r)];
      CHECK(i32_at(m, 1024) == 11);
      CHECK(i32_at(m, 1036) == 44);
      if (r == n - 1) CHECK(i32_at(m, 1104) == n * (n + 1) / 2);
      CHECK(f64_at(m, 1208) == (n - 1) * 1.5);
      if (r == 0) {
        for (int j = 0; j < n; ++j) {
          CHECK(i32_at(m, 1400 + 8 * j) == j);
          CHECK(i32_at(m, 1404 + 8 * j) == j * j);
        }
        CHECK(i32_at(m, 2300) == (n == 1 ? 5 : 3));
      }
      for (int j = 0; j < n; ++j) {
        CHECK(i32_at(m, 1600 + 4 * j) == 3 * j);
        CHECK(i32_at(m, 2100 + 4 * j) == 10 * j + r);
      }
      CHECK(i32_at(m, 1800) == 7 * r);
      CHECK(i32_at(m, 2204) == (r + n - 1) % n);
    }
  }
}

TEST_CASE("communicator split, dup and free") {
  for (int n : {1, 2, 5, 8}) {
    CAPTURE(n);
    auto snap = harness::run_snapshot(fixture("comms.wat"), n, 256);
    REQUIRE(snap.result.exit_code() == 0);
    for (int r = 0; r < n; ++r) {
      CAPTURE(r);
      const auto& m = snap.memory[static_cast<std::size_t>(r)];
      int members = 0, above = 0, sum = 0;
      for (int q = r % 2; q < n; q += 2) {
        ++members;
        sum += q;
        if (q > r) ++above;  // keys are -rank, so higher world ranks come first
      }
      CHECK(i32_at(m, 104) == above);
      CHECK(i32_at(m, 108) == members);
      CHECK(i32_at(m, 112) == sum);
      CHECK(i32_at(m, 116) > 1);
      CHECK(i32_at(m, 120) == abi::kCommNull);
      CHECK(i32_at(m, 124) == abi::kErrComm);
      CHECK(i32_at(m, 128) == abi::kCommNull);
      CHECK(i32_at(m, 100) == abi::kCommNull);
    }
  }
}

TEST_CASE("nonblocking ring") {
  for (int n : {1, 2, 4, 7}) {
    CAPTURE(n);
    auto snap = harness::run_snapshot(fixture("nonblocking.wat"), n, 512);
    REQUIRE(snap.result.exit_code() == 0);
    for (int r = 0; r < n; ++r) {
      const auto& m = snap.memory[static_cast<std::size_t>(r)];
      const int left = (r + n - 1) % n;
      CHECK(i32_at(m, 300) == left);
      CHECK(i32_at(m, 304) == left);
      CHECK(i32_at(m, 400) == left);
      CHECK(i32_at(m, 404) == 5);
      CHECK(i32_at(m, 412) == 4);
      CHECK(i32_at(m, 432) == left);  // the ANY_SOURCE receive
      CHECK(i32_at(m, 436) == 6);
      CHECK(i32_at(m, 440) == 0);
    }
  }
}

TEST_CASE("pingpong, allreduce and hello run clean") {
  CHECK(harness::run_snapshot(fixture("pingpong.wat"), 2).result.exit_code() == 0);
  for (int n : {1, 2, 4, 8}) {
    CAPTURE(n);
    auto snap = harness::run_snapshot(fixture("allreduce.wat"), n, 64);
    CHECK(snap.result.exit_code() == 0);
    for (const auto& m : snap.memory) CHECK(i32_at(m, 40) == n * (n - 1) / 2);
    CHECK(harness::run_snapshot(fixture("hello.wat"), n, 64).result.exit_code() == 0);
  }
}

TEST_CASE("echo pingpong round-trips every size") {
  const std::vector<std::uint32_t> sizes = {1, 7, 4096, 65536, 4u << 20};
  auto snap = harness::run_snapshot(fixture("echo.wat"), 2, 4259840 + (4u << 20), {}, [&](Instance& inst) {
    auto m = inst.memory_bytes();
    const std::uint32_t n = static_cast<std::uint32_t>(sizes.size()), iters = 2;
    std::memcpy(m.data() + 8, &n, 4);
    std::memcpy(m.data() + 12, &iters, 4);
    std::memcpy(m.data() + 64, sizes.data(), 4 * sizes.size());
    if (inst.rank() == 0) {
      for (std::uint32_t i = 0; i < (4u << 20); ++i) m[65536 + i] = std::byte(i * 31 + 7);
    }
  });
  CHECK(snap.result.exit_code() == 0);
  CHECK(i32_at(snap.memory[0], 32 + 12) == static_cast<std::int32_t>(sizes.back()));
  const auto& m = snap.memory[0];
  bool same = true;
  for (std::uint32_t i = 0; i < (4u << 20) && same; ++i) same = m[4259840 + i] == std::byte(i * 31 + 7);
  CHECK(same);
}
