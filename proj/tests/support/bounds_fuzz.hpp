#pragma once
// Random (offset, length) pairs against a 4-page guest, replayed through the
// bounds_probe guest on a mock backend. The expected return code comes from
// 64-bit arithmetic on the fixed memory size.
#include <cstring>
#include <random>
#include <vector>

#include "harness.hpp"
#include "mock_backend.hpp"

namespace bounds_fuzz {

inline constexpr std::uint64_t kMemory = 4 * 65536;
inline constexpr std::uint32_t kTableAt = 65536;
inline constexpr std::uint32_t kRcAt = 196608;

struct Case {
  std::int32_t op;
  std::uint32_t offset;
  std::int32_t count;
};

inline std::uint64_t span_bytes(const Case& c) {
  switch (c.op) {
    case 3: return static_cast<std::uint64_t>(c.count) * 4;
    case 4: return 16;
    default: return static_cast<std::uint64_t>(c.count);
  }
}

inline bool uses_count(const Case& c) { return c.op != 4; }

inline std::int32_t expected_rc(const Case& c) {
  if (uses_count(c) && c.count < 0) return mpiwasm::abi::kErrArg;
  const std::uint64_t len = span_bytes(c);
  return static_cast<std::uint64_t>(c.offset) + len <= kMemory ? 0 : mpiwasm::abi::kErrArg;
}

inline std::vector<Case> generate(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  auto pick_offset = [&]() -> std::uint32_t {
    switch (rng() % 5) {
      case 0: return static_cast<std::uint32_t>(rng() % 128);
      case 1: return static_cast<std::uint32_t>(kMemory - 64 + rng() % 128);
      case 2: return static_cast<std::uint32_t>(0xffffffffull - rng() % 128);
      case 3: return static_cast<std::uint32_t>(rng() % kMemory);
      default: return static_cast<std::uint32_t>(rng());
    }
  };
  std::vector<Case> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Case c{static_cast<std::int32_t>(rng() % 7), pick_offset(), 0};
    const std::int64_t room = static_cast<std::int64_t>(kMemory) - c.offset;
    const std::int64_t unit = c.op == 3 ? 4 : 1;
    switch (rng() % 6) {
      case 0: c.count = static_cast<std::int32_t>(rng() % 65); break;
      case 1:
        c.count = static_cast<std::int32_t>(std::max<std::int64_t>(0, room / unit) +
                                            static_cast<std::int64_t>(rng() % 5) - 2);
        break;
      case 2: c.count = -static_cast<std::int32_t>(1 + rng() % 1000); break;
      case 3: c.count = std::numeric_limits<std::int32_t>::max() - static_cast<std::int32_t>(rng() % 4); break;
      case 4: c.count = std::numeric_limits<std::int32_t>::min(); break;
      default: c.count = static_cast<std::int32_t>(rng() % (kMemory + 1)); break;
    }
    out.push_back(c);
  }
  return out;
}

struct Outcome {
  std::size_t cases = 0;
  std::size_t out_of_bounds = 0;
  std::size_t rejected_ok = 0;
  std::size_t mismatches = 0;
  std::size_t foreign_spans = 0;  // spans the backend saw outside guest memory
  int exit_code = -1;
  std::string first_mismatch;
};

inline Outcome run(const std::vector<Case>& cases) {
  using namespace mpiwasm;
  static const auto probe = harness::compile_fixture("bounds_probe.wat");
  mock::MockBackend backend;
  InstanceConfig cfg;
  cfg.argv = {"bounds"};
  Instance inst(default_engine(), probe, cfg, backend);
  LifecycleHooks hooks;
  std::vector<std::byte> mem;
  const std::byte* base = nullptr;
  hooks.on_instantiated = [&](Instance& i) {
    auto m = i.memory_bytes();
    base = m.data();
    const auto n = static_cast<std::uint32_t>(cases.size());
    std::memcpy(m.data() + 8, &n, 4);
    std::memcpy(m.data() + kTableAt, cases.data(), cases.size() * sizeof(Case));
  };
  hooks.on_exit = [&](Instance& i, const RunResult&) {
    auto m = i.memory_bytes();
    mem.assign(m.begin(), m.end());
  };
  static_assert(sizeof(Case) == 12);
  Outcome out;
  out.cases = cases.size();
  out.exit_code = inst.run(hooks).exit_code;
  if (mem.size() != kMemory) {
    out.mismatches = cases.size();
    out.first_mismatch = "memory not captured";
    return out;
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::int32_t want = expected_rc(cases[i]);
    const std::int32_t got = harness::i32_at(mem, static_cast<std::uint32_t>(kRcAt + 4 * i));
    if (want != 0) ++out.out_of_bounds;
    if (want != 0 && got == want) ++out.rejected_ok;
    if (want != got) {
      if (out.mismatches++ == 0) {
        out.first_mismatch = "op " + std::to_string(cases[i].op) + " offset " +
                             std::to_string(cases[i].offset) + " count " +
                             std::to_string(cases[i].count) + ": rc " + std::to_string(got) +
                             ", expected " + std::to_string(want);
      }
    }
  }
  for (const auto& s : backend.seen) {
    if (s.size == 0) continue;
    if (s.data < base || s.data + s.size > base + kMemory) ++out.foreign_spans;
  }
  return out;
}

}  // namespace bounds_fuzz
