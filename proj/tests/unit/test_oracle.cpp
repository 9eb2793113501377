#include <doctest.h>

#include <chrono>

#include "harness.hpp"

using namespace mpiwasm;

namespace {

const ModuleArtifact& vm() {
  static const ModuleArtifact a = harness::compile_fixture("script_vm.wat");
  return a;
}

std::int32_t at(const std::vector<std::uint8_t>& img, std::uint32_t off) {
  std::int32_t v;
  std::memcpy(&v, img.data() + off, 4);
  return v;
}

}  // namespace

TEST_CASE("reference interpreter on a hand-checked script") {
  script::Script s;
  s.ranks = 2;
  s.seed = 77;
  s.programs = {{script::Instr{script::SEND, 0, 4, 2, 1, 9}},
                {script::Instr{script::RECV, 3, 4, 2, script::kAny, 9},
                 script::Instr{script::LOCAL, 3, 2, 5}}};
  const auto ref = script::reference_run(s);
  const std::uint32_t b3 = script::kBufferAt + 3 * 256;
  for (int i = 0; i < 4; ++i) {
    const auto sent = static_cast<std::uint32_t>(script::initial_value(77, 0, 0, i));
    CHECK(at(ref[1], b3 + 4 * i) == static_cast<std::int32_t>(sent * 2 + 5 + i));
  }
  const auto untouched = static_cast<std::uint32_t>(script::initial_value(77, 1, 3, 4));
  CHECK(at(ref[1], b3 + 16) == static_cast<std::int32_t>(untouched * 2 + 5 + 4));
  CHECK(at(ref[1], script::kStatusAt) == 0);
  CHECK(at(ref[1], script::kStatusAt + 4) == 9);
  CHECK(at(ref[1], script::kStatusAt + 12) == 16);

  auto guest = harness::run_script(vm(), s);
  REQUIRE(guest.result.exit_code() == 0);
  CHECK(harness::first_mismatch(guest.memory[1], ref[1]) == -1);
  CHECK(harness::first_mismatch(guest.memory[0], ref[0]) == -1);
}

TEST_CASE("generated scripts fit the guest's program area and terminate in the reference") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto s = script::generate(seed, 1 + static_cast<std::int32_t>(seed % 8), 60);
    for (const auto& p : s.programs) CHECK(p.size() < script::kMaxInstructions);
    CHECK_NOTHROW(script::reference_run(s));
  }
}

TEST_CASE("random scripts: embedder matches the reference") {
  std::mt19937_64 rng(20240611);
  int matched = 0;
  const int total = 60;
  for (int k = 0; k < total; ++k) {
    const auto ranks = static_cast<std::int32_t>(1 + rng() % 8);
    const auto s = script::generate(rng(), ranks, 4 + static_cast<int>(rng() % 40));
    const auto ref = script::reference_run(s);
    const auto guest = harness::run_script(vm(), s);
    bool ok = guest.result.exit_code() == 0;
    for (std::int32_t r = 0; ok && r < ranks; ++r) {
      const long off = harness::first_mismatch(guest.memory[static_cast<std::size_t>(r)],
                                               ref[static_cast<std::size_t>(r)]);
      if (off >= 0) {
        MESSAGE("seed " << s.seed << " rank " << r << " differs at " << off);
        ok = false;
      }
    }
    if (ok) ++matched;
  }
  CHECK(matched == total);
}

TEST_CASE("sim determinism: whole images are bit-identical across staggered runs") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 16; ++k) {
    const auto ranks = static_cast<std::int32_t>(2 + rng() % 7);
    const auto s = script::generate(rng(), ranks, 10 + static_cast<int>(rng() % 30));
    const auto first = harness::run_script(vm(), s);
    REQUIRE(first.result.exit_code() == 0);
    for (std::uint64_t run = 1; run <= 3; ++run) {
      const auto again = harness::run_script(vm(), s, 2000, run);
      CAPTURE(s.seed);
      CAPTURE(run);
      REQUIRE(again.result.exit_code() == 0);
      for (std::size_t r = 0; r < again.memory.size(); ++r) CHECK(again.memory[r] == first.memory[r]);
    }
  }
}
