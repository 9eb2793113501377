#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "harness.hpp"
#include "mock_backend.hpp"

using namespace mpiwasm;

TEST_CASE("exit codes and outcomes") {
  SUBCASE("proc_exit") {
    auto r = harness::run_snapshot(harness::compile_fixture("exit3.wat"), 2);
    CHECK(r.result.exit_code() == 3);
    CHECK(r.result.ranks[0].outcome == Outcome::exited);
  }
  SUBCASE("trap maps to 134") {
    auto r = harness::run_snapshot(harness::compile_fixture("oob_trap.wat"), 1);
    CHECK(r.result.exit_code() == kTrapExitCode);
    CHECK(r.result.ranks[0].outcome == Outcome::trapped);
    CHECK_FALSE(r.result.ranks[0].diagnostic.empty());
  }
  SUBCASE("trap in one rank tears down a blocked peer") {
    auto r = harness::run_snapshot(harness::compile_fixture("trap_rank1.wat"), 2);
    CHECK(r.result.aborted);
    CHECK(r.result.exit_code() == kTrapExitCode);
  }
  SUBCASE("MPI_Abort") {
    auto r = harness::run_snapshot(harness::compile_fixture("abort.wat"), 3);
    CHECK(r.result.aborted);
    CHECK(r.result.exit_code() == 7);
  }
  SUBCASE("abort interrupts ranks spinning in guest code") {
    auto r = harness::run_snapshot(harness::compile_fixture("spin.wat"), 4);
    CHECK(r.result.exit_code() == 9);
  }
  SUBCASE("deadlock") {
    auto r = harness::run_snapshot(harness::compile_fixture("deadlock.wat"), 3);
    CHECK(r.result.aborted);
    CHECK(r.result.exit_code() == 1);
    CHECK(r.result.abort_reason.find("deadlock") != std::string::npos);
  }
}

TEST_CASE("missing exports and rejected memories") {
  auto art = harness::compile_fixture("no_start.wat");
  mock::MockBackend backend;
  CHECK_THROWS_AS(Instance(default_engine(), art, InstanceConfig{}, backend), MissingExport);
  auto no_memory = harness::compile_wat("(module (func (export \"_start\")))");
  CHECK_THROWS_AS(Instance(default_engine(), no_memory, InstanceConfig{}, backend), MissingExport);
  CHECK_THROWS_AS(harness::compile_fixture("shared_memory.wat"), UnsupportedFeature);
}

TEST_CASE("memory growth is visible to later hostcalls") {
  auto r = harness::run_snapshot(harness::compile_fixture("grow.wat"), 2, 64);
  REQUIRE(r.result.exit_code() == 0);
  CHECK(harness::i32_at(r.memory[1], 16) == 4242);
}

TEST_CASE("guest stdout can be captured") {
  const auto out = std::filesystem::temp_directory_path() /
                   ("mpiwasm-stdout-" + std::to_string(::getpid()) + ".txt");
  InstanceConfig cfg;
  cfg.stdout_file = out;
  auto r = harness::run_snapshot(harness::compile_fixture("hello.wat"), 1, 64, cfg);
  CHECK(r.result.exit_code() == 0);
  CHECK(harness::read_text(out).find("hello from rank 0") != std::string::npos);
  std::filesystem::remove(out);
}

TEST_CASE("instances are isolated from each other") {
  auto art = harness::compile_wat(R"((module
    (memory (export "memory") 1)
    (global $g (mut i32) (i32.const 0))
    (func (export "_start")
      (global.set $g (i32.add (global.get $g) (i32.const 1)))
      (i32.store (i32.const 16) (i32.add (i32.load (i32.const 16)) (global.get $g))))))");
  auto r = harness::run_snapshot(art, 4, 64);
  REQUIRE(r.result.exit_code() == 0);
  for (const auto& m : r.memory) CHECK(harness::i32_at(m, 16) == 1);
}
