#include <doctest.h>

#include "bounds_fuzz.hpp"
#include "mock_backend.hpp"

using namespace mpiwasm;

TEST_CASE("error classes from the errors fixture") {
  auto snap = harness::run_snapshot(harness::compile_fixture("errors.wat"), 1, 256);
  REQUIRE(snap.result.exit_code() == 0);
  const auto& m = snap.memory[0];
  auto rc = [&](int slot) { return harness::i32_at(m, 16 + 4 * slot); };
  CHECK(rc(0) == abi::kErrOther);   // before init
  CHECK(rc(1) == abi::kErrComm);
  CHECK(rc(2) == abi::kErrType);
  CHECK(rc(3) == abi::kErrOp);
  CHECK(rc(4) == abi::kErrArg);     // buffer past memory
  CHECK(rc(5) == abi::kErrArg);     // negative count
  CHECK(rc(6) == abi::kErrArg);     // peer out of range
  CHECK(rc(7) == abi::kErrArg);     // status past memory
  CHECK(rc(8) == abi::kErrType);    // DATATYPE_NULL
  CHECK(rc(9) == abi::kErrOther);   // truncation
  CHECK(harness::i32_at(m, 108) == abi::kErrOther);
  CHECK(harness::i32_at(m, 112) == 8);  // what arrived, in bytes
  CHECK(rc(10) == abi::kErrComm);   // COMM_WORLD cannot be freed
  CHECK(rc(11) == abi::kErrOp);     // BAND on FLOAT
  CHECK(rc(12) == abi::kErrArg);    // negative tag
  CHECK(rc(13) == abi::kErrArg);    // wraps past 4 GiB
}

TEST_CASE("unshipped MPI imports link to a stub returning ERR_OTHER") {
  auto snap = harness::run_snapshot(harness::compile_fixture("unknown_import.wat"), 1, 64);
  CHECK(snap.result.exit_code() == 0);
  CHECK(harness::i32_at(snap.memory[0], 16) == abi::kErrOther);
}

TEST_CASE("Alloc_mem needs malloc and free exports") {
  auto snap = harness::run_snapshot(harness::compile_fixture("alloc_no_exports.wat"), 1, 64);
  CHECK(snap.result.exit_code() == 0);
  CHECK(harness::i32_at(snap.memory[0], 16) == abi::kErrOther);
}

TEST_CASE("Alloc_mem through the guest allocator, with growth") {
  for (int n : {1, 2, 3}) {
    CAPTURE(n);
    auto snap = harness::run_snapshot(harness::compile_fixture("alloc_mem.wat"), n, 64);
    REQUIRE(snap.result.exit_code() == 0);
    for (int r = 0; r < n; ++r) {
      const auto& m = snap.memory[static_cast<std::size_t>(r)];
      CHECK(harness::i32_at(m, 16) >= 65536);
      CHECK(harness::i32_at(m, 20) == 1);
      CHECK(harness::i32_at(m, 24) == 1000 + (r + n - 1) % n);
    }
  }
}

TEST_CASE("bounds: random spans against 64-bit arithmetic") {
  auto cases = bounds_fuzz::generate(5, 2000);
  auto out = bounds_fuzz::run(cases);
  CHECK(out.exit_code == 0);
  INFO(out.first_mismatch);
  CHECK(out.mismatches == 0);
  CHECK(out.foreign_spans == 0);
  CHECK(out.out_of_bounds > 200);
  CHECK(out.out_of_bounds < out.cases);
}

TEST_CASE("direct hostcalls hand the backend guest memory itself") {
  std::vector<std::byte> memory(3 * 65536);
  mock::MockBackend backend;
  Env env;
  env.memory = LinearMemoryView{memory.data(), memory.size()};
  env.bind_predefined(backend);
  HostcallContext ctx{env, backend, nullptr};
  REQUIRE(hostcalls::mpi_init(ctx, 0, 0) == 0);

  CHECK(hostcalls::mpi_send(ctx, 4096, 100, 2, 1, 0, 0) == 0);
  CHECK(hostcalls::mpi_recv(ctx, 8192, 16, 4, 1, 0, 0, 64) == 0);
  CHECK(hostcalls::mpi_bcast(ctx, 196600, 8, 0, 0, 0) == 0);
  CHECK(hostcalls::mpi_bcast(ctx, 196600, 9, 0, 0, 0) == abi::kErrArg);
  REQUIRE(backend.seen.size() == 3);
  CHECK(backend.seen[0].data == memory.data() + 4096);
  CHECK(backend.seen[0].size == 400);
  CHECK(backend.seen[1].data == memory.data() + 8192);
  CHECK(backend.seen[1].size == 128);
  CHECK(backend.seen[2].data == memory.data() + 196600);
  CHECK(env.counters.host_copies == 0);

  abi::StatusWire st;
  std::memcpy(&st, memory.data() + 64, sizeof st);
  CHECK(st.count_bytes == 128);
  CHECK(st.error == 0);
  CHECK(hostcalls::mpi_finalize(ctx) == 0);
  CHECK(hostcalls::mpi_send(ctx, 4096, 1, 2, 1, 0, 0) == abi::kErrOther);
}
