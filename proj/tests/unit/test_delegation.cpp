#include <doctest.h>

#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mock_backend.hpp"
#include "mpiwasm/hostcalls.hpp"

// Each hostcall may only write where its MPI contract says: out-params,
// receive buffers, statuses. Memory gets random bytes, the mock scribbles on
// every writable span it is handed, and the diff must stay inside the
// declared set.

using namespace mpiwasm;
namespace hc = mpiwasm::hostcalls;

namespace {

constexpr std::int32_t kInt = static_cast<std::int32_t>(abi::Datatype::int_);
constexpr std::int32_t kSum = static_cast<std::int32_t>(abi::Op::sum);

struct Range {
  std::uint32_t at;
  std::uint32_t len;
  bool input = false;  // also read by the call, keep its contents
};

struct Rig {
  std::vector<std::byte> memory = std::vector<std::byte>(3 * 65536);
  mock::MockBackend backend;
  Env env;
  HostcallContext ctx{env, backend, nullptr};
  std::mt19937 rng{7};

  Rig() {
    backend.scribble = true;
    env.memory = LinearMemoryView{memory.data(), memory.size()};
    env.bind_predefined(backend);
    noise();
    REQUIRE(hc::mpi_init(ctx, 0, 0) == 0);
  }

  void noise() {
    for (auto& b : memory) b = static_cast<std::byte>(rng() & 0xff);
  }

  // Returns the offsets that changed outside `allowed`, plus how many
  // changed inside.
  struct Diff {
    std::vector<std::size_t> stray;
    std::size_t inside = 0;
  };
  Diff call(const std::function<std::int32_t()>& fn, const std::vector<Range>& allowed,
            std::int32_t* rc = nullptr) {
    const std::vector<std::byte> before = memory;
    const std::int32_t r = fn();
    if (rc != nullptr) *rc = r;
    Diff d;
    for (std::size_t i = 0; i < memory.size(); ++i) {
      if (memory[i] == before[i]) continue;
      bool ok = false;
      for (const auto& a : allowed) ok = ok || (i >= a.at && i < std::size_t{a.at} + a.len);
      if (ok) {
        ++d.inside;
      } else {
        d.stray.push_back(i);
      }
    }
    return d;
  }
};

void expect_only(Rig& rig, const char* what, const std::function<std::int32_t()>& fn,
                 const std::vector<Range>& allowed, bool must_write = true) {
  const std::string name = what;
  CAPTURE(name);
  // fresh noise so a repeated result still shows up as a change
  for (const auto& a : allowed) {
    if (a.input) continue;
    for (std::uint32_t i = 0; i < a.len; ++i) rig.memory[a.at + i] = static_cast<std::byte>(rig.rng() & 0xff);
  }
  std::int32_t rc = -1;
  const auto d = rig.call(fn, allowed, &rc);
  CHECK(rc == abi::kSuccess);
  CHECK(d.stray.empty());
  if (!d.stray.empty()) MESSAGE("first stray write at " << d.stray.front());
  if (must_write) CHECK(d.inside > 0);
}

}  // namespace

TEST_CASE("each hostcall writes only its declared outputs") {
  Rig rig;
  auto& c = rig.ctx;

  expect_only(rig, "Initialized", [&] { return hc::mpi_initialized(c, 100); }, {{100, 4}});
  expect_only(rig, "Finalized", [&] { return hc::mpi_finalized(c, 104); }, {{104, 4}});
  expect_only(rig, "Comm_rank", [&] { return hc::mpi_comm_rank(c, abi::kCommWorld, 200); }, {{200, 4}});
  expect_only(rig, "Comm_size", [&] { return hc::mpi_comm_size(c, abi::kCommWorld, 204); }, {{204, 4}});
  expect_only(rig, "Type_size", [&] { return hc::mpi_type_size(c, kInt, 208); }, {{208, 4}});
  expect_only(rig, "Send", [&] { return hc::mpi_send(c, 4096, 100, kInt, 1, 0, 0); }, {}, false);
  expect_only(rig, "Recv", [&] { return hc::mpi_recv(c, 8192, 16, kInt, 1, 0, 0, 64); },
              {{8192, 64}, {64, 16}});
  expect_only(rig, "Recv, status ignored",
              [&] { return hc::mpi_recv(c, 8192, 16, kInt, 1, 0, 0, abi::kStatusIgnore); }, {{8192, 64}});
  expect_only(rig, "Isend", [&] { return hc::mpi_isend(c, 4096, 10, kInt, 1, 0, 0, 300); }, {{300, 4}});
  expect_only(rig, "Irecv", [&] { return hc::mpi_irecv(c, 8192, 10, kInt, 1, 0, 0, 304); },
              {{8192, 40}, {304, 4}});
  expect_only(rig, "Wait (send)", [&] { return hc::mpi_wait(c, 300, 80); }, {{300, 4, true}, {80, 16}});
  expect_only(rig, "Wait (recv)", [&] { return hc::mpi_wait(c, 304, abi::kStatusIgnore); }, {{304, 4, true}},
              false);

  REQUIRE(hc::mpi_isend(c, 4096, 4, kInt, 1, 0, 0, 400) == 0);
  REQUIRE(hc::mpi_irecv(c, 12288, 4, kInt, 1, 0, 0, 404) == 0);
  expect_only(rig, "Waitall", [&] { return hc::mpi_waitall(c, 2, 400, 500); }, {{400, 8, true}, {500, 32}});

  expect_only(rig, "Sendrecv",
              [&] { return hc::mpi_sendrecv(c, 4096, 10, kInt, 1, 0, 12288, 10, kInt, 1, 0, 0, 96); },
              {{12288, 40}, {96, 16}});
  expect_only(rig, "Barrier", [&] { return hc::mpi_barrier(c, 0); }, {}, false);
  expect_only(rig, "Bcast", [&] { return hc::mpi_bcast(c, 16384, 8, kInt, 0, 0); }, {{16384, 32}});
  expect_only(rig, "Reduce", [&] { return hc::mpi_reduce(c, 4096, 20480, 8, kInt, kSum, 0, 0); },
              {{20480, 32}});
  expect_only(rig, "Allreduce", [&] { return hc::mpi_allreduce(c, 4096, 20480, 8, kInt, kSum, 0); },
              {{20480, 32}});
  // world of two: root-side receive areas hold two blocks
  expect_only(rig, "Gather", [&] { return hc::mpi_gather(c, 4096, 4, kInt, 24576, 4, kInt, 0, 0); },
              {{24576, 32}});
  expect_only(rig, "Allgather", [&] { return hc::mpi_allgather(c, 4096, 4, kInt, 24576, 4, kInt, 0); },
              {{24576, 32}});
  expect_only(rig, "Scatter", [&] { return hc::mpi_scatter(c, 4096, 4, kInt, 24576, 4, kInt, 0, 0); },
              {{24576, 16}});
  expect_only(rig, "Alltoall", [&] { return hc::mpi_alltoall(c, 4096, 4, kInt, 24576, 4, kInt, 0); },
              {{24576, 32}});

  REQUIRE(hc::mpi_recv(c, 8192, 4, kInt, 1, 0, 0, 64) == 0);
  expect_only(rig, "Get_count", [&] { return hc::mpi_get_count(c, 64, kInt, 600); }, {{600, 4}, {64, 16, true}});
  expect_only(rig, "Comm_split", [&] { return hc::mpi_comm_split(c, 0, 1, 0, 700); }, {{700, 4}});
  expect_only(rig, "Comm_dup", [&] { return hc::mpi_comm_dup(c, 0, 704); }, {{704, 4}});
  expect_only(rig, "Comm_free", [&] { return hc::mpi_comm_free(c, 704); }, {{704, 4, true}});
  expect_only(rig, "Wtime", [&] { return static_cast<std::int32_t>(hc::mpi_wtime(c) < 0); }, {}, false);
  expect_only(rig, "Wtick", [&] { return static_cast<std::int32_t>(hc::mpi_wtick(c) <= 0); }, {}, false);
  expect_only(rig, "Finalize", [&] { return hc::mpi_finalize(c); }, {}, false);
}

TEST_CASE("property: a failing hostcall leaves guest memory untouched") {
  Rig rig;
  auto& c = rig.ctx;
  std::mt19937 rng(42);
  const std::uint32_t len = static_cast<std::uint32_t>(rig.memory.size());

  // Addresses near the end of memory or far outside, counts that overflow,
  // bad handles. Anything that comes back non-zero must not have written.
  auto addr = [&]() -> std::uint32_t {
    switch (rng() % 4) {
      case 0: return len - (rng() % 64);
      case 1: return len + (rng() % 4096);
      case 2: return 0xffffffffu - (rng() % 64);
      default: return rng() % len;
    }
  };
  auto count = [&]() -> std::int32_t {
    switch (rng() % 4) {
      case 0: return -static_cast<std::int32_t>(rng() % 5) - 1;
      case 1: return 0x7fffffff - static_cast<std::int32_t>(rng() % 8);
      case 2: return static_cast<std::int32_t>(rng() % 70000);
      default: return static_cast<std::int32_t>(rng() % 16);
    }
  };
  auto handle = [&]() -> std::int32_t {
    return rng() % 3 == 0 ? static_cast<std::int32_t>(rng() % 40) - 20 : 0;
  };
  auto type = [&]() -> std::int32_t { return rng() % 3 == 0 ? static_cast<std::int32_t>(rng() % 30) - 10 : kInt; };

  std::vector<std::function<std::int32_t()>> calls = {
      [&] { return hc::mpi_recv(c, addr(), count(), type(), 1, 0, handle(), addr()); },
      [&] { return hc::mpi_irecv(c, addr(), count(), type(), 1, 0, handle(), addr()); },
      [&] { return hc::mpi_isend(c, addr(), count(), type(), 1, 0, handle(), addr()); },
      [&] { return hc::mpi_wait(c, addr(), addr()); },
      [&] { return hc::mpi_waitall(c, count(), addr(), addr()); },
      [&] {
        return hc::mpi_sendrecv(c, addr(), count(), type(), 1, 0, addr(), count(), type(), 1, 0, handle(),
                                addr());
      },
      [&] { return hc::mpi_bcast(c, addr(), count(), type(), 0, handle()); },
      [&] { return hc::mpi_allreduce(c, addr(), addr(), count(), type(), kSum, handle()); },
      [&] { return hc::mpi_gather(c, addr(), count(), type(), addr(), count(), type(), 0, handle()); },
      [&] { return hc::mpi_alltoall(c, addr(), count(), type(), addr(), count(), type(), handle()); },
      [&] { return hc::mpi_get_count(c, addr(), type(), addr()); },
      [&] { return hc::mpi_comm_rank(c, handle(), addr()); },
      [&] { return hc::mpi_comm_split(c, handle(), 1, 0, addr()); },
      [&] { return hc::mpi_comm_free(c, addr()); },
  };

  int failures = 0;
  int dirty = 0;
  std::string first;
  for (int i = 0; i < 3000; ++i) {
    const std::size_t which = rng() % calls.size();
    std::int32_t rc = 0;
    const auto d = rig.call(calls[which], {}, &rc);
    if (rc == abi::kSuccess) continue;
    ++failures;
    if (!d.stray.empty()) {
      ++dirty;
      if (first.empty()) first = "call #" + std::to_string(which) + " rc " + std::to_string(rc);
    }
  }
  INFO(first);
  CHECK(failures > 1500);
  CHECK(dirty == 0);
}
