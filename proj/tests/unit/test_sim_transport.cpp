#include <doctest.h>

#include <cstring>
#include <thread>
#include <vector>

#include "mpiwasm/transport/sim.hpp"

using namespace mpiwasm;
using namespace mpiwasm::transport;

namespace {

// Runs body(rank, backend) on n threads; returns the group.
template <class F>
std::shared_ptr<RankGroup> run_ranks(std::int32_t n, F body) {
  auto group = std::make_shared<RankGroup>(n);
  std::vector<std::thread> threads;
  for (std::int32_t r = 0; r < n; ++r) {
    threads.emplace_back([&, r] {
      SimBackend b(group, r);
      b.init();
      try {
        body(r, b);
      } catch (const GroupAborted&) {
      }
      b.cancel_pending();
      group->rank_finished(r);
    });
  }
  for (auto& t : threads) t.join();
  return group;
}

MutBytes bytes(std::vector<std::int32_t>& v) { return std::as_writable_bytes(std::span(v)); }
ConstBytes cbytes(const std::vector<std::int32_t>& v) { return std::as_bytes(std::span(v)); }

}  // namespace

TEST_CASE("FIFO per channel with wildcard tag") {
  std::vector<std::int32_t> got;
  run_ranks(2, [&](std::int32_t r, SimBackend& b) {
    auto w = b.world_comm();
    auto dt = b.datatype(abi::Datatype::int_);
    if (r == 0) {
      for (std::int32_t i = 0; i < 20; ++i) {
        std::vector<std::int32_t> v{i};
        b.send(cbytes(v), 1, dt, 1, i % 3, w);
      }
    } else {
      for (int i = 0; i < 20; ++i) {
        std::vector<std::int32_t> v{-1};
        auto info = b.recv(bytes(v), 1, dt, 0, abi::kAnyTag, w);
        CHECK(info.tag == v[0] % 3);
        got.push_back(v[0]);
      }
    }
  });
  REQUIRE(got.size() == 20);
  for (int i = 0; i < 20; ++i) CHECK(got[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("tag selects among queued messages") {
  run_ranks(2, [&](std::int32_t r, SimBackend& b) {
    auto w = b.world_comm();
    auto dt = b.datatype(abi::Datatype::int_);
    if (r == 0) {
      std::vector<std::int32_t> a{1}, c{2};
      b.send(cbytes(a), 1, dt, 1, 10, w);
      b.send(cbytes(c), 1, dt, 1, 20, w);
    } else {
      std::vector<std::int32_t> v{0};
      b.recv(bytes(v), 1, dt, 0, 20, w);
      CHECK(v[0] == 2);
      b.recv(bytes(v), 1, dt, abi::kAnySource, 10, w);
      CHECK(v[0] == 1);
    }
  });
}

TEST_CASE("truncation writes the capacity and flags the receive") {
  run_ranks(2, [&](std::int32_t r, SimBackend& b) {
    auto w = b.world_comm();
    auto dt = b.datatype(abi::Datatype::int_);
    if (r == 0) {
      std::vector<std::int32_t> v{1, 2, 3, 4};
      b.send(cbytes(v), 4, dt, 1, 0, w);
    } else {
      std::vector<std::int32_t> v{0, 0, 9};
      auto info = b.recv(std::as_writable_bytes(std::span(v)).first(8), 2, dt, 0, 0, w);
      CHECK(info.truncated);
      CHECK(info.count_bytes == 8);
      CHECK(v == std::vector<std::int32_t>{1, 2, 9});
    }
  });
}

TEST_CASE("copy accounting: exactly two per delivered message") {
  auto group = run_ranks(4, [&](std::int32_t r, SimBackend& b) {
    auto w = b.world_comm();
    auto dt = b.datatype(abi::Datatype::byte);
    std::vector<std::int32_t> v(256, r);
    for (int i = 0; i < 10; ++i) {
      b.sendrecv(cbytes(v), 1024, dt, (r + 1) % 4, 0, bytes(v), 1024, dt, (r + 3) % 4, 0, w);
    }
    b.allreduce(cbytes(v), bytes(v), 4, b.datatype(abi::Datatype::int_),
                b.op(abi::Op::sum), w);
  });
  std::uint64_t total = 0;
  for (std::int32_t r = 0; r < 4; ++r) total += group->copies(r);
  CHECK(total == 2 * group->messages_delivered());
  CHECK(group->messages_delivered() >= 40);
}

TEST_CASE("alltoall with three ranks") {
  std::vector<std::vector<std::int32_t>> out(3);
  run_ranks(3, [&](std::int32_t r, SimBackend& b) {
    std::vector<std::int32_t> s{10 * r, 10 * r + 1, 10 * r + 2}, d(3, -1);
    auto dt = b.datatype(abi::Datatype::int_);
    b.alltoall(cbytes(s), 1, dt, bytes(d), 1, dt, b.world_comm());
    out[static_cast<std::size_t>(r)] = d;
  });
  for (std::int32_t r = 0; r < 3; ++r) {
    CHECK(out[static_cast<std::size_t>(r)] == std::vector<std::int32_t>{r, 10 + r, 20 + r});
  }
}

TEST_CASE("bcast of 1 MiB is byte-identical everywhere") {
  std::vector<std::vector<std::int32_t>> out(4);
  run_ranks(4, [&](std::int32_t r, SimBackend& b) {
    std::vector<std::int32_t> v(262144, 0);
    if (r == 0) {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<std::int32_t>(i * 2654435761u);
    }
    b.bcast(bytes(v), 1 << 20, b.datatype(abi::Datatype::byte), 0, b.world_comm());
    out[static_cast<std::size_t>(r)] = std::move(v);
  });
  for (int r = 1; r < 4; ++r) CHECK(out[static_cast<std::size_t>(r)] == out[0]);
}

TEST_CASE("comm_split orders by key and isolates traffic") {
  std::vector<std::array<std::int32_t, 3>> seen(6);
  run_ranks(6, [&](std::int32_t r, SimBackend& b) {
    auto sub = b.comm_split(b.world_comm(), r % 2, -r);
    REQUIRE(sub.has_value());
    std::vector<std::int32_t> one{r}, sum{0};
    b.allreduce(cbytes(one), bytes(sum), 1, b.datatype(abi::Datatype::int_), b.op(abi::Op::sum), *sub);
    seen[static_cast<std::size_t>(r)] = {b.comm_rank(*sub), b.comm_size(*sub), sum[0]};
    b.comm_free(*sub);
  });
  // evens {0,2,4} reversed by key: 4 -> 0, 2 -> 1, 0 -> 2
  CHECK(seen[4][0] == 0);
  CHECK(seen[2][0] == 1);
  CHECK(seen[0][0] == 2);
  CHECK(seen[5][0] == 0);
  for (int r = 0; r < 6; ++r) {
    CHECK(seen[static_cast<std::size_t>(r)][1] == 3);
    CHECK(seen[static_cast<std::size_t>(r)][2] == (r % 2 == 0 ? 6 : 9));
  }
}

TEST_CASE("split with MPI_UNDEFINED yields no communicator") {
  run_ranks(3, [&](std::int32_t r, SimBackend& b) {
    auto sub = b.comm_split(b.world_comm(), r == 1 ? abi::kUndefined : 0, 0);
    CHECK(sub.has_value() == (r != 1));
    if (sub) {
      CHECK(b.comm_size(*sub) == 2);
      b.comm_free(*sub);
    }
  });
}

TEST_CASE("deadlock is detected exactly and aborts with code 1") {
  auto group = run_ranks(3, [&](std::int32_t, SimBackend& b) {
    std::vector<std::int32_t> v{0};
    b.recv(bytes(v), 1, b.datatype(abi::Datatype::int_), abi::kAnySource, 0, b.world_comm());
  });
  CHECK(group->aborted());
  CHECK(group->abort_code() == 1);
  CHECK(group->abort_reason().find("deadlock") != std::string::npos);
}

TEST_CASE("a receive whose sender already exited is a deadlock, not a hang") {
  auto group = run_ranks(2, [&](std::int32_t r, SimBackend& b) {
    if (r == 1) {
      std::vector<std::int32_t> v{0};
      b.recv(bytes(v), 1, b.datatype(abi::Datatype::int_), 0, 0, b.world_comm());
    }
  });
  CHECK(group->aborted());
  CHECK(group->abort_code() == 1);
}

TEST_CASE("abort wakes blocked peers with the abort code") {
  std::atomic<int> woke{0};
  auto group = run_ranks(3, [&](std::int32_t r, SimBackend& b) {
    if (r == 2) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      b.abort(b.world_comm(), 42);
    }
    std::vector<std::int32_t> v{0};
    try {
      b.recv(bytes(v), 1, b.datatype(abi::Datatype::int_), 2, 0, b.world_comm());
    } catch (const GroupAborted& e) {
      CHECK(e.code() == 42);
      ++woke;
    }
  });
  CHECK(group->abort_code() == 42);
  CHECK(woke.load() == 2);
}

TEST_CASE("nonblocking receive completes out of posting order") {
  run_ranks(2, [&](std::int32_t r, SimBackend& b) {
    auto w = b.world_comm();
    auto dt = b.datatype(abi::Datatype::int_);
    if (r == 1) {
      std::vector<std::int32_t> a{0}, c{0};
      auto ra = b.irecv(bytes(a), 1, dt, 0, 1, w);
      auto rc = b.irecv(bytes(c), 1, dt, 0, 2, w);
      auto info = b.wait(rc);
      CHECK(info.tag == 2);
      b.wait(ra);
      CHECK(a[0] == 100);
      CHECK(c[0] == 200);
    } else {
      std::vector<std::int32_t> c{200}, a{100};
      b.send(cbytes(c), 1, dt, 1, 2, w);
      b.send(cbytes(a), 1, dt, 1, 1, w);
    }
  });
}
