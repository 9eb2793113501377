#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <thread>

#include "mpiwasm/handle_table.hpp"

using namespace mpiwasm;

TEST_CASE("predefined entries resolve and cannot be removed") {
  HandleTable<HostComm> t(2);
  t.add_predefined(0, HostComm{100});
  t.add_predefined(1, HostComm{101});
  CHECK(t.find(0) == HostComm{100});
  CHECK(t.is_predefined(1));
  CHECK_FALSE(t.remove(0).has_value());
  CHECK(t.find(0).has_value());
  CHECK_FALSE(t.find(2).has_value());
}

TEST_CASE("property: round trip and no reuse over random register/release sequences") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    HandleTable<HostRequest> t(16);
    std::map<std::int32_t, HostRequest> live;
    std::set<std::int32_t> ever;
    for (int step = 0; step < 2000; ++step) {
      if (live.empty() || rng() % 3 != 0) {
        HostRequest h{static_cast<std::intptr_t>(rng())};
        auto code = t.add(h);
        REQUIRE(code.has_value());
        CHECK(ever.insert(*code).second);
        CHECK(*code >= 16);
        live[*code] = h;
      } else {
        auto it = live.begin();
        std::advance(it, static_cast<long>(rng() % live.size()));
        CHECK(t.remove(it->first) == it->second);
        CHECK_FALSE(t.find(it->first).has_value());
        CHECK_FALSE(t.remove(it->first).has_value());
        live.erase(it);
      }
      if (step % 97 == 0) {
        for (auto& [code, h] : live) CHECK(t.find(code) == h);
      }
    }
    CHECK(t.size() == live.size());
  }
}

TEST_CASE("code space exhaustion is reported, not wrapped") {
  HandleTable<HostComm> t(std::numeric_limits<std::int32_t>::max() - 2);
  CHECK(t.add(HostComm{1}).has_value());
  CHECK(t.add(HostComm{2}).has_value());
  CHECK_FALSE(t.add(HostComm{3}).has_value());
}

TEST_CASE("concurrent readers alongside a writer") {
  HandleTable<HostDatatype> t(10);
  for (int i = 0; i < 10; ++i) t.add_predefined(i, HostDatatype{i * 7});
  std::atomic<bool> stop{false};
  std::atomic<long> bad{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 4; ++r) {
    readers.emplace_back([&] {
      while (!stop.load()) {
        for (int i = 0; i < 10; ++i) {
          if (t.find(i) != HostDatatype{i * 7}) ++bad;
        }
      }
    });
  }
  for (int i = 0; i < 20000; ++i) {
    auto c = t.add(HostDatatype{i});
    t.remove(*c);
  }
  stop = true;
  for (auto& th : readers) th.join();
  CHECK(bad.load() == 0);
}
