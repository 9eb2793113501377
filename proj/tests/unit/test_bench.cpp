#include <doctest.h>

#include <sstream>
#include <thread>

#include "harness.hpp"
#include "mpiwasm/bench.hpp"

using namespace mpiwasm;

namespace {

const ModuleArtifact& guest() {
  static ArtifactCache cache(default_engine(), std::nullopt);
  static const ModuleArtifact g = bench::load_guest(default_engine(), cache);
  return g;
}

}  // namespace

TEST_CASE("every suite produces one timed row per size") {
  const std::vector<std::uint64_t> sizes = {1, 1024, 65536};
  for (auto suite : bench::all_suites()) {
    CAPTURE(bench::suite_name(suite));
    for (int n : {2, 4}) {
      auto rows = bench::run_bench(default_engine(), guest(), suite, sizes, {n, 5, nullptr});
      REQUIRE(rows.size() == sizes.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].suite == bench::suite_name(suite));
        // allreduce moves whole INTs, at least one
        const std::uint64_t want = suite == bench::Suite::allreduce ? std::max<std::uint64_t>(4, sizes[i] / 4 * 4)
                                                                    : sizes[i];
        CHECK(rows[i].msg_bytes == want);
        CHECK(rows[i].ranks == n);
        CHECK(rows[i].iter == 5);
        CHECK(rows[i].usec_min > 0);
        CHECK(rows[i].usec_min <= rows[i].usec_avg);
        CHECK(rows[i].usec_avg <= rows[i].usec_max);
        CHECK(rows[i].rank_sum == n * (n - 1) / 2);
      }
    }
  }
}

TEST_CASE("csv layout") {
  std::vector<bench::Row> rows{{"pingpong", 8, 2, 10, 1.5, 1.0, 2.0, 1}};
  std::ostringstream os;
  bench::write_csv(os, rows);
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  std::getline(is, line);
  CHECK(header == bench::kCsvHeader);
  CHECK(line.rfind("pingpong,8,2,10,", 0) == 0);
  CHECK(std::count(line.begin(), line.end(), ',') == 6);
}

TEST_CASE("suite names round-trip") {
  for (auto s : bench::all_suites()) CHECK(bench::parse_suite(bench::suite_name(s)) == s);
  CHECK_FALSE(bench::parse_suite("allgatherv").has_value());
  const auto sizes = bench::default_sizes();
  CHECK(sizes.front() == 1);
  CHECK(sizes.back() == 4u << 20);
  CHECK(sizes.size() == 23);
}

TEST_CASE("translation probe covers each datatype and size") {
  const std::vector<std::uint64_t> sizes = {8, 4096};
  auto rows = bench::run_translation_probe(default_engine(), guest(), bench::probe_datatypes(), sizes, 20);
  CHECK(rows.size() == bench::probe_datatypes().size() * sizes.size());
  for (const auto& r : rows) {
    CAPTURE(r.datatype);
    CHECK(r.count >= 20);
    CHECK(r.median_ns > 0);
    CHECK(r.median_ns <= r.p99_ns);
  }
}

TEST_CASE("timing starts after instantiation") {
  // a 60 ms stall in the post-instantiation hook must not show up in any sample
  bool fired = false;
  bench::RunOptions opts{2, 5, [&] {
                           fired = true;
                           std::this_thread::sleep_for(std::chrono::milliseconds(60));
                         }};
  auto rows = bench::run_bench(default_engine(), guest(), bench::Suite::pingpong, {64}, opts);
  CHECK(fired);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].usec_max < 60000.0);
}
