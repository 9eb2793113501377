#include <doctest.h>

#include "path_fuzz.hpp"

using namespace mpiwasm;
namespace fs = std::filesystem;

TEST_CASE("guest names are basenames with numeric suffixes") {
  path_fuzz::Tree t("names");
  fs::create_directories(t.base / "x" / "root");
  fs::create_directories(t.base / "y" / "root");
  PreopenTable table;
  CHECK(table.map_preopen(t.root, Rights::read_write).guest_name == "root");
  CHECK(table.map_preopen(t.base / "x" / "root", Rights::read_only).guest_name == "root.2");
  CHECK(table.map_preopen(t.base / "y" / "root", Rights::read_only).guest_name == "root.3");
  CHECK(table.entries()[1].guest_root() == "/root.2");
  CHECK(table.resolve_path("/root.2").host_path == fs::canonical(t.base / "x" / "root"));
  CHECK_THROWS_AS(table.map_preopen(t.root / "in.txt", Rights::read_only), NotADirectory);
  CHECK_THROWS_AS(table.map_preopen(t.base / "missing", Rights::read_only), NotADirectory);
}

TEST_CASE("resolution stays inside the preopen") {
  path_fuzz::Tree t("resolve");
  PreopenTable table;
  table.map_preopen(t.root, Rights::read_only);
  const fs::path root = fs::canonical(t.root);

  CHECK(table.resolve_path("/root/in.txt").host_path == root / "in.txt");
  CHECK(table.resolve_path("/root/a/../in.txt").host_path == root / "in.txt");
  CHECK(table.resolve_path("/root/./a//b/in.txt").host_path == root / "a" / "b" / "in.txt");
  CHECK(table.resolve_path("/root/inner/in.txt").host_path == root / "a" / "in.txt");
  CHECK(table.resolve_path("/root/a/ok.txt").host_path == root / "in.txt");
  CHECK(table.resolve_path("/root/new.txt").host_path == root / "new.txt");

  for (const char* bad : {"/root/..", "/root/../s.txt", "/root/a/../../s.txt", "/root/up/s.txt",
                          "/root/abs/s.txt", "/root/deep/s.txt", "/root/chain", "/root/pw",
                          "/root/a/b/back/in.txt", "/etc/passwd", "/", "root/in.txt", "",
                          "/rootx/in.txt", "/root2/in.txt"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(table.resolve_path(bad), NotCapable);
  }
  CHECK_THROWS_AS(table.resolve_path(std::string_view("/root/in.txt\0/../../s.txt", 25)), NotCapable);
}

TEST_CASE("read-only preopens refuse write access") {
  path_fuzz::Tree t("rights");
  PreopenTable table;
  table.map_preopen(t.root, Rights::read_only);
  table.map_preopen(t.base / "secret", Rights::read_write);
  CHECK_NOTHROW(table.resolve_path("/root/in.txt", Access::read));
  CHECK_THROWS_AS(table.resolve_path("/root/in.txt", Access::write), RightsViolation);
  CHECK(table.resolve_path("/secret/s.txt", Access::write).rights == Rights::read_write);
}

TEST_CASE("-d flag parsing") {
  CHECK(parse_dir_flag("/data") == std::pair<fs::path, Rights>{"/data", Rights::read_write});
  CHECK(parse_dir_flag("/data:ro") == std::pair<fs::path, Rights>{"/data", Rights::read_only});
  CHECK(parse_dir_flag("/data:rw") == std::pair<fs::path, Rights>{"/data", Rights::read_write});
  CHECK(parse_dir_flag("a:b") == std::pair<fs::path, Rights>{"a:b", Rights::read_write});
  CHECK_THROWS(parse_dir_flag(":ro"));
  CHECK_THROWS(parse_dir_flag(""));
}

TEST_CASE("path_within compares whole components") {
  CHECK(path_within("/a/b", "/a/b"));
  CHECK(path_within("/a/b", "/a/b/c"));
  CHECK(path_within("/a/b/", "/a/b/c"));
  CHECK_FALSE(path_within("/a/b", "/a/bc"));
  CHECK_FALSE(path_within("/a/b", "/a"));
}

TEST_CASE("guest WASI access through a preopen") {
  path_fuzz::Tree t("wasi");
  InstanceConfig cfg;
  cfg.preopens = {{t.root, Rights::read_write}};
  auto snap = harness::run_snapshot(harness::compile_fixture("fs.wat"), 1, 2048, cfg);
  REQUIRE(snap.result.exit_code() == 0);
  const auto& m = snap.memory[0];
  CHECK(harness::i32_at(m, 16) == 5);
  CHECK(std::string(reinterpret_cast<const char*>(m.data() + 512), 5) == "/root");
  CHECK(harness::i32_at(m, 20) == 0);
  CHECK(harness::i32_at(m, 24) == 8);
  CHECK(std::memcmp(m.data() + 1024, path_fuzz::kInside, 8) == 0);
  CHECK(harness::i32_at(m, 28) == 0);
  CHECK(path_fuzz::file_is_secret(t.root / "out.txt") == false);
  CHECK(fs::file_size(t.root / "out.txt") == 17);
  CHECK(harness::i32_at(m, 32) != 0);  // ../escape.txt
  CHECK(harness::i32_at(m, 36) != 0);  // /etc/passwd
}

TEST_CASE("read-only preopen refuses creation from the guest") {
  path_fuzz::Tree t("wasi-ro");
  InstanceConfig cfg;
  cfg.preopens = {{t.root, Rights::read_only}};
  auto snap = harness::run_snapshot(harness::compile_fixture("fs.wat"), 1, 2048, cfg);
  REQUIRE(snap.result.exit_code() == 0);
  CHECK(harness::i32_at(snap.memory[0], 20) == 0);
  CHECK(harness::i32_at(snap.memory[0], 28) != 0);
  CHECK_FALSE(fs::exists(t.root / "out.txt"));
}

TEST_CASE("adversarial paths never reach a secret") {
  path_fuzz::Tree t("fuzz");
  auto paths = path_fuzz::generate(11, 500);
  paths.insert(paths.end(), {"in.txt", "a/in.txt", "inner/in.txt", "a/ok.txt", "self/self/in.txt"});
  auto out = path_fuzz::run(t, paths);
  CHECK(out.exit_code == 0);
  for (const auto& e : out.escaped) MESSAGE(e);
  CHECK(out.guest_escapes == 0);
  CHECK(out.resolver_escapes == 0);
  // The fuzz has to actually reach files, or it proves nothing.
  CHECK(out.guest_inside_reads >= 5);
  CHECK(out.resolver_accepted > 20);
}
