#include <doctest.h>

#include <random>

#include "harness.hpp"
#include "mpiwasm/engine.hpp"
#include "mpiwasm/wasm_binary.hpp"

using namespace mpiwasm;

TEST_CASE("imports, exports and memory of a fixture") {
  auto wasm = wat_to_wasm(harness::read_text(harness::fixture("pingpong.wat")));
  ModuleSummary s = scan_module(wasm);
  int env_imports = 0;
  bool has_exit = false;
  for (const auto& i : s.imports) {
    if (i.module == "env") {
      ++env_imports;
      CHECK(i.kind == ExternKind::func);
    }
    if (i.module == "wasi_snapshot_preview1" && i.name == "proc_exit") has_exit = true;
  }
  CHECK(env_imports == 10);
  CHECK(has_exit);
  CHECK(s.has_export("memory", ExternKind::memory));
  CHECK(s.has_export("_start", ExternKind::func));
  CHECK_FALSE(s.has_export("_start", ExternKind::memory));
  REQUIRE(s.memories.size() == 1);
  CHECK(s.memories[0].min_pages == 1);
  CHECK_FALSE(s.memories[0].max_pages.has_value());
}

TEST_CASE("memory limit flags") {
  auto s = scan_module(wat_to_wasm("(module (memory 2 10))"));
  REQUIRE(s.memories.size() == 1);
  CHECK(s.memories[0].max_pages == 10u);
  auto imp = scan_module(wat_to_wasm("(module (import \"a\" \"m\" (memory 3)))"));
  REQUIRE(imp.imports.size() == 1);
  CHECK(imp.imports[0].kind == ExternKind::memory);
  CHECK(imp.imports[0].memory->min_pages == 3);
}

TEST_CASE("bad headers are malformed") {
  std::vector<std::uint8_t> empty;
  CHECK_THROWS_AS(scan_module(empty), MalformedModule);
  std::vector<std::uint8_t> elf{0x7f, 'E', 'L', 'F', 1, 0, 0, 0};
  CHECK_THROWS_AS(scan_module(elf), MalformedModule);
  std::vector<std::uint8_t> v2{0, 'a', 's', 'm', 2, 0, 0, 0};
  CHECK_THROWS_AS(scan_module(v2), MalformedModule);
  std::vector<std::uint8_t> section_overrun{0, 'a', 's', 'm', 1, 0, 0, 0, 2, 0x7f};
  CHECK_THROWS_AS(scan_module(section_overrun), MalformedModule);
}

TEST_CASE("load_module rejects shared and oversize memories") {
  Engine& e = default_engine();
  CHECK_THROWS_AS(load_module(e, wat_to_wasm(harness::read_text(harness::fixture("shared_memory.wat")))),
                  UnsupportedFeature);
  std::vector<std::uint8_t> garbage{0, 'a', 's', 'm', 1, 0, 0, 0, 1, 1, 0xff};
  CHECK_THROWS_AS(load_module(e, garbage), MalformedModule);
}

TEST_CASE("fuzz: mutated modules never crash the scanner") {
  auto base = wat_to_wasm(harness::read_text(harness::fixture("collectives.wat")));
  std::mt19937_64 rng(3);
  int rejected = 0;
  for (int i = 0; i < 3000; ++i) {
    auto m = base;
    const int flips = 1 + static_cast<int>(rng() % 8);
    for (int f = 0; f < flips; ++f) m[rng() % m.size()] = static_cast<std::uint8_t>(rng());
    if (rng() % 4 == 0) m.resize(rng() % m.size());
    try {
      (void)scan_module(m);
    } catch (const MalformedModule&) {
      ++rejected;
    }
  }
  CHECK(rejected > 0);
}
