#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "harness.hpp"

using namespace mpiwasm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mpiwasm-cache-test-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(counter()++));
    fs::remove_all(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

ValidatedModule hello() {
  return load_module(default_engine(), wat_to_wasm(harness::read_text(harness::fixture("hello.wat"))));
}

}  // namespace

TEST_CASE("miss then hit; the hit runs") {
  TempDir d;
  ArtifactCache cache(default_engine(), d.path);
  auto first = cache.compile_or_fetch(hello());
  CHECK_FALSE(first.from_cache);
  CHECK(fs::exists(cache.artifact_path(first.module_hash)));
  auto second = cache.compile_or_fetch(hello());
  CHECK(second.from_cache);
  CHECK(second.module_hash == first.module_hash);
  CHECK(cache.stats().compilations == 1);
  CHECK(cache.stats().hits == 1);
  auto snap = harness::run_snapshot(second, 2);
  CHECK(snap.result.exit_code() == 0);
}

TEST_CASE("a fresh cache object finds the artifact on disk") {
  TempDir d;
  { ArtifactCache(default_engine(), d.path).compile_or_fetch(hello()); }
  ArtifactCache again(default_engine(), d.path);
  CHECK(again.compile_or_fetch(hello()).from_cache);
  CHECK(again.stats().compilations == 0);
}

TEST_CASE("corrupt artifacts are recompiled and overwritten") {
  TempDir d;
  ArtifactCache cache(default_engine(), d.path);
  auto a = cache.compile_or_fetch(hello());
  const fs::path p = cache.artifact_path(a.module_hash);

  SUBCASE("flipped payload byte") {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(fs::file_size(p) / 2));
    f.put('\x5a');
  }
  SUBCASE("truncated") { fs::resize_file(p, fs::file_size(p) / 3); }
  SUBCASE("garbage header") {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << "not an artifact at all";
  }

  auto b = cache.compile_or_fetch(hello());
  CHECK_FALSE(b.from_cache);
  CHECK(cache.stats().corrupt_recoveries == 1);
  CHECK_NOTHROW(ArtifactCache::read_artifact(p));
  CHECK(cache.compile_or_fetch(hello()).from_cache);
}

TEST_CASE("read_artifact validates header, length and digest") {
  TempDir d;
  fs::create_directories(d.path);
  const fs::path p = d.path / "x.art";
  ArtifactCache::write_artifact(p, {1, 2, 3, 4, 5});
  CHECK(ArtifactCache::read_artifact(p) == std::vector<std::uint8_t>{1, 2, 3, 4, 5});
  fs::resize_file(p, fs::file_size(p) + 1);
  CHECK_THROWS_AS(ArtifactCache::read_artifact(p), CacheCorrupt);
}

TEST_CASE("concurrent cold compiles of one module leave one valid artifact") {
  TempDir d;
  std::vector<std::thread> ts;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    ts.emplace_back([&] {
      ArtifactCache c(default_engine(), d.path);
      if (c.compile_or_fetch(hello()).module) ++ok;
    });
  }
  for (auto& t : ts) t.join();
  CHECK(ok == 8);
  int arts = 0;
  for (auto& e : fs::directory_iterator(d.path)) {
    CHECK(e.path().extension() == ".art");  // no temp files left behind
    ++arts;
  }
  CHECK(arts == 1);
  ArtifactCache c(default_engine(), d.path);
  CHECK(c.compile_or_fetch(hello()).from_cache);
}

TEST_CASE("without a directory nothing is cached") {
  ArtifactCache cache(default_engine(), std::nullopt);
  CHECK_FALSE(cache.compile_or_fetch(hello()).from_cache);
  CHECK_FALSE(cache.compile_or_fetch(hello()).from_cache);
  CHECK(cache.stats().compilations == 2);
}

TEST_CASE("different modules get different keys") {
  TempDir d;
  ArtifactCache cache(default_engine(), d.path);
  auto a = cache.compile_or_fetch(hello());
  auto b = cache.compile_or_fetch(
      load_module(default_engine(), wat_to_wasm(harness::read_text(harness::fixture("exit3.wat")))));
  CHECK(a.module_hash != b.module_hash);
  CHECK(a.engine_fingerprint == default_engine().fingerprint());
  CHECK(a.engine_fingerprint.find("wasmtime-") == 0);
}
