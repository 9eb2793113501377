#pragma once
// Adversarial path generation against a tree whose only readable secrets live
// outside the preopen. An escape is any successful open or resolve that lands
// on a secret.
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "harness.hpp"
#include "mpiwasm/fs_sandbox.hpp"

namespace path_fuzz {

namespace fs = std::filesystem;

inline constexpr char kSecret[] = "SECRET!!";
inline constexpr char kInside[] = "inside__";

struct Tree {
  fs::path base;
  fs::path root;

  explicit Tree(const std::string& tag) {
    base = fs::temp_directory_path() / ("mpiwasm-pathfuzz-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(base);
    root = base / "root";
    fs::create_directories(root / "a" / "b");
    fs::create_directories(base / "secret" / "root");
    fs::create_directories(base / "root2");
    put(root / "in.txt", kInside);
    put(root / "a" / "in.txt", kInside);
    put(root / "a" / "b" / "in.txt", kInside);
    put(base / "s.txt", kSecret);
    put(base / "secret" / "s.txt", kSecret);
    put(base / "secret" / "root" / "in.txt", kSecret);
    put(base / "root2" / "in.txt", kSecret);
    fs::create_directory_symlink("..", root / "up");
    fs::create_directory_symlink(base / "secret", root / "abs");
    fs::create_directory_symlink("a/../../secret", root / "deep");
    fs::create_directory_symlink(".", root / "self");
    fs::create_directory_symlink("a", root / "inner");
    fs::create_symlink("up/s.txt", root / "chain");
    fs::create_symlink("/etc/passwd", root / "pw");
    fs::create_directory_symlink("../../../root2", root / "a" / "b" / "back");
    fs::create_symlink("../in.txt", root / "a" / "ok.txt");
  }
  ~Tree() {
    std::error_code ec;
    fs::remove_all(base, ec);
  }
  static void put(const fs::path& p, const char* text) { std::ofstream(p, std::ios::binary) << text; }
};

inline std::vector<std::string> generate(std::uint64_t seed, std::size_t count) {
  static const std::vector<std::string> parts = {
      "..", ".", "", "a", "b", "in.txt", "up", "abs", "deep", "self", "inner", "chain", "pw",
      "back", "ok.txt", "secret", "s.txt", "root", "root2", "....", "%2e%2e", "..\\..", ".. ",
      " ..", "...", "~", "$HOME", "etc", "passwd", std::string("a\0..", 4), "\xc0\xae\xc0\xae",
      "tmp"};
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  out.reserve(count);
  while (out.size() < count) {
    std::string p;
    if (rng() % 10 < 3) {
      // Walk real directories and symlinks, then name a file.
      static const std::vector<std::string> dirs = {"a", "a/b", "self", "inner", "..", "up", "deep",
                                                    "abs", "a/b/back", "a/..", "inner/b"};
      const int n = static_cast<int>(rng() % 5);
      for (int i = 0; i < n; ++i) p += dirs[rng() % dirs.size()] + "/";
      static const std::vector<std::string> files = {"in.txt", "s.txt", "ok.txt", "chain", "pw"};
      p += files[rng() % files.size()];
      out.push_back(std::move(p));
      continue;
    }
    switch (rng() % 10) {
      case 0: p = "/"; break;
      case 1: p = "//"; break;
      case 2: p = "./"; break;
      default: break;
    }
    const int n = 1 + static_cast<int>(rng() % 9);
    for (int i = 0; i < n; ++i) {
      if (i) p += (rng() % 8 == 0) ? "//" : "/";
      // Mostly real names so the walk gets somewhere before it climbs.
      static const std::vector<std::string> real = {"a", "b", "inner", "self", "in.txt", "ok.txt"};
      switch (rng() % 4) {
        case 0: p += ".."; break;
        case 1: p += real[rng() % real.size()]; break;
        default: p += parts[rng() % parts.size()]; break;
      }
    }
    if (rng() % 7 == 0) p += "/";
    if (p.size() > 200) continue;
    out.push_back(std::move(p));
  }
  return out;
}

inline bool file_is_secret(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  char buf[8] = {};
  if (!f.read(buf, 8)) return false;
  return std::memcmp(buf, kSecret, 8) == 0;
}

struct Outcome {
  std::size_t paths = 0;
  std::size_t guest_opened = 0;
  std::size_t guest_inside_reads = 0;
  std::size_t guest_escapes = 0;
  std::size_t resolver_accepted = 0;
  std::size_t resolver_escapes = 0;
  std::vector<std::string> escaped;
  int exit_code = -1;
};

/// Runs every path through the engine's WASI layer inside a guest and through
/// the reference resolver.
inline Outcome run(const Tree& tree, const std::vector<std::string>& paths) {
  Outcome out;
  out.paths = paths.size();

  mpiwasm::PreopenTable table;
  const auto& pre = table.map_preopen(tree.root, mpiwasm::Rights::read_only);
  const std::string guest_root = pre.guest_root();
  const std::string root_prefix = fs::canonical(tree.root).string() + "/";
  for (const auto& p : paths) {
    try {
      auto r = table.resolve_path(guest_root + "/" + p);
      ++out.resolver_accepted;
      const std::string s = r.host_path.string();
      bool escaped = s != root_prefix.substr(0, root_prefix.size() - 1) && s.rfind(root_prefix, 0) != 0;
      std::error_code ec;
      auto real = fs::canonical(r.host_path, ec);
      if (!ec) {
        const std::string rs = real.string();
        if (rs + "/" != root_prefix && rs.rfind(root_prefix, 0) != 0) escaped = true;
        if (fs::is_regular_file(real) && file_is_secret(real)) escaped = true;
      }
      if (escaped) {
        ++out.resolver_escapes;
        out.escaped.push_back("resolver: " + p);
      }
    } catch (const mpiwasm::NotCapable&) {
    }
  }

  static const auto probe = harness::compile_fixture("path_probe.wat");
  mpiwasm::InstanceConfig cfg;
  cfg.preopens = {{tree.root, mpiwasm::Rights::read_only}};
  auto snap = harness::run_snapshot(probe, 1, 16384 + 12 * paths.size(), cfg, [&](mpiwasm::Instance& inst) {
    auto mem = inst.memory_bytes();
    const std::uint32_t n = static_cast<std::uint32_t>(paths.size());
    std::memcpy(mem.data() + 8, &n, 4);
    std::uint32_t at = 65536;
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t len = static_cast<std::uint32_t>(paths[i].size());
      std::memcpy(mem.data() + at, paths[i].data(), len);
      std::memcpy(mem.data() + 4096 + 8 * i, &at, 4);
      std::memcpy(mem.data() + 4096 + 8 * i + 4, &len, 4);
      at += len + 1;
    }
  });
  out.exit_code = snap.result.exit_code();
  if (snap.memory.empty() || snap.memory[0].size() < 16384 + 12 * paths.size()) return out;
  const auto& mem = snap.memory[0];
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::byte* slot = mem.data() + 16384 + 12 * i;
    if (harness::i32_at(mem, static_cast<std::uint32_t>(16384 + 12 * i)) != 0) continue;
    ++out.guest_opened;
    if (std::memcmp(slot + 4, kSecret, 8) == 0) {
      ++out.guest_escapes;
      out.escaped.push_back("guest: " + paths[i]);
    } else if (std::memcmp(slot + 4, kInside, 8) == 0) {
      ++out.guest_inside_reads;
    }
  }
  return out;
}

}  // namespace path_fuzz
