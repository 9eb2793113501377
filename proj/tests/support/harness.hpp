#pragma once

#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "mpiwasm/artifact_cache.hpp"
#include "mpiwasm/engine.hpp"
#include "mpiwasm/instance.hpp"
#include "mpiwasm/sim_group.hpp"
#include "script_oracle.hpp"

namespace harness {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(MPIWASM_FIXTURE_DIR) / name;
}

inline mpiwasm::ModuleArtifact compile_bytes(const std::vector<std::uint8_t>& wasm) {
  mpiwasm::Engine& engine = mpiwasm::default_engine();
  mpiwasm::ArtifactCache cache(engine, std::nullopt);
  return cache.compile_or_fetch(mpiwasm::load_module(engine, wasm));
}

inline mpiwasm::ModuleArtifact compile_wat(std::string_view wat) {
  return compile_bytes(mpiwasm::wat_to_wasm(wat));
}

inline std::string read_text(const std::filesystem::path& p) {
  auto bytes = mpiwasm::read_file_bytes(p.string());
  return {bytes.begin(), bytes.end()};
}

inline mpiwasm::ModuleArtifact compile_fixture(const std::string& name) {
  return compile_wat(read_text(fixture(name)));
}

inline std::int32_t i32_at(std::span<const std::byte> mem, std::uint32_t at) {
  std::int32_t v;
  std::memcpy(&v, mem.data() + at, 4);
  return v;
}

inline double f64_at(std::span<const std::byte> mem, std::uint32_t at) {
  double v;
  std::memcpy(&v, mem.data() + at, 8);
  return v;
}

/// Runs `n` ranks and snapshots each rank's first `keep` bytes at exit.
struct Snapshot {
  mpiwasm::GroupResult result;
  std::vector<std::vector<std::byte>> memory;
};

inline Snapshot run_snapshot(const mpiwasm::ModuleArtifact& artifact, std::int32_t n,
                             std::size_t keep = 65536, mpiwasm::InstanceConfig cfg = {},
                             std::function<void(mpiwasm::Instance&)> before = nullptr) {
  Snapshot snap;
  snap.memory.resize(static_cast<std::size_t>(n));
  std::mutex m;
  mpiwasm::LifecycleHooks hooks;
  hooks.on_instantiated = before;
  hooks.on_exit = [&](mpiwasm::Instance& inst, const mpiwasm::RunResult&) {
    auto mem = inst.memory_bytes();
    std::lock_guard lock(m);
    snap.memory[static_cast<std::size_t>(inst.rank())].assign(
        mem.begin(), mem.begin() + static_cast<std::ptrdiff_t>(std::min(keep, mem.size())));
  };
  if (cfg.argv.empty()) cfg.argv = {"guest"};
  snap.result = mpiwasm::spawn_sim_group(n, mpiwasm::default_engine(), artifact, cfg, hooks);
  return snap;
}

/// Runs a script on the script_vm guest; returns each rank's image.
/// `stagger` delays each rank's start by up to that many microseconds
/// (seeded per rank) to shake up thread scheduling.
inline Snapshot run_script(const mpiwasm::ModuleArtifact& vm, const script::Script& s,
                           std::uint32_t stagger_us = 0, std::uint64_t stagger_seed = 0) {
  return run_snapshot(vm, s.ranks, script::kImageSize, {}, [&](mpiwasm::Instance& inst) {
    const auto img = script::initial_image(s, inst.rank());
    auto mem = inst.memory_bytes();
    std::memcpy(mem.data(), img.data(), img.size());
    if (stagger_us > 0) {
      std::mt19937_64 r(stagger_seed * 1000003u + static_cast<std::uint64_t>(inst.rank()));
      std::this_thread::sleep_for(std::chrono::microseconds(r() % stagger_us));
    }
  });
}

/// First differing compared offset, or -1.
inline long first_mismatch(const std::vector<std::byte>& guest, const std::vector<std::uint8_t>& ref) {
  if (guest.size() < ref.size()) return 0;
  for (std::uint32_t i = 0; i < ref.size(); ++i) {
    if (script::compared(i) && static_cast<std::uint8_t>(guest[i]) != ref[i]) return i;
  }
  return -1;
}

}  // namespace harness
