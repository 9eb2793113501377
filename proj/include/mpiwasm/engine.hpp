#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <wasmtime.h>
#include <wasmtime.hh>

#include "mpiwasm/wasm_binary.hpp"

namespace mpiwasm {

class UnsupportedFeature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Process-wide compiler and runtime configuration. Optimizing AoT only;
/// memories never move, so a recorded base stays valid across growth.
class Engine {
 public:
  Engine();

  wasmtime::Engine& raw() noexcept { return engine_; }
  /// Engine version, target and optimization tier; part of every cache key.
  const std::string& fingerprint() const noexcept { return fingerprint_; }

  /// Bumps the epoch so every running store consults its deadline callback.
  void interrupt_all() const { engine_.increment_epoch(); }

 private:
  wasmtime::Engine engine_;
  std::string fingerprint_;
};

Engine& default_engine();

struct ValidatedModule {
  std::vector<std::uint8_t> bytes;
  ModuleSummary summary;
};

/// Throws MalformedModule for bytes the engine rejects and UnsupportedFeature
/// for shared or 64-bit memories and memories beyond 65536 pages.
ValidatedModule load_module(Engine& engine, std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

/// Text or binary; WAT is assembled first.
std::vector<std::uint8_t> wat_to_wasm(std::string_view wat);

}  // namespace mpiwasm
