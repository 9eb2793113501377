#pragma once

// On-disk cache of compiled modules, keyed by a digest of the module bytes
// and the engine fingerprint.
//
// File layout of `<dir>/<hash>.art`:
//   8 bytes  magic "MPIWART1"
//   8 bytes  payload length, little-endian
//   32 bytes SHA-256 of payload
//   payload  engine-serialized native module

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpiwasm/engine.hpp"

namespace mpiwasm {

class CompilationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CacheCorrupt : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModuleArtifact {
  std::string module_hash;  // 64 hex chars
  std::string engine_fingerprint;
  std::vector<std::uint8_t> native_object;
  std::shared_ptr<wasmtime::Module> module;
  ModuleSummary summary;
  bool from_cache = false;
};

struct CacheStats {
  std::atomic<std::uint64_t> compilations{0};
  std::atomic<std::uint64_t> hits{0};
  std::atomic<std::uint64_t> corrupt_recoveries{0};
};

class ArtifactCache {
 public:
  /// With no directory every call compiles and nothing is written.
  ArtifactCache(Engine& engine, std::optional<std::filesystem::path> dir);

  ModuleArtifact compile_or_fetch(const ValidatedModule& module);

  const CacheStats& stats() const noexcept { return stats_; }
  const std::optional<std::filesystem::path>& dir() const noexcept { return dir_; }
  std::filesystem::path artifact_path(const std::string& hash_hex) const;

  /// Throws CacheCorrupt when the header, length or digest do not check out.
  static std::vector<std::uint8_t> read_artifact(const std::filesystem::path& path);
  /// Writes via a unique temp file and an atomic rename.
  static void write_artifact(const std::filesystem::path& path,
                             const std::vector<std::uint8_t>& payload);

 private:
  Engine& engine_;
  std::optional<std::filesystem::path> dir_;
  CacheStats stats_;
};

/// `MPIWASM_CACHE_DIR`, else `$XDG_CACHE_HOME/mpiwasm`, else `~/.cache/mpiwasm`.
std::filesystem::path default_cache_dir();

}  // namespace mpiwasm
