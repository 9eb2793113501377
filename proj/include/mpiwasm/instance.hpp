#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <wasmtime.h>
#include <wasmtime.hh>

#include "mpiwasm/artifact_cache.hpp"
#include "mpiwasm/env.hpp"
#include "mpiwasm/fs_sandbox.hpp"
#include "mpiwasm/hostcalls.hpp"
#include "mpiwasm/transport/backend.hpp"

namespace mpiwasm {

/// Exit code reported for a guest trap, matching a process killed by SIGABRT.
inline constexpr std::int32_t kTrapExitCode = 134;

class MissingExport : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InstantiationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InstanceConfig {
  std::vector<std::pair<std::filesystem::path, Rights>> preopens;
  std::vector<std::string> argv;      // argv[0] included
  std::vector<std::string> env_vars;  // KEY=VALUE
  transport::BackendKind backend = transport::BackendKind::sim;
  std::optional<std::filesystem::path> cache_dir;
  bool cache_enabled = true;
  bool instrument = false;
  /// Redirect guest stdout to a file instead of inheriting the host's.
  std::optional<std::filesystem::path> stdout_file;
};

enum class Outcome { exited, trapped, aborted };

const char* outcome_name(Outcome outcome);

struct RunResult {
  std::int32_t exit_code = 0;
  Outcome outcome = Outcome::exited;
  std::string diagnostic;
};

class Instance;

struct LifecycleHooks {
  /// After instantiation, before `_start`; memory is live.
  std::function<void(Instance&)> on_instantiated;
  /// After `_start` finished, trapped or exited; memory is still readable.
  std::function<void(Instance&, const RunResult&)> on_exit;
};

/// One guest: its store, linear memory, Env and bound hostcalls.
class Instance final : public GuestAllocator {
 public:
  Instance(Engine& engine, const ModuleArtifact& artifact, const InstanceConfig& cfg,
           transport::Backend& backend);
  ~Instance() override;

  Instance(const Instance&) = delete;
  Instance& operator=(const Instance&) = delete;

  RunResult run(const LifecycleHooks& hooks = {});

  Env& env() noexcept { return env_; }
  transport::Backend& backend() noexcept { return backend_; }
  std::int32_t rank() const { return backend_.world_rank(); }
  const PreopenTable& preopens() const noexcept { return preopens_; }

  /// Re-reads the memory's base and length into the Env and returns it.
  LinearMemoryView refresh_memory();
  std::span<std::byte> memory_bytes();
  /// Value of an exported i32 global, e.g. a buffer address.
  std::optional<std::uint32_t> exported_global_u32(std::string_view name);

  /// Makes the guest trap at its next epoch check.
  void interrupt() noexcept {
    interrupted_.store(true);
    engine_.interrupt_all();
  }

  bool has_exports() const override;
  std::uint32_t call_malloc(std::uint32_t size) override;
  void call_free(std::uint32_t addr) override;
  LinearMemoryView current_memory() const override;

 private:
  template <class R, class... A>
  void bind(std::string_view name, R (*fn)(HostcallContext&, A...));
  void bind_hostcalls();
  void stub_unknown_imports(const wasmtime::Module& module);
  void enter(wasmtime::Caller& caller);
  wasmtime::Store::Context cx() const;

  Engine& engine_;
  transport::Backend& backend_;
  Env env_;
  HostcallContext ctx_;
  PreopenTable preopens_;
  mutable wasmtime::Store store_;
  wasmtime::Linker linker_;
  std::optional<wasmtime::Instance> instance_;
  std::optional<wasmtime::Memory> memory_;
  std::optional<wasmtime::Func> start_;
  std::optional<wasmtime::Func> malloc_;
  std::optional<wasmtime::Func> free_;
  std::optional<wasmtime::Store::Context> active_cx_;  // the caller's context inside a hostcall
  std::atomic<bool> interrupted_{false};
  std::optional<transport::GroupAborted> abort_;
};

}  // namespace mpiwasm
