#include "mpiwasm/engine.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "mpiwasm/linear_memory.hpp"

namespace mpiwasm {
namespace {

constexpr const char* kAbiTag = "abi1";

wasmtime::Config make_config() {
  if constexpr (std::endian::native != std::endian::little) {
    throw UnsupportedFeature("big-endian hosts are not supported");
  }
  wasmtime::Config config;
  config.strategy(wasmtime::Strategy::Cranelift);
  config.cranelift_opt_level(wasmtime::OptLevel::Speed);
  config.epoch_interruption(true);
  config.memory_may_move(false);
  config.wasm_threads(false);
  config.shared_memory(false);
  config.wasm_memory64(false);
  config.wasm_multi_memory(false);
  config.parallel_compilation(true);
  return config;
}

std::string target_triple() {
#if defined(__x86_64__)
  const char* arch = "x86_64";
#elif defined(__aarch64__)
  const char* arch = "aarch64";
#else
  const char* arch = "unknown";
#endif
#if defined(__linux__)
  const char* os = "linux";
#elif defined(__APPLE__)
  const char* os = "darwin";
#else
  const char* os = "unknown";
#endif
  return std::string(arch) + "-" + os;
}

void check_limits(const MemoryLimits& limits) {
  if (limits.shared) throw UnsupportedFeature("shared linear memory is not supported");
  if (limits.memory64) throw UnsupportedFeature("64-bit linear memory is not supported");
  if (limits.min_pages > kMaxMemoryPages) {
    throw UnsupportedFeature("initial memory exceeds 65536 pages");
  }
  if (limits.max_pages && *limits.max_pages > kMaxMemoryPages) {
    throw UnsupportedFeature("maximum memory exceeds 65536 pages (4 GiB)");
  }
}

}  // namespace

Engine::Engine()
    : engine_(make_config()),
      fingerprint_(std::string("wasmtime-") + WASMTIME_VERSION + "/" + target_triple() +
                   "/cranelift-speed/" + kAbiTag) {}

Engine& default_engine() {
  static Engine engine;
  return engine;
}

ValidatedModule load_module(Engine& engine, std::span<const std::uint8_t> bytes) {
  ValidatedModule out;
  out.bytes.assign(bytes.begin(), bytes.end());
  out.summary = scan_module(out.bytes);
  // The feature gate runs before engine validation so oversized or shared
  // memories report as unsupported rather than as generic validation errors.
  for (const auto& limits : out.summary.memories) check_limits(limits);
  auto valid = wasmtime::Module::validate(
      engine.raw(), wasmtime::Span<std::uint8_t>(out.bytes.data(), out.bytes.size()));
  if (!valid) throw MalformedModule("invalid module: " + valid.err().message());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> wat_to_wasm(std::string_view wat) {
  auto result = wasmtime::wat2wasm(wat);
  if (!result) throw MalformedModule("WAT parse error: " + result.err().message());
  return result.ok();
}

}  // namespace mpiwasm
