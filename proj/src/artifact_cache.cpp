#include "mpiwasm/artifact_cache.hpp"

#include <array>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <system_error>

#include <unistd.h>

#include <spdlog/spdlog.h>

#include "mpiwasm/module_hash.hpp"

namespace mpiwasm {
namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'P', 'I', 'W', 'A', 'R', 'T', '1'};
constexpr std::size_t kHeaderSize = 8 + 8 + 32;

wasmtime::Span<std::uint8_t> as_span(std::vector<std::uint8_t>& v) {
  return {v.data(), v.size()};
}

std::string temp_suffix() {
  static std::atomic<std::uint64_t> counter{0};
  std::random_device rd;
  return ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1)) + "." +
         std::to_string(rd());
}

}  // namespace

ArtifactCache::ArtifactCache(Engine& engine, std::optional<fs::path> dir)
    : engine_(engine), dir_(std::move(dir)) {
  if (dir_) {
    std::error_code ec;
    fs::create_directories(*dir_, ec);
    if (ec) {
      spdlog::warn("cache directory {} unusable ({}); caching disabled", dir_->string(),
                   ec.message());
      dir_.reset();
    }
  }
}

fs::path ArtifactCache::artifact_path(const std::string& hash_hex) const {
  return dir_.value_or(fs::path{}) / (hash_hex + ".art");
}

std::vector<std::uint8_t> ArtifactCache::read_artifact(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheCorrupt("cannot open " + path.string());
  std::vector<std::uint8_t> raw{std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>()};
  if (raw.size() < kHeaderSize || std::memcmp(raw.data(), kMagic.data(), kMagic.size()) != 0) {
    throw CacheCorrupt("bad artifact header in " + path.string());
  }
  std::uint64_t length = 0;
  for (int i = 7; i >= 0; --i) length = (length << 8) | raw[8 + i];
  if (length != raw.size() - kHeaderSize) {
    throw CacheCorrupt("artifact length mismatch in " + path.string());
  }
  std::vector<std::uint8_t> payload(raw.begin() + kHeaderSize, raw.end());
  const Digest256 digest = sha256(payload);
  if (std::memcmp(digest.data(), raw.data() + 16, digest.size()) != 0) {
    throw CacheCorrupt("artifact digest mismatch in " + path.string());
  }
  return payload;
}

void ArtifactCache::write_artifact(const fs::path& path, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> header(kHeaderSize);
  std::memcpy(header.data(), kMagic.data(), kMagic.size());
  std::uint64_t length = payload.size();
  for (int i = 0; i < 8; ++i) header[8 + i] = static_cast<std::uint8_t>(length >> (8 * i));
  const Digest256 digest = sha256(payload);
  std::memcpy(header.data() + 16, digest.data(), digest.size());

  const fs::path tmp = path.string() + temp_suffix();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot publish " + path.string() + ": " + ec.message());
  }
}

ModuleArtifact ArtifactCache::compile_or_fetch(const ValidatedModule& module) {
  ModuleArtifact artifact;
  artifact.engine_fingerprint = engine_.fingerprint();
  artifact.module_hash = to_hex(compute_module_hash(module.bytes, artifact.engine_fingerprint));
  artifact.summary = module.summary;

  if (dir_) {
    const fs::path path = artifact_path(artifact.module_hash);
    std::error_code ec;
    if (fs::exists(path, ec)) {
      try {
        auto payload = read_artifact(path);
        auto loaded = wasmtime::Module::deserialize(engine_.raw(), as_span(payload));
        if (!loaded) throw CacheCorrupt("engine rejected cached artifact: " + loaded.err().message());
        artifact.module = std::make_shared<wasmtime::Module>(loaded.ok());
        artifact.native_object = std::move(payload);
        artifact.from_cache = true;
        stats_.hits.fetch_add(1);
        return artifact;
      } catch (const CacheCorrupt& e) {
        stats_.corrupt_recoveries.fetch_add(1);
        spdlog::warn("{}; recompiling", e.what());
      }
    }
  }

  std::vector<std::uint8_t> bytes = module.bytes;
  auto compiled = wasmtime::Module::compile(engine_.raw(), as_span(bytes));
  stats_.compilations.fetch_add(1);
  if (!compiled) throw CompilationFailed(compiled.err().message());
  artifact.module = std::make_shared<wasmtime::Module>(compiled.ok());

  auto serialized = artifact.module->serialize();
  if (!serialized) throw CompilationFailed("cannot serialize module: " + serialized.err().message());
  artifact.native_object = serialized.ok();

  if (dir_) {
    try {
      write_artifact(artifact_path(artifact.module_hash), artifact.native_object);
    } catch (const std::exception& e) {
      spdlog::warn("artifact not cached: {}", e.what());
    }
  }
  return artifact;
}

fs::path default_cache_dir() {
  if (const char* env = std::getenv("MPIWASM_CACHE_DIR"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "mpiwasm";
  if (const char* home = std::getenv("HOME"); home && *home) {
    return fs::path(home) / ".cache" / "mpiwasm";
  }
  return fs::temp_directory_path() / "mpiwasm-cache";
}

}  // namespace mpiwasm
