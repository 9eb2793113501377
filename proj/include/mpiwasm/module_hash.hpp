#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace mpiwasm {

using Digest256 = std::array<std::uint8_t, 32>;

Digest256 sha256(std::span<const std::uint8_t> data);

/// Content key for a compiled module. The byte length is mixed in first so
/// (bytes, fingerprint) pairs cannot alias by shifting the boundary.
Digest256 compute_module_hash(std::span<const std::uint8_t> bytes, std::string_view fingerprint);

std::string to_hex(std::span<const std::uint8_t> digest);

}  // namespace mpiwasm
