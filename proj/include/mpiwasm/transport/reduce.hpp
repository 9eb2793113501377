#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "mpiwasm/abi.hpp"

namespace mpiwasm::transport {

/// Whether the predefined op is defined on the predefined datatype.
/// Logical and bitwise ops are integer-only.
bool op_supports(abi::Op op, abi::Datatype type);

/// acc[i] = acc[i] (op) in[i] for `count` elements, little-endian layout.
void reduce_into(std::span<std::byte> acc, std::span<const std::byte> in, std::int32_t count,
                 abi::Datatype type, abi::Op op);

}  // namespace mpiwasm::transport
