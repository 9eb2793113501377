#include "mpiwasm/transport/reduce.hpp"

#include <algorithm>
#include <cstring>
#include <type_traits>

#include "mpiwasm/transport/backend.hpp"

namespace mpiwasm::transport {
namespace {

template <class T>
T apply(abi::Op op, T a, T b) {
  switch (op) {
    case abi::Op::sum:
      return static_cast<T>(a + b);
    case abi::Op::prod:
      return static_cast<T>(a * b);
    case abi::Op::max:
      return std::max(a, b);
    case abi::Op::min:
      return std::min(a, b);
    default:
      break;
  }
  if constexpr (std::is_integral_v<T>) {
    switch (op) {
      case abi::Op::land:
        return static_cast<T>((a != 0) && (b != 0));
      case abi::Op::lor:
        return static_cast<T>((a != 0) || (b != 0));
      case abi::Op::band:
        return static_cast<T>(a & b);
      case abi::Op::bor:
        return static_cast<T>(a | b);
      default:
        break;
    }
  }
  throw BackendError("reduction op not defined for datatype");
}

template <class T, bool = std::is_integral_v<T>>
struct arith {
  using type = std::make_unsigned_t<T>;
};

template <class T>
struct arith<T, false> {
  using type = T;
};

template <class T>
void fold(std::span<std::byte> acc, std::span<const std::byte> in, std::int32_t count,
          abi::Op op) {
  // Unsigned arithmetic for sums and products so overflow wraps instead of UB.
  using Arith = typename arith<T>::type;
  for (std::int32_t i = 0; i < count; ++i) {
    const std::size_t at = static_cast<std::size_t>(i) * sizeof(T);
    T a;
    T b;
    std::memcpy(&a, acc.data() + at, sizeof(T));
    std::memcpy(&b, in.data() + at, sizeof(T));
    T r;
    if (op == abi::Op::sum || op == abi::Op::prod) {
      r = static_cast<T>(apply<Arith>(op, static_cast<Arith>(a), static_cast<Arith>(b)));
    } else {
      r = apply<T>(op, a, b);
    }
    std::memcpy(acc.data() + at, &r, sizeof(T));
  }
}

}  // namespace

bool op_supports(abi::Op op, abi::Datatype type) {
  const bool floating = type == abi::Datatype::float_ || type == abi::Datatype::double_;
  switch (op) {
    case abi::Op::sum:
    case abi::Op::prod:
    case abi::Op::max:
    case abi::Op::min:
      return true;
    case abi::Op::land:
    case abi::Op::lor:
    case abi::Op::band:
    case abi::Op::bor:
      return !floating;
  }
  return false;
}

void reduce_into(std::span<std::byte> acc, std::span<const std::byte> in, std::int32_t count,
                 abi::Datatype type, abi::Op op) {
  const auto width = *abi::datatype_size(static_cast<std::int32_t>(type));
  const std::size_t need = static_cast<std::size_t>(count) * width;
  if (count < 0 || acc.size() < need || in.size() < need) {
    throw BackendError("reduction buffers smaller than count");
  }
  switch (type) {
    case abi::Datatype::byte:
      return fold<std::uint8_t>(acc, in, count, op);
    case abi::Datatype::char_:
      return fold<std::int8_t>(acc, in, count, op);
    case abi::Datatype::int_:
      return fold<std::int32_t>(acc, in, count, op);
    case abi::Datatype::float_:
      return fold<float>(acc, in, count, op);
    case abi::Datatype::double_:
      return fold<double>(acc, in, count, op);
    case abi::Datatype::long_:
    case abi::Datatype::long_long:
      return fold<std::int64_t>(acc, in, count, op);
    case abi::Datatype::unsigned_:
      return fold<std::uint32_t>(acc, in, count, op);
    case abi::Datatype::unsigned_long:
      return fold<std::uint64_t>(acc, in, count, op);
  }
}

}  // namespace mpiwasm::transport
