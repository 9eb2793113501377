#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "mpiwasm/transport/reduce.hpp"

using namespace mpiwasm;
using abi::Datatype;
using abi::Op;

namespace {

template <class T>
std::vector<std::byte> bytes_of(const std::vector<T>& v) {
  std::vector<std::byte> out(v.size() * sizeof(T));
  std::memcpy(out.data(), v.data(), out.size());
  return out;
}

template <class T>
std::vector<T> values_of(const std::vector<std::byte>& b) {
  std::vector<T> out(b.size() / sizeof(T));
  std::memcpy(out.data(), b.data(), b.size());
  return out;
}

// Written out per op, independent of the implementation's dispatch.
template <class T>
T expected(Op op, T a, T b) {
  if constexpr (std::is_integral_v<T>) {
    using U = std::make_unsigned_t<T>;
    switch (op) {
      case Op::sum: return static_cast<T>(static_cast<U>(a) + static_cast<U>(b));
      case Op::prod: return static_cast<T>(static_cast<U>(a) * static_cast<U>(b));
      case Op::max: return a > b ? a : b;
      case Op::min: return a < b ? a : b;
      case Op::land: return static_cast<T>((a != 0) && (b != 0));
      case Op::lor: return static_cast<T>((a != 0) || (b != 0));
      case Op::band: return static_cast<T>(a & b);
      case Op::bor: return static_cast<T>(a | b);
    }
  } else {
    switch (op) {
      case Op::sum: return a + b;
      case Op::prod: return a * b;
      case Op::max: return a > b ? a : b;
      case Op::min: return a < b ? a : b;
      default: break;
    }
  }
  return T{};
}

template <class T>
void check_type(Datatype dt, std::mt19937_64& rng) {
  const std::vector<Op> ops = std::is_integral_v<T>
      ? std::vector<Op>{Op::sum, Op::max, Op::min, Op::prod, Op::land, Op::lor, Op::band, Op::bor}
      : std::vector<Op>{Op::sum, Op::max, Op::min, Op::prod};
  for (Op op : ops) {
    CHECK(transport::op_supports(op, dt));
    std::vector<T> a(33), b(33);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if constexpr (std::is_integral_v<T>) {
        a[i] = static_cast<T>(rng());
        b[i] = static_cast<T>(i % 5 == 0 ? 0 : rng());
      } else {
        a[i] = static_cast<T>(std::uniform_real_distribution<double>(-100, 100)(rng));
        b[i] = static_cast<T>(std::uniform_real_distribution<double>(-100, 100)(rng));
      }
    }
    auto acc = bytes_of(a);
    const auto in = bytes_of(b);
    transport::reduce_into(acc, in, static_cast<std::int32_t>(a.size()), dt, op);
    const auto got = values_of<T>(acc);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(got[i] == expected(op, a[i], b[i]));
  }
}

}  // namespace

TEST_CASE("every op on every datatype against an independent definition") {
  std::mt19937_64 rng(11);
  check_type<std::uint8_t>(Datatype::byte, rng);
  check_type<std::int8_t>(Datatype::char_, rng);
  check_type<std::int32_t>(Datatype::int_, rng);
  check_type<float>(Datatype::float_, rng);
  check_type<double>(Datatype::double_, rng);
  check_type<std::int64_t>(Datatype::long_, rng);
  check_type<std::uint32_t>(Datatype::unsigned_, rng);
  check_type<std::int64_t>(Datatype::long_long, rng);
  check_type<std::uint64_t>(Datatype::unsigned_long, rng);
}

TEST_CASE("logical and bitwise ops are integer-only") {
  for (Op op : {Op::land, Op::lor, Op::band, Op::bor}) {
    CHECK_FALSE(transport::op_supports(op, Datatype::float_));
    CHECK_FALSE(transport::op_supports(op, Datatype::double_));
  }
}

TEST_CASE("two-rank MIN of {5, 3} is 3") {
  std::vector<std::int32_t> a{5}, b{3};
  auto acc = bytes_of(a);
  transport::reduce_into(acc, bytes_of(b), 1, Datatype::int_, Op::min);
  CHECK(values_of<std::int32_t>(acc)[0] == 3);
}

TEST_CASE("signed overflow wraps instead of being undefined") {
  std::vector<std::int32_t> a{std::numeric_limits<std::int32_t>::max()}, b{1};
  auto acc = bytes_of(a);
  transport::reduce_into(acc, bytes_of(b), 1, Datatype::int_, Op::sum);
  CHECK(values_of<std::int32_t>(acc)[0] == std::numeric_limits<std::int32_t>::min());
}
