#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "mpiwasm/module_hash.hpp"

using namespace mpiwasm;

namespace {

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace

TEST_CASE("SHA-256 test vectors") {
  CHECK(to_hex(sha256(as_bytes(""))) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(to_hex(sha256(as_bytes("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(to_hex(sha256(as_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"))) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("module key depends on bytes and fingerprint, not on their boundary") {
  const std::string a("\0asm\1\0\0\0", 8);
  REQUIRE(a.size() == 8);
  const auto h1 = compute_module_hash(as_bytes(a), "fp");
  CHECK(h1 == compute_module_hash(as_bytes(a), "fp"));
  CHECK(h1 != compute_module_hash(as_bytes(a), "fq"));
  CHECK(h1 != compute_module_hash(as_bytes(a + "x"), "fp"));
  CHECK(compute_module_hash(as_bytes("ab"), "c") != compute_module_hash(as_bytes("a"), "bc"));
  CHECK(to_hex(h1).size() == 64);
}

TEST_CASE("property: the key is a pure function of bytes and fingerprint") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::uint8_t> bytes(rng() % 3000);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    const std::string fp = "fp-" + std::to_string(rng() % 4);
    const auto h = compute_module_hash(bytes, fp);

    // another buffer, other work in between: same answer
    std::vector<std::uint8_t> copy(bytes);
    (void)compute_module_hash(as_bytes("noise"), "x");
    CHECK(compute_module_hash(copy, fp) == h);

    if (!copy.empty()) {
      copy[rng() % copy.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
      CHECK(compute_module_hash(copy, fp) != h);
    }
  }
}
