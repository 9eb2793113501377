#include "mpiwasm/module_hash.hpp"

#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace mpiwasm {
namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("SHA-256 initialization failed");
    }
  }

  void update(const void* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx_.get(), data, len) != 1) throw std::runtime_error("SHA-256 update failed");
  }

  Digest256 finish() {
    Digest256 out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), out.data(), &len) != 1 || len != out.size()) {
      throw std::runtime_error("SHA-256 finalization failed");
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx_;
};

}  // namespace

Digest256 sha256(std::span<const std::uint8_t> data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.finish();
}

Digest256 compute_module_hash(std::span<const std::uint8_t> bytes, std::string_view fingerprint) {
  std::uint8_t prefix[8];
  std::uint64_t n = bytes.size();
  for (auto& b : prefix) {
    b = static_cast<std::uint8_t>(n & 0xff);
    n >>= 8;
  }
  Sha256 h;
  h.update(prefix, sizeof prefix);
  h.update(bytes.data(), bytes.size());
  h.update(fingerprint.data(), fingerprint.size());
  return h.finish();
}

std::string to_hex(std::span<const std::uint8_t> digest) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (std::uint8_t b : digest) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

}  // namespace mpiwasm
