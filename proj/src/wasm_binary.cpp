#include "mpiwasm/wasm_binary.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace mpiwasm {
namespace {

constexpr std::array<std::uint8_t, 8> kHeader = {0x00, 0x61, 0x73, 0x6d, 0x01, 0x00, 0x00, 0x00};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ >= bytes_.size(); }
  std::size_t pos() const { return pos_; }

  std::uint8_t byte() {
    if (pos_ >= bytes_.size()) throw MalformedModule("unexpected end of module");
    return bytes_[pos_++];
  }

  std::uint64_t uleb(unsigned max_bits = 32) {
    std::uint64_t result = 0;
    unsigned shift = 0;
    for (;;) {
      const std::uint8_t b = byte();
      if (shift >= max_bits) throw MalformedModule("LEB128 integer too long");
      result |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      shift += 7;
      if ((b & 0x80) == 0) break;
    }
    if (max_bits < 64 && (result >> max_bits) != 0) {
      throw MalformedModule("LEB128 integer out of range");
    }
    return result;
  }

  std::uint32_t u32() { return static_cast<std::uint32_t>(uleb(32)); }

  std::string name() {
    const std::uint32_t len = u32();
    auto raw = take(len);
    return std::string(reinterpret_cast<const char*>(raw.data()), raw.size());
  }

  std::span<const std::uint8_t> take(std::size_t len) {
    if (len > bytes_.size() - pos_) throw MalformedModule("section runs past end of module");
    auto out = bytes_.subspan(pos_, len);
    pos_ += len;
    return out;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

MemoryLimits read_memory_limits(Reader& r) {
  const std::uint8_t flags = r.byte();
  if (flags & ~0x07u) throw MalformedModule("unknown memory limits flags");
  MemoryLimits limits;
  limits.shared = (flags & 0x02) != 0;
  limits.memory64 = (flags & 0x04) != 0;
  const unsigned width = limits.memory64 ? 64 : 32;
  limits.min_pages = r.uleb(width);
  if (flags & 0x01) limits.max_pages = r.uleb(width);
  return limits;
}

void skip_table_type(Reader& r) {
  std::uint8_t ref = r.byte();
  if (ref == 0x64 || ref == 0x63) (void)r.uleb(33);  // typed function reference
  const std::uint8_t flags = r.byte();
  const unsigned width = (flags & 0x04) ? 64 : 32;
  (void)r.uleb(width);
  if (flags & 0x01) (void)r.uleb(width);
}

void skip_value_type(Reader& r) {
  const std::uint8_t t = r.byte();
  if (t == 0x64 || t == 0x63) (void)r.uleb(33);
}

}  // namespace

const char* extern_kind_name(ExternKind kind) {
  switch (kind) {
    case ExternKind::func:
      return "func";
    case ExternKind::table:
      return "table";
    case ExternKind::memory:
      return "memory";
    case ExternKind::global:
      return "global";
    case ExternKind::tag:
      return "tag";
  }
  return "unknown";
}

bool ModuleSummary::has_export(const std::string& name, ExternKind kind) const {
  return std::any_of(exports.begin(), exports.end(),
                     [&](const ExportEntry& e) { return e.name == name && e.kind == kind; });
}

ModuleSummary scan_module(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeader.size() ||
      std::memcmp(bytes.data(), kHeader.data(), kHeader.size()) != 0) {
    throw MalformedModule("not a WebAssembly binary module (bad magic or version)");
  }
  Reader r(bytes.subspan(kHeader.size()));
  ModuleSummary summary;

  while (!r.done()) {
    const std::uint8_t id = r.byte();
    const std::uint32_t size = r.u32();
    Reader section(r.take(size));

    switch (id) {
      case 2: {  // import
        const std::uint32_t count = section.u32();
        for (std::uint32_t i = 0; i < count; ++i) {
          ImportEntry entry;
          entry.module = section.name();
          entry.name = section.name();
          const std::uint8_t kind = section.byte();
          switch (kind) {
            case 0:
              entry.kind = ExternKind::func;
              entry.type_index = section.u32();
              break;
            case 1:
              entry.kind = ExternKind::table;
              skip_table_type(section);
              break;
            case 2:
              entry.kind = ExternKind::memory;
              entry.memory = read_memory_limits(section);
              summary.memories.push_back(*entry.memory);
              break;
            case 3:
              entry.kind = ExternKind::global;
              skip_value_type(section);
              (void)section.byte();
              break;
            case 4:
              entry.kind = ExternKind::tag;
              (void)section.byte();
              (void)section.u32();
              break;
            default:
              throw MalformedModule("unknown import kind");
          }
          summary.imports.push_back(std::move(entry));
        }
        break;
      }
      case 5: {  // memory
        const std::uint32_t count = section.u32();
        for (std::uint32_t i = 0; i < count; ++i) summary.memories.push_back(read_memory_limits(section));
        break;
      }
      case 7: {  // export
        const std::uint32_t count = section.u32();
        for (std::uint32_t i = 0; i < count; ++i) {
          ExportEntry entry;
          entry.name = section.name();
          const std::uint8_t kind = section.byte();
          if (kind > 4) throw MalformedModule("unknown export kind");
          entry.kind = static_cast<ExternKind>(kind);
          entry.index = section.u32();
          summary.exports.push_back(std::move(entry));
        }
        break;
      }
      default:
        if (id > 13 && id != 0) throw MalformedModule("unknown section id " + std::to_string(id));
        break;
    }
  }
  return summary;
}

}  // namespace mpiwasm
