#pragma once

// Just enough of the Wasm binary format to enumerate imports, exports and
// memory limits before handing the bytes to the engine.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpiwasm {

class MalformedModule : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExternKind : std::uint8_t { func = 0, table = 1, memory = 2, global = 3, tag = 4 };

const char* extern_kind_name(ExternKind kind);

struct MemoryLimits {
  std::uint64_t min_pages = 0;
  std::optional<std::uint64_t> max_pages;
  bool shared = false;
  bool memory64 = false;
};

struct ImportEntry {
  std::string module;
  std::string name;
  ExternKind kind = ExternKind::func;
  std::uint32_t type_index = 0;        // funcs only
  std::optional<MemoryLimits> memory;  // memories only
};

struct ExportEntry {
  std::string name;
  ExternKind kind = ExternKind::func;
  std::uint32_t index = 0;
};

struct ModuleSummary {
  std::vector<ImportEntry> imports;
  std::vector<ExportEntry> exports;
  std::vector<MemoryLimits> memories;  // imported memories first, then defined

  bool has_export(const std::string& name, ExternKind kind) const;
};

/// Throws MalformedModule when the header or a scanned section is bad.
ModuleSummary scan_module(std::span<const std::uint8_t> bytes);

}  // namespace mpiwasm
