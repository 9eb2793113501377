#pragma once

// Preopen policy: which host directories a guest may see, under which
// top-level names, and with which rights. The engine's WASI layer performs the
// actual file operations; this table decides what it is given and provides a
// reference resolver with the same containment rules.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mpiwasm {

enum class Rights { read_only, read_write };
enum class Access { read, write };

const char* rights_name(Rights rights);

struct Preopen {
  std::filesystem::path host_path;  // canonical
  std::string guest_name;           // single component, no separators
  Rights rights = Rights::read_write;

  std::string guest_root() const { return "/" + guest_name; }
};

class NotADirectory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicateAfterSuffixing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotCapable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RightsViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResolvedPath {
  std::filesystem::path host_path;
  Rights rights = Rights::read_only;
  const Preopen* preopen = nullptr;
};

class PreopenTable {
 public:
  /// Guest name is the final component of the host path; `.2`, `.3`, ... are
  /// appended on collision.
  const Preopen& map_preopen(const std::filesystem::path& host_path, Rights rights);

  /// Resolves an absolute guest path. `..` may not climb above the preopen
  /// root, and the result after symlink resolution must stay inside it.
  ResolvedPath resolve_path(std::string_view guest_path, Access access = Access::read) const;

  const std::vector<Preopen>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::vector<Preopen> entries_;
};

/// Parses the CLI form `DIR` or `DIR:ro` (`:rw` is accepted and is the default).
std::pair<std::filesystem::path, Rights> parse_dir_flag(std::string_view flag);

/// True when `path` equals `root` or lies beneath it, comparing whole components.
bool path_within(const std::filesystem::path& root, const std::filesystem::path& path);

}  // namespace mpiwasm
