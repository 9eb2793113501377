#include "mpiwasm/fs_sandbox.hpp"

#include <algorithm>
#include <system_error>

namespace mpiwasm {
namespace fs = std::filesystem;

namespace {

constexpr int kMaxSuffix = 1000;

std::vector<std::string> split_components(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

}  // namespace

const char* rights_name(Rights rights) {
  return rights == Rights::read_only ? "ro" : "rw";
}

bool path_within(const fs::path& root, const fs::path& path) {
  auto r = root.begin();
  auto p = path.begin();
  for (; r != root.end(); ++r, ++p) {
    // A trailing separator on the root shows up as an empty final component.
    if (r->empty() && std::next(r) == root.end()) return true;
    if (p == path.end() || *r != *p) return false;
  }
  return true;
}

const Preopen& PreopenTable::map_preopen(const fs::path& host_path, Rights rights) {
  std::error_code ec;
  if (!fs::is_directory(host_path, ec)) {
    throw NotADirectory(host_path.string() + " is not a directory");
  }
  fs::path canonical = fs::canonical(host_path, ec);
  if (ec) throw NotADirectory(host_path.string() + ": " + ec.message());

  std::string base = canonical.filename().string();
  if (base.empty()) base = "root";

  auto taken = [&](const std::string& name) {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Preopen& p) { return p.guest_name == name; });
  };
  std::string name = base;
  for (int suffix = 2; taken(name); ++suffix) {
    if (suffix > kMaxSuffix) {
      throw DuplicateAfterSuffixing("too many preopens named " + base);
    }
    name = base + "." + std::to_string(suffix);
  }
  entries_.push_back(Preopen{std::move(canonical), std::move(name), rights});
  return entries_.back();
}

ResolvedPath PreopenTable::resolve_path(std::string_view guest_path, Access access) const {
  if (guest_path.empty() || guest_path.front() != '/') {
    throw NotCapable("guest path must be absolute");
  }
  if (guest_path.find('\0') != std::string_view::npos) throw NotCapable("NUL in path");
  auto parts = split_components(guest_path);
  std::erase(parts, ".");
  if (parts.empty()) throw NotCapable("the root of the virtual tree is not a preopen");

  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const Preopen& p) { return p.guest_name == parts.front(); });
  if (it == entries_.end()) throw NotCapable("no preopen named /" + parts.front());
  const Preopen& preopen = *it;

  std::vector<std::string> rest;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i] == "..") {
      if (rest.empty()) throw NotCapable("path climbs above its preopen");
      rest.pop_back();
    } else {
      rest.push_back(parts[i]);
    }
  }

  fs::path host = preopen.host_path;
  for (const auto& part : rest) host /= part;

  std::error_code ec;
  fs::path resolved = fs::weakly_canonical(host, ec);
  if (ec) throw NotCapable("cannot resolve path: " + ec.message());
  if (!path_within(preopen.host_path, resolved)) {
    throw NotCapable("path resolves outside its preopen");
  }
  if (access == Access::write && preopen.rights == Rights::read_only) {
    throw RightsViolation("write access under read-only preopen /" + preopen.guest_name);
  }
  return ResolvedPath{std::move(resolved), preopen.rights, &preopen};
}

std::pair<fs::path, Rights> parse_dir_flag(std::string_view flag) {
  auto strip = [&](std::string_view suffix) {
    if (flag.size() >= suffix.size() && flag.substr(flag.size() - suffix.size()) == suffix) {
      flag.remove_suffix(suffix.size());
      return true;
    }
    return false;
  };
  Rights rights = Rights::read_write;
  if (strip(":ro")) {
    rights = Rights::read_only;
  } else {
    strip(":rw");
  }
  if (flag.empty()) throw std::invalid_argument("empty directory in -d flag");
  return {fs::path(flag), rights};
}

}  // namespace mpiwasm
