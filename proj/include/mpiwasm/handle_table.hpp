#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

namespace mpiwasm {

/// Opaque host-side MPI object. Wide enough for both pointer-style
/// (Open MPI) and integer-style (MPICH) handles.
template <class Tag>
struct HostHandle {
  std::intptr_t value = 0;
  friend constexpr auto operator<=>(HostHandle, HostHandle) = default;
};

using HostComm = HostHandle<struct HostCommTag>;
using HostDatatype = HostHandle<struct HostDatatypeTag>;
using HostOp = HostHandle<struct HostOpTag>;
using HostRequest = HostHandle<struct HostRequestTag>;

/// Per-instance map from guest integer codes to host handles.
///
/// Lookups take a shared lock, registration and release an exclusive one.
/// Codes handed out by `add` increase monotonically and are never reused.
template <class Handle>
class HandleTable {
 public:
  explicit HandleTable(std::int32_t first_dynamic_code) : next_code_(first_dynamic_code) {}

  void add_predefined(std::int32_t code, Handle handle) {
    std::unique_lock lock(mutex_);
    entries_[code] = Entry{handle, true};
  }

  /// Returns nullopt when the code space is exhausted.
  std::optional<std::int32_t> add(Handle handle) {
    std::unique_lock lock(mutex_);
    if (next_code_ == std::numeric_limits<std::int32_t>::max()) return std::nullopt;
    const std::int32_t code = next_code_++;
    entries_.emplace(code, Entry{handle, false});
    return code;
  }

  std::optional<Handle> find(std::int32_t code) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(code);
    if (it == entries_.end()) return std::nullopt;
    return it->second.handle;
  }

  bool is_predefined(std::int32_t code) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(code);
    return it != entries_.end() && it->second.predefined;
  }

  /// Removes a dynamic entry. Predefined and unknown codes are left alone.
  std::optional<Handle> remove(std::int32_t code) {
    std::unique_lock lock(mutex_);
    auto it = entries_.find(code);
    if (it == entries_.end() || it->second.predefined) return std::nullopt;
    Handle handle = it->second.handle;
    entries_.erase(it);
    return handle;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  std::int32_t next_code() const {
    std::shared_lock lock(mutex_);
    return next_code_;
  }

 private:
  struct Entry {
    Handle handle;
    bool predefined;
  };

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::int32_t, Entry> entries_;
  std::int32_t next_code_;
};

}  // namespace mpiwasm
