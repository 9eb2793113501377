#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mpiwasm/instance.hpp"

namespace mpiwasm {

struct GroupResult {
  std::vector<RunResult> ranks;
  bool aborted = false;
  std::int32_t abort_code = 0;
  std::string abort_reason;

  /// Rank 0's exit code, or the abort code when the group was torn down.
  std::int32_t exit_code() const;
};

struct SimGroupOptions {
  /// Test hook: abort when a rank stays blocked this long.
  std::optional<std::chrono::milliseconds> watchdog;
};

/// Runs `n` independent instances of one artifact in this process, one worker
/// thread each. A trap or missing export in any rank aborts the group.
GroupResult spawn_sim_group(std::int32_t n, Engine& engine, const ModuleArtifact& artifact,
                            const InstanceConfig& cfg, const LifecycleHooks& hooks = {},
                            const SimGroupOptions& options = {});

}  // namespace mpiwasm
