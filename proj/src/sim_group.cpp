#include "mpiwasm/sim_group.hpp"

#include <memory>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "mpiwasm/transport/sim.hpp"

namespace mpiwasm {

std::int32_t GroupResult::exit_code() const {
  if (aborted) return abort_code;
  return ranks.empty() ? 0 : ranks.front().exit_code;
}

GroupResult spawn_sim_group(std::int32_t n, Engine& engine, const ModuleArtifact& artifact,
                            const InstanceConfig& cfg, const LifecycleHooks& hooks,
                            const SimGroupOptions& options) {
  if (n < 1) throw std::invalid_argument("a sim group needs at least one rank");

  auto group = std::make_shared<transport::RankGroup>(n);
  if (options.watchdog) group->set_watchdog(*options.watchdog);

  std::mutex slots_mutex;
  std::vector<Instance*> slots(static_cast<std::size_t>(n), nullptr);
  group->set_abort_hook([&] {
    std::lock_guard lock(slots_mutex);
    for (Instance* inst : slots) {
      if (inst != nullptr) inst->interrupt();
    }
    engine.interrupt_all();
  });

  GroupResult result;
  result.ranks.resize(static_cast<std::size_t>(n));

  auto worker = [&](std::int32_t rank) {
    RunResult& out = result.ranks[static_cast<std::size_t>(rank)];
    transport::SimBackend backend(group, rank);
    try {
      Instance instance(engine, artifact, cfg, backend);
      {
        std::lock_guard lock(slots_mutex);
        slots[static_cast<std::size_t>(rank)] = &instance;
      }
      if (group->aborted()) instance.interrupt();

      out = instance.run(hooks);

      {
        std::lock_guard lock(slots_mutex);
        slots[static_cast<std::size_t>(rank)] = nullptr;
      }
      if (out.outcome == Outcome::trapped) {
        spdlog::error("rank {} trapped: {}", rank, out.diagnostic);
        group->abort(out.exit_code, "rank " + std::to_string(rank) + " trapped: " + out.diagnostic);
      }
    } catch (const std::exception& e) {
      {
        std::lock_guard lock(slots_mutex);
        slots[static_cast<std::size_t>(rank)] = nullptr;
      }
      out.exit_code = 1;
      out.outcome = Outcome::trapped;
      out.diagnostic = e.what();
      spdlog::error("rank {}: {}", rank, e.what());
      group->abort(1, "rank " + std::to_string(rank) + ": " + e.what());
    }
    backend.cancel_pending();
    group->rank_finished(rank);
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n));
  for (std::int32_t r = 0; r < n; ++r) threads.emplace_back(worker, r);
  for (auto& t : threads) t.join();

  group->set_abort_hook(nullptr);
  result.aborted = group->aborted();
  result.abort_code = group->abort_code();
  result.abort_reason = group->abort_reason();
  return result;
}

}  // namespace mpiwasm
