// Run under a launcher: every process runs one generated script twice, once
// on an in-process sim group and once as its own rank over the native
// backend, then compares its whole image. Exit 0 only if every rank matched.
#include <cstdio>
#include <cstdlib>
#include <string>

#include <mpi.h>

#include "harness.hpp"
#include "mpiwasm/transport/native.hpp"

using namespace mpiwasm;

namespace {

int run(std::uint64_t seed, int events) {
  transport::NativeBackend native;
  const ModuleArtifact vm = harness::compile_fixture("script_vm.wat");
  const std::int32_t ranks = native.world_size();
  const std::int32_t me = native.world_rank();
  const script::Script s = script::generate(seed, ranks, events);

  const auto sim = harness::run_script(vm, s);
  if (sim.result.exit_code() != 0) {
    std::fprintf(stderr, "rank %d: sim run exited %d\n", me, sim.result.exit_code());
    return 1;
  }

  InstanceConfig cfg;
  cfg.argv = {"guest"};
  std::vector<std::byte> image;
  LifecycleHooks hooks;
  hooks.on_instantiated = [&](Instance& inst) {
    const auto img = script::initial_image(s, inst.rank());
    std::memcpy(inst.memory_bytes().data(), img.data(), img.size());
  };
  hooks.on_exit = [&](Instance& inst, const RunResult&) {
    auto mem = inst.memory_bytes();
    image.assign(mem.begin(), mem.begin() + script::kImageSize);
  };
  Instance instance(default_engine(), vm, cfg, native);
  const RunResult result = instance.run(hooks);
  if (result.exit_code != 0) {
    std::fprintf(stderr, "rank %d: native run exited %d\n", me, result.exit_code);
    return 1;
  }

  const auto& want = sim.memory[static_cast<std::size_t>(me)];
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (image[i] != want[i]) {
      std::fprintf(stderr, "rank %d: seed %llu differs at %zu\n", me,
                   static_cast<unsigned long long>(seed), i);
      return 1;
    }
  }
  std::printf("rank %d: seed %llu matched (%zu bytes)\n", me, static_cast<unsigned long long>(seed),
              image.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: differential SEED EVENTS\n");
    return 2;
  }
  const std::uint64_t seed = std::strtoull(argv[1], nullptr, 10);
  const int events = std::atoi(argv[2]);

  // the driver owns MPI init so rank and size are known before the guest runs
  MPI_Init(&argc, &argv);
  const int status = run(seed, events);
  MPI_Finalize();
  return status;
}
