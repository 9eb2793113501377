#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mpiwasm {

inline constexpr int kExitUsage = 2;
inline constexpr int kExitModule = 1;

/// `mpiwasm [--backend sim|native] [--np N] [-d DIR[:ro]]... [--cache-dir P]
///  [--no-cache] [--instrument] MODULE.wasm [-- args]`. Returns the process
/// exit code: the guest's (rank 0 for sim), 2 on usage errors, 1 when the
/// module cannot be loaded.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// `mpiwasm-bench [--suite S]... [--np N] [--iters K] [--sizes a,b,..]
///  [--probe] [--out FILE]`.
int run_bench_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpiwasm
