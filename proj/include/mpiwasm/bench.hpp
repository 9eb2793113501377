#pragma once

// Mini-benchmarks with the shapes of the Intel MPI Benchmarks, run as a Wasm
// guest under the sim backend, plus the datatype-translation latency probe.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mpiwasm/artifact_cache.hpp"
#include "mpiwasm/instance.hpp"

namespace mpiwasm::bench {

enum class Suite { pingpong = 0, sendrecv = 1, bcast = 2, allreduce = 3, allgather = 4, alltoall = 5 };

const char* suite_name(Suite suite);
std::optional<Suite> parse_suite(std::string_view name);
const std::vector<Suite>& all_suites();

struct Row {
  std::string suite;
  std::uint64_t msg_bytes = 0;
  std::int32_t ranks = 0;
  std::int32_t iter = 0;
  double usec_avg = 0;
  double usec_min = 0;
  double usec_max = 0;
  std::int32_t rank_sum = 0;  // allreduce of rank ids taken before timing
};

struct ProbeRow {
  std::string datatype;
  std::uint64_t msg_bytes = 0;
  std::uint64_t count = 0;
  double median_ns = 0;
  double p99_ns = 0;
};

inline constexpr std::string_view kCsvHeader = "suite,msg_bytes,ranks,iter,usec_avg,usec_min,usec_max";
inline constexpr std::string_view kProbeCsvHeader = "datatype,msg_bytes,count,median_ns,p99_ns";
inline constexpr std::int32_t kMaxIters = 4096;

/// 1 B to 4 MiB in powers of two.
std::vector<std::uint64_t> default_sizes();

/// The benchmark guest in text form.
std::string_view guest_wat();

/// Compiles (or fetches) the benchmark guest.
ModuleArtifact load_guest(Engine& engine, ArtifactCache& cache);

struct RunOptions {
  std::int32_t ranks = 2;
  std::int32_t iters = 100;
  /// Called on rank 0 after instantiation and before `_start`.
  std::function<void()> on_instantiated;
};

/// One row per size. Throws BackendError when the guest fails or when the
/// allreduce self-check disagrees with n(n-1)/2.
std::vector<Row> run_bench(Engine& engine, const ModuleArtifact& guest, Suite suite,
                           const std::vector<std::uint64_t>& sizes, const RunOptions& options);

/// The six datatypes of the probe: BYTE, CHAR, INT, FLOAT, DOUBLE, LONG.
const std::vector<abi::Datatype>& probe_datatypes();

/// Pingpong per (datatype, size) with instrumentation on; reports the latency
/// of the datatype lookup on the send path.
std::vector<ProbeRow> run_translation_probe(Engine& engine, const ModuleArtifact& guest,
                                            const std::vector<abi::Datatype>& datatypes,
                                            const std::vector<std::uint64_t>& sizes,
                                            std::int32_t iters);

void write_csv(std::ostream& out, const std::vector<Row>& rows);
void write_probe_csv(std::ostream& out, const std::vector<ProbeRow>& rows);

}  // namespace mpiwasm::bench
