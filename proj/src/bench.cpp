#include "mpiwasm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numeric>

#include "mpiwasm/sim_group.hpp"

namespace mpiwasm::bench {
namespace {

// Parameter block written by the host before `_start`:
//   16 suite   20 count   24 datatype   28 iters   32 pages   36 recv buffer
// Outputs: 40 allreduce of rank ids, 4096.. one f64 per iteration (seconds).
// The send buffer always starts at 65536.
constexpr std::uint32_t kSuiteAt = 16;
constexpr std::uint32_t kCountAt = 20;
constexpr std::uint32_t kTypeAt = 24;
constexpr std::uint32_t kItersAt = 28;
constexpr std::uint32_t kPagesAt = 32;
constexpr std::uint32_t kRecvAt = 36;
constexpr std::uint32_t kRankSumAt = 40;
constexpr std::uint32_t kTimesAt = 4096;
constexpr std::uint32_t kSendBuf = 65536;
constexpr std::int32_t kProbeSuite = 6;

constexpr std::string_view kGuest = R"wat(
(module
  (import "env" "MPI_Init" (func $init (param i32 i32) (result i32)))
  (import "env" "MPI_Finalize" (func $finalize (result i32)))
  (import "env" "MPI_Comm_rank" (func $comm_rank (param i32 i32) (result i32)))
  (import "env" "MPI_Comm_size" (func $comm_size (param i32 i32) (result i32)))
  (import "env" "MPI_Barrier" (func $barrier (param i32) (result i32)))
  (import "env" "MPI_Send" (func $send (param i32 i32 i32 i32 i32 i32) (result i32)))
  (import "env" "MPI_Recv" (func $recv (param i32 i32 i32 i32 i32 i32 i32) (result i32)))
  (import "env" "MPI_Sendrecv"
    (func $sendrecv (param i32 i32 i32 i32 i32 i32 i32 i32 i32 i32 i32 i32) (result i32)))
  (import "env" "MPI_Bcast" (func $bcast (param i32 i32 i32 i32 i32) (result i32)))
  (import "env" "MPI_Allreduce" (func $allreduce (param i32 i32 i32 i32 i32 i32) (result i32)))
  (import "env" "MPI_Allgather" (func $allgather (param i32 i32 i32 i32 i32 i32 i32) (result i32)))
  (import "env" "MPI_Alltoall" (func $alltoall (param i32 i32 i32 i32 i32 i32 i32) (result i32)))
  (import "env" "MPI_Wtime" (func $wtime (result f64)))
  (import "wasi_snapshot_preview1" "proc_exit" (func $exit (param i32)))
  (memory (export "memory") 1)

  (func $check (param $rc i32)
    (if (local.get $rc) (then (call $exit (i32.add (i32.const 100) (local.get $rc))))))

  (func $op (param $suite i32) (param $rank i32) (param $n i32)
    (local $count i32) (local $dt i32) (local $rbuf i32)
    (local.set $count (i32.load (i32.const 20)))
    (local.set $dt (i32.load (i32.const 24)))
    (local.set $rbuf (i32.load (i32.const 36)))
    (block $done
      (if (i32.or (i32.eqz (local.get $suite)) (i32.eq (local.get $suite) (i32.const 6)))
        (then
          (if (i32.eqz (local.get $rank))
            (then
              (call $check (call $send (i32.const 65536) (local.get $count) (local.get $dt)
                                       (i32.const 1) (i32.const 0) (i32.const 0)))
              (call $check (call $recv (local.get $rbuf) (local.get $count) (local.get $dt)
                                       (i32.const 1) (i32.const 0) (i32.const 0) (i32.const 0)))))
          (if (i32.eq (local.get $rank) (i32.const 1))
            (then
              (call $check (call $recv (local.get $rbuf) (local.get $count) (local.get $dt)
                                       (i32.const 0) (i32.const 0) (i32.const 0) (i32.const 0)))
              (call $check (call $send (i32.const 65536) (local.get $count) (local.get $dt)
                                       (i32.const 0) (i32.const 0) (i32.const 0)))))
          (br $done)))
      (if (i32.eq (local.get $suite) (i32.const 1))
        (then
          (call $check (call $sendrecv
            (i32.const 65536) (local.get $count) (local.get $dt)
            (i32.rem_u (i32.add (local.get $rank) (i32.const 1)) (local.get $n)) (i32.const 0)
            (local.get $rbuf) (local.get $count) (local.get $dt)
            (i32.rem_u (i32.add (local.get $rank) (i32.sub (local.get $n) (i32.const 1))) (local.get $n))
            (i32.const 0) (i32.const 0) (i32.const 0)))
          (br $done)))
      (if (i32.eq (local.get $suite) (i32.const 2))
        (then
          (call $check (call $bcast (i32.const 65536) (local.get $count) (local.get $dt)
                                    (i32.const 0) (i32.const 0)))
          (br $done)))
      (if (i32.eq (local.get $suite) (i32.const 3))
        (then
          (call $check (call $allreduce (i32.const 65536) (local.get $rbuf) (local.get $count)
                                        (local.get $dt) (i32.const 0) (i32.const 0)))
          (br $done)))
      (if (i32.eq (local.get $suite) (i32.const 4))
        (then
          (call $check (call $allgather (i32.const 65536) (local.get $count) (local.get $dt)
                                        (local.get $rbuf) (local.get $count) (local.get $dt)
                                        (i32.const 0)))
          (br $done)))
      (if (i32.eq (local.get $suite) (i32.const 5))
        (then
          (call $check (call $alltoall (i32.const 65536) (local.get $count) (local.get $dt)
                                       (local.get $rbuf) (local.get $count) (local.get $dt)
                                       (i32.const 0)))
          (br $done)))
      (call $exit (i32.const 99))))

  (func (export "_start")
    (local $rank i32) (local $n i32) (local $suite i32) (local $iters i32) (local $i i32)
    (local $t f64)
    (call $check (call $init (i32.const 0) (i32.const 0)))
    (call $check (call $comm_rank (i32.const 0) (i32.const 8)))
    (call $check (call $comm_size (i32.const 0) (i32.const 12)))
    (local.set $rank (i32.load (i32.const 8)))
    (local.set $n (i32.load (i32.const 12)))
    (local.set $suite (i32.load (i32.const 16)))
    (local.set $iters (i32.load (i32.const 28)))
    (if (i32.gt_u (i32.load (i32.const 32)) (memory.size))
      (then
        (if (i32.eq (memory.grow (i32.sub (i32.load (i32.const 32)) (memory.size))) (i32.const -1))
          (then (call $exit (i32.const 90))))))

    (i32.store (i32.const 44) (local.get $rank))
    (call $check (call $allreduce (i32.const 44) (i32.const 40) (i32.const 1) (i32.const 2)
                                  (i32.const 0) (i32.const 0)))

    (call $op (local.get $suite) (local.get $rank) (local.get $n))
    (call $check (call $barrier (i32.const 0)))
    (block $out
      (loop $next
        (br_if $out (i32.ge_s (local.get $i) (local.get $iters)))
        (local.set $t (call $wtime))
        (call $op (local.get $suite) (local.get $rank) (local.get $n))
        (f64.store (i32.add (i32.const 4096) (i32.shl (local.get $i) (i32.const 3)))
                   (f64.sub (call $wtime) (local.get $t)))
        (local.set $i (i32.add (local.get $i) (i32.const 1)))
        (br $next)))
    (call $check (call $barrier (i32.const 0)))
    (call $check (call $finalize))))
)wat";

struct Layout {
  std::uint64_t count = 0;
  std::uint64_t send_bytes = 0;
  std::uint64_t recv_bytes = 0;
  std::uint32_t recv_at = 0;
  std::uint32_t pages = 0;
};

Layout layout_for(std::int32_t suite, std::uint64_t msg_bytes, abi::Datatype type, std::int32_t n) {
  const std::uint64_t width = *abi::datatype_size(static_cast<std::int32_t>(type));
  Layout l;
  l.count = std::max<std::uint64_t>(1, msg_bytes / width);
  const std::uint64_t bytes = l.count * width;
  const bool blocks_out = suite == static_cast<std::int32_t>(Suite::alltoall);
  const bool blocks_in = blocks_out || suite == static_cast<std::int32_t>(Suite::allgather);
  l.send_bytes = bytes * (blocks_out ? static_cast<std::uint64_t>(n) : 1);
  l.recv_bytes = bytes * (blocks_in ? static_cast<std::uint64_t>(n) : 1);
  const std::uint64_t recv_at = (kSendBuf + l.send_bytes + 7) & ~std::uint64_t{7};
  const std::uint64_t end = recv_at + l.recv_bytes;
  if (end > kMaxMemoryBytes) throw transport::BackendError("benchmark buffers exceed 4 GiB");
  l.recv_at = static_cast<std::uint32_t>(recv_at);
  l.pages = static_cast<std::uint32_t>((end + kWasmPageSize - 1) / kWasmPageSize);
  return l;
}

void put(std::span<std::byte> mem, std::uint32_t at, std::uint32_t value) {
  std::memcpy(mem.data() + at, &value, sizeof value);
}

struct GuestRun {
  std::vector<double> seconds;  // rank 0
  std::int32_t rank_sum = 0;
};

GuestRun run_guest(Engine& engine, const ModuleArtifact& guest, std::int32_t suite,
                   std::uint64_t msg_bytes, abi::Datatype type, std::int32_t ranks,
                   std::int32_t iters, bool instrument,
                   std::vector<TranslationSample>* samples,
                   const std::function<void()>& on_instantiated) {
  if (iters < 1 || iters > kMaxIters) {
    throw std::invalid_argument("iterations must be in [1, " + std::to_string(kMaxIters) + "]");
  }
  const bool two_party = suite == static_cast<std::int32_t>(Suite::pingpong) || suite == kProbeSuite;
  if (two_party && ranks < 2) throw std::invalid_argument("pingpong needs at least two ranks");

  const Layout l = layout_for(suite, msg_bytes, type, ranks);
  InstanceConfig cfg;
  cfg.argv = {"bench"};
  cfg.instrument = instrument;

  GuestRun out;
  std::mutex mutex;
  LifecycleHooks hooks;
  hooks.on_instantiated = [&](Instance& inst) {
    auto mem = inst.memory_bytes();
    put(mem, kSuiteAt, static_cast<std::uint32_t>(suite));
    put(mem, kCountAt, static_cast<std::uint32_t>(l.count));
    put(mem, kTypeAt, static_cast<std::uint32_t>(type));
    put(mem, kItersAt, static_cast<std::uint32_t>(iters));
    put(mem, kPagesAt, l.pages);
    put(mem, kRecvAt, l.recv_at);
    if (inst.rank() == 0 && on_instantiated) on_instantiated();
  };
  hooks.on_exit = [&](Instance& inst, const RunResult& result) {
    if (result.outcome != Outcome::exited || result.exit_code != 0) return;
    auto mem = inst.memory_bytes();
    std::lock_guard lock(mutex);
    if (samples != nullptr) {
      auto s = inst.env().translation_samples.snapshot();
      samples->insert(samples->end(), s.begin(), s.end());
    }
    if (inst.rank() != 0) return;
    std::memcpy(&out.rank_sum, mem.data() + kRankSumAt, sizeof out.rank_sum);
    out.seconds.resize(static_cast<std::size_t>(iters));
    std::memcpy(out.seconds.data(), mem.data() + kTimesAt, out.seconds.size() * sizeof(double));
  };

  const GroupResult result = spawn_sim_group(ranks, engine, guest, cfg, hooks);
  if (result.aborted) {
    throw transport::BackendError("benchmark group aborted: " + result.abort_reason);
  }
  for (std::size_t r = 0; r < result.ranks.size(); ++r) {
    if (result.ranks[r].exit_code != 0) {
      throw transport::BackendError("benchmark rank " + std::to_string(r) + " exited with " +
                                    std::to_string(result.ranks[r].exit_code));
    }
  }
  const std::int32_t expected = ranks * (ranks - 1) / 2;
  if (out.rank_sum != expected) {
    throw transport::BackendError("allreduce self-check failed: got " +
                                  std::to_string(out.rank_sum) + ", expected " +
                                  std::to_string(expected));
  }
  return out;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  // Nearest rank.
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::min(v.size() - 1, rank == 0 ? 0 : rank - 1)];
}

}  // namespace

const char* suite_name(Suite suite) {
  switch (suite) {
    case Suite::pingpong:
      return "pingpong";
    case Suite::sendrecv:
      return "sendrecv";
    case Suite::bcast:
      return "bcast";
    case Suite::allreduce:
      return "allreduce";
    case Suite::allgather:
      return "allgather";
    case Suite::alltoall:
      return "alltoall";
  }
  return "unknown";
}

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> suites = {Suite::pingpong,  Suite::sendrecv,  Suite::bcast,
                                            Suite::allreduce, Suite::allgather, Suite::alltoall};
  return suites;
}

std::optional<Suite> parse_suite(std::string_view name) {
  for (Suite s : all_suites()) {
    if (name == suite_name(s)) return s;
  }
  return std::nullopt;
}

std::vector<std::uint64_t> default_sizes() {
  std::vector<std::uint64_t> sizes;
  for (std::uint64_t s = 1; s <= (std::uint64_t{4} << 20); s <<= 1) sizes.push_back(s);
  return sizes;
}

std::string_view guest_wat() { return kGuest; }

ModuleArtifact load_guest(Engine& engine, ArtifactCache& cache) {
  const auto bytes = wat_to_wasm(kGuest);
  return cache.compile_or_fetch(load_module(engine, bytes));
}

std::vector<Row> run_bench(Engine& engine, const ModuleArtifact& guest, Suite suite,
                           const std::vector<std::uint64_t>& sizes, const RunOptions& options) {
  std::vector<Row> rows;
  // Reductions run on MPI_INT so the sum is meaningful; the rest move bytes.
  const abi::Datatype type = suite == Suite::allreduce ? abi::Datatype::int_ : abi::Datatype::byte;
  for (std::uint64_t size : sizes) {
    const GuestRun run = run_guest(engine, guest, static_cast<std::int32_t>(suite), size, type,
                                   options.ranks, options.iters, false, nullptr,
                                   options.on_instantiated);
    // Pingpong reports half the round trip, as the IMB PingPong does.
    const double scale = suite == Suite::pingpong ? 0.5e6 : 1e6;
    std::vector<double> usec(run.seconds.size());
    std::transform(run.seconds.begin(), run.seconds.end(), usec.begin(),
                   [&](double s) { return s * scale; });
    Row row;
    row.suite = suite_name(suite);
    row.msg_bytes = layout_for(static_cast<std::int32_t>(suite), size, type, options.ranks).count *
                    *abi::datatype_size(static_cast<std::int32_t>(type));
    row.ranks = options.ranks;
    row.iter = options.iters;
    row.usec_avg = std::accumulate(usec.begin(), usec.end(), 0.0) / static_cast<double>(usec.size());
    row.usec_min = *std::min_element(usec.begin(), usec.end());
    row.usec_max = *std::max_element(usec.begin(), usec.end());
    row.rank_sum = run.rank_sum;
    rows.push_back(row);
  }
  return rows;
}

const std::vector<abi::Datatype>& probe_datatypes() {
  static const std::vector<abi::Datatype> types = {abi::Datatype::byte,  abi::Datatype::char_,
                                                   abi::Datatype::int_,  abi::Datatype::float_,
                                                   abi::Datatype::double_, abi::Datatype::long_};
  return types;
}

std::vector<ProbeRow> run_translation_probe(Engine& engine, const ModuleArtifact& guest,
                                            const std::vector<abi::Datatype>& datatypes,
                                            const std::vector<std::uint64_t>& sizes,
                                            std::int32_t iters) {
  std::vector<ProbeRow> rows;
  for (abi::Datatype type : datatypes) {
    for (std::uint64_t size : sizes) {
      std::vector<TranslationSample> samples;
      run_guest(engine, guest, kProbeSuite, size, type, 2, iters, true, &samples, nullptr);
      std::vector<double> ns;
      ns.reserve(samples.size());
      for (const auto& s : samples) ns.push_back(static_cast<double>(s.nanos));
      ProbeRow row;
      row.datatype = abi::datatype_name(static_cast<std::int32_t>(type));
      row.msg_bytes = samples.empty() ? size : samples.front().message_bytes;
      row.count = ns.size();
      row.median_ns = percentile(ns, 0.5);
      row.p99_ns = percentile(ns, 0.99);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<Row>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.suite << ',' << r.msg_bytes << ',' << r.ranks << ',' << r.iter << ',' << r.usec_avg
        << ',' << r.usec_min << ',' << r.usec_max << '\n';
  }
}

void write_probe_csv(std::ostream& out, const std::vector<ProbeRow>& rows) {
  out << kProbeCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.datatype << ',' << r.msg_bytes << ',' << r.count << ',' << r.median_ns << ','
        << r.p99_ns << '\n';
  }
}

}  // namespace mpiwasm::bench
