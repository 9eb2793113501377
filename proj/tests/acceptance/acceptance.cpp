// One line per acceptance criterion: PASS or FAIL, a name, and the evidence.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "bounds_fuzz.hpp"
#include "harness.hpp"
#include "mock_backend.hpp"
#include "mpiwasm/bench.hpp"
#include "path_fuzz.hpp"

using namespace mpiwasm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

// ------------------------------------------------------------------ oracle

Verdict oracle_equivalence() {
  const auto vm = harness::compile_fixture("script_vm.wat");
  std::mt19937_64 rng(0x5eed);
  const int total = 200;
  int matched = 0;
  std::string first_bad;
  const auto t0 = Clock::now();
  for (int k = 0; k < total; ++k) {
    const auto ranks = static_cast<std::int32_t>(1 + rng() % 8);
    const auto s = script::generate(rng(), ranks, 4 + static_cast<int>(rng() % 40));
    const auto ref = script::reference_run(s);
    const auto guest = harness::run_script(vm, s);
    bool ok = guest.result.exit_code() == 0;
    for (std::int32_t r = 0; ok && r < ranks; ++r) {
      ok = harness::first_mismatch(guest.memory[static_cast<std::size_t>(r)],
                                   ref[static_cast<std::size_t>(r)]) < 0;
    }
    if (ok) {
      ++matched;
    } else if (first_bad.empty()) {
      first_bad = " first failing seed " + std::to_string(s.seed);
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << matched << "/" << total << " scripts match the reference in " << secs << " s" << first_bad;
  return {matched == total && secs < 60.0, d.str()};
}

// --------------------------------------------------------------- zero copy

Verdict zero_copy() {
  const auto echo = harness::compile_fixture("echo.wat");
  const auto sizes = bench::default_sizes();
  const std::uint32_t iters = 3;
  auto setup = [&](Instance& inst) {
    auto m = inst.memory_bytes();
    const auto n = static_cast<std::uint32_t>(sizes.size());
    std::memcpy(m.data() + 8, &n, 4);
    std::memcpy(m.data() + 12, &iters, 4);
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::uint32_t>(sizes[i]);
      std::memcpy(m.data() + 64 + 4 * i, &v, 4);
    }
  };

  // Host layer over a native-shaped backend: the spans it sees must be the
  // guest's own bytes.
  mock::MockBackend mock;
  InstanceConfig cfg;
  cfg.argv = {"echo"};
  Instance inst(default_engine(), echo, cfg, mock);
  const std::byte* base = nullptr;
  LifecycleHooks hooks;
  hooks.on_instantiated = [&](Instance& i) {
    setup(i);
    base = i.memory_bytes().data();
  };
  const auto mock_result = inst.run(hooks);
  std::size_t bad_spans = 0, k = 0;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    for (std::uint32_t it = 0; it < iters; ++it) {
      for (auto [use, at] : {std::pair{mock::Use::send, 65536u}, std::pair{mock::Use::recv, 4259840u}}) {
        if (k >= mock.seen.size()) {
          ++bad_spans;
          continue;
        }
        const auto& seen = mock.seen[k++];
        if (seen.use != use || seen.data != base + at || seen.size != sizes[s]) ++bad_spans;
      }
    }
  }
  bad_spans += mock.seen.size() - std::min(k, mock.seen.size());
  const std::uint64_t host_copies = inst.env().counters.host_copies.load();

  // Sim: one copy into the mailbox, one out of it.
  std::uint64_t sim_copies = 0;
  std::uint64_t host_copies_sim = 0;
  std::mutex m;
  LifecycleHooks sim_hooks;
  sim_hooks.on_instantiated = setup;
  sim_hooks.on_exit = [&](Instance& i, const RunResult&) {
    std::lock_guard lock(m);
    sim_copies += i.backend().payload_copies();
    host_copies_sim += i.env().counters.host_copies.load();
  };
  InstanceConfig sim_cfg;
  sim_cfg.argv = {"echo"};
  const auto group = spawn_sim_group(2, default_engine(), echo, sim_cfg, sim_hooks);
  const std::uint64_t messages = 2ull * sizes.size() * iters;

  std::ostringstream d;
  d << sizes.size() << " sizes 1 B..4 MiB x" << iters << ": host-layer copies " << host_copies
    << " (mock) / " << host_copies_sim << " (sim), mock spans off-guest or misplaced " << bad_spans
    << " of " << mock.seen.size() << ", sim copies " << sim_copies << " for " << messages << " messages";
  const bool pass = mock_result.exit_code == 0 && group.exit_code() == 0 && host_copies == 0 &&
                    host_copies_sim == 0 && bad_spans == 0 && mock.seen.size() == messages &&
                    sim_copies == 2 * messages;
  return {pass, d.str()};
}

// ------------------------------------------------------- translation probe

Verdict translation_probe() {
  ArtifactCache cache(default_engine(), std::nullopt);
  const auto guest = bench::load_guest(default_engine(), cache);
  const auto t0 = Clock::now();
  const auto rows = bench::run_translation_probe(default_engine(), guest, bench::probe_datatypes(),
                                                 bench::default_sizes(), 40);
  const double secs = seconds_since(t0);
  double worst = 0;
  std::string worst_at;
  std::set<std::string> types;
  for (const auto& r : rows) {
    types.insert(r.datatype);
    if (r.median_ns > worst) {
      worst = r.median_ns;
      worst_at = r.datatype + "@" + std::to_string(r.msg_bytes);
    }
  }
  std::ostringstream d;
  d << rows.size() << " (datatype, size) cells over " << types.size() << " datatypes, worst median "
    << worst << " ns at " << worst_at << ", " << secs << " s";
  const bool pass = rows.size() == 6 * bench::default_sizes().size() && types.size() == 6 &&
                    worst < 1000.0 && secs < 30.0;
  return {pass, d.str()};
}

// ------------------------------------------------------------------- cache

std::string big_module_wat(int funcs) {
  std::ostringstream w;
  w << "(module (memory (export \"memory\") 1)\n";
  for (int f = 0; f < funcs; ++f) {
    w << "(func $f" << f << " (param i32) (result i32) (local i32)\n";
    for (int i = 0; i < 24; ++i) {
      w << " (local.set 1 (i32.xor (i32.mul (i32.add (local.get 0) (i32.const " << (f * 131 + i * 7919)
        << ")) (i32.const " << (2 * i + 1) << ")) (local.get 1)))\n";
    }
    w << " (local.get 1))\n";
  }
  w << "(func (export \"_start\") (drop (call $f0 (i32.const 1)))))\n";
  return w.str();
}

Verdict cache_warm_start() {
  const auto wasm = wat_to_wasm(big_module_wat(1400));
  const auto dir = fs::temp_directory_path() / ("mpiwasm-accept-cache-" + std::to_string(::getpid()));
  fs::remove_all(dir);

  auto start = [&](ArtifactCache& cache) {
    const auto t0 = Clock::now();
    const auto artifact = cache.compile_or_fetch(load_module(default_engine(), wasm));
    mock::MockBackend backend(1);
    InstanceConfig cfg;
    cfg.argv = {"big"};
    Instance inst(default_engine(), artifact, cfg, backend);
    const double secs = seconds_since(t0);
    return std::pair{secs, artifact.from_cache};
  };

  ArtifactCache cold_cache(default_engine(), dir);
  const auto [cold, cold_hit] = start(cold_cache);
  ArtifactCache warm_cache(default_engine(), dir);
  const auto [warm, warm_hit] = start(warm_cache);
  fs::remove_all(dir);

  std::ostringstream d;
  d << "module " << wasm.size() / 1024 << " KiB: cold " << cold * 1e3 << " ms (" << cold_cache.stats().compilations
    << " compile), warm " << warm * 1e3 << " ms (" << warm_cache.stats().compilations << " compiles, "
    << 100.0 * warm / cold << "% of cold)";
  const bool pass = wasm.size() >= 500 * 1024 && !cold_hit && warm_hit &&
                    warm_cache.stats().compilations == 0 && warm < 0.2 * cold;
  return {pass, d.str()};
}

// ------------------------------------------------------------ bounds fuzz

Verdict bounds() {
  const auto cases = bounds_fuzz::generate(0xb0b, 10000);
  const auto out = bounds_fuzz::run(cases);
  std::ostringstream d;
  d << out.cases << " spans, " << out.out_of_bounds << " out of bounds, " << out.rejected_ok
    << " rejected with ERR_ARG, " << out.mismatches << " mismatches, " << out.foreign_spans
    << " spans outside guest memory";
  if (!out.first_mismatch.empty()) d << " (" << out.first_mismatch << ")";
  const bool pass = out.exit_code == 0 && out.mismatches == 0 && out.foreign_spans == 0 &&
                    out.rejected_ok == out.out_of_bounds && out.out_of_bounds > 0;
  return {pass, d.str()};
}

// ----------------------------------------------------------- sandbox fuzz

Verdict sandbox() {
  path_fuzz::Tree tree("accept");
  const auto paths = path_fuzz::generate(0xd1d, 1000);
  const auto out = path_fuzz::run(tree, paths);
  std::ostringstream d;
  d << out.paths << " paths: guest opened " << out.guest_opened << " (" << out.guest_inside_reads
    << " inside reads), resolver accepted " << out.resolver_accepted << ", escapes "
    << out.guest_escapes + out.resolver_escapes;
  if (!out.escaped.empty()) d << " e.g. " << out.escaped.front();
  const bool pass = out.exit_code == 0 && out.guest_escapes == 0 && out.resolver_escapes == 0;
  return {pass, d.str()};
}

// -------------------------------------------------------------- allreduce

Verdict allreduce() {
  const auto art = harness::compile_fixture("allreduce.wat");
  bool pass = true;
  std::ostringstream d;
  for (int n : {1, 2, 4, 8}) {
    auto snap = harness::run_snapshot(art, n, 64);
    int agree = 0;
    for (const auto& m : snap.memory) agree += harness::i32_at(m, 40) == n * (n - 1) / 2;
    d << "n=" << n << ": " << agree << "/" << n << " ranks saw " << n * (n - 1) / 2 << "; ";
    pass = pass && snap.result.exit_code() == 0 && agree == n;
  }
  return {pass, d.str()};
}

// ----------------------------------------------------------- WAT fixtures

struct FixtureRun {
  int ranks;
  int exit_code;
  bool needs_dir = false;
};

Verdict fixtures() {
  const std::map<std::string, FixtureRun> expect = {
      {"abort.wat", {3, 7}},          {"allreduce.wat", {4, 0}},     {"alloc_mem.wat", {2, 0}},
      {"alloc_no_exports.wat", {1, 0}}, {"bounds_probe.wat", {2, 0}}, {"collectives.wat", {4, 0}},
      {"comms.wat", {4, 0}},          {"deadlock.wat", {2, 1}},      {"echo.wat", {2, 0}},
      {"errors.wat", {1, 0}},         {"exit3.wat", {2, 3}},         {"fs.wat", {1, 0, true}},
      {"grow.wat", {2, 0}},           {"hello.wat", {2, 0}},         {"nonblocking.wat", {4, 0}},
      {"oob_trap.wat", {1, 134}},     {"path_probe.wat", {1, 0, true}}, {"pingpong.wat", {2, 0}},
      {"script_vm.wat", {3, 0}},      {"spin.wat", {4, 9}},          {"trap_rank1.wat", {2, 134}},
      {"unknown_import.wat", {1, 0}},
  };
  const std::set<std::string> rejected = {"shared_memory.wat", "no_start.wat"};

  std::set<std::string> imported;
  std::vector<std::string> failures;
  int ran = 0;
  path_fuzz::Tree tree("fixtures");
  for (const auto& entry : fs::directory_iterator(MPIWASM_FIXTURE_DIR)) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".wat") continue;
    const auto wasm = wat_to_wasm(harness::read_text(entry.path()));
    for (const auto& imp : scan_module(wasm).imports) {
      if (imp.module == "env") imported.insert(imp.name);
    }
    if (rejected.count(name)) {
      try {
        auto art = harness::compile_bytes(wasm);
        auto snap = harness::run_snapshot(art, 1, 0);
        if (!snap.result.aborted && snap.result.exit_code() == 0) failures.push_back(name + " ran");
      } catch (const UnsupportedFeature&) {
      } catch (const MalformedModule&) {
      }
      ++ran;
      continue;
    }
    auto it = expect.find(name);
    if (it == expect.end()) {
      failures.push_back(name + " has no expectation");
      continue;
    }
    InstanceConfig cfg;
    if (it->second.needs_dir) cfg.preopens = {{tree.root, Rights::read_write}};
    const auto snap = harness::run_snapshot(harness::compile_bytes(wasm), it->second.ranks, 0, cfg);
    ++ran;
    if (snap.result.exit_code() != it->second.exit_code) {
      failures.push_back(name + " exited " + std::to_string(snap.result.exit_code()));
    }
  }
  std::vector<std::string> uncovered;
  for (const auto& h : shipped_hostcalls()) {
    if (!imported.count(std::string(h.name))) uncovered.emplace_back(h.name);
  }
  std::ostringstream d;
  d << ran << " fixtures run, " << failures.size() << " failed, " << shipped_hostcalls().size() - uncovered.size()
    << "/" << shipped_hostcalls().size() << " shipped hostcalls imported";
  for (const auto& f : failures) d << "; " << f;
  for (const auto& u : uncovered) d << "; missing " << u;
  return {failures.empty() && uncovered.empty() && ran == static_cast<int>(expect.size() + rejected.size()),
          d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle-equivalence", oracle_equivalence},
      {"zero-copy-accounting", zero_copy},
      {"translation-probe", translation_probe},
      {"cache-warm-start", cache_warm_start},
      {"bounds-fuzz", bounds},
      {"sandbox-fuzz", sandbox},
      {"allreduce-rank-sum", allreduce},
      {"wat-fixture-suite", fixtures},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
