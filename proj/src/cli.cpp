#include "mpiwasm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>

#include <spdlog/spdlog.h>

#include "mpiwasm/abi.hpp"
#include "mpiwasm/artifact_cache.hpp"
#include "mpiwasm/bench.hpp"
#include "mpiwasm/engine.hpp"
#include "mpiwasm/fs_sandbox.hpp"
#include "mpiwasm/instance.hpp"
#include "mpiwasm/sim_group.hpp"
#ifdef MPIWASM_HAVE_MPI
#include "mpiwasm/transport/native.hpp"
#endif

namespace mpiwasm {
namespace {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// App::parse(vector) consumes from the back.
std::vector<std::string> reversed(std::vector<std::string> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

int run_module(const std::string& module_path, const InstanceConfig& cfg,
               transport::BackendKind backend, std::optional<std::int32_t> np,
               std::ostream& err) {
  Engine& engine = default_engine();
  std::optional<std::filesystem::path> dir;
  if (cfg.cache_enabled) dir = cfg.cache_dir ? *cfg.cache_dir : default_cache_dir();
  ArtifactCache cache(engine, dir);

  ModuleArtifact artifact;
  try {
    auto bytes = read_file_bytes(module_path);
    static constexpr std::uint8_t kMagic[] = {0x00, 0x61, 0x73, 0x6d};
    if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
      bytes = wat_to_wasm({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
    }
    artifact = cache.compile_or_fetch(load_module(engine, bytes));
  } catch (const std::exception& e) {
    err << "mpiwasm: " << module_path << ": " << e.what() << '\n';
    return kExitModule;
  }

  try {
    if (backend == transport::BackendKind::sim) {
      const GroupResult result = spawn_sim_group(*np, engine, artifact, cfg);
      // Traps are already logged by the rank that hit them.
      if (result.aborted && result.abort_reason.find("trapped") == std::string::npos) {
        err << "mpiwasm: " << result.abort_reason << '\n';
      }
      return result.exit_code();
    }
#ifdef MPIWASM_HAVE_MPI
    transport::NativeBackend native;
    Instance instance(engine, artifact, cfg, native);
    const RunResult result = instance.run();
    if (result.outcome == Outcome::trapped) err << "mpiwasm: trapped: " << result.diagnostic << '\n';
    return result.exit_code;
#else
    err << "mpiwasm: native backend not available in this build\n";
    return kExitUsage;
#endif
  } catch (const MissingExport& e) {
    err << "mpiwasm: " << module_path << ": " << e.what() << '\n';
    return kExitModule;
  } catch (const InstantiationFailed& e) {
    err << "mpiwasm: " << module_path << ": " << e.what() << '\n';
    return kExitModule;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Run MPI programs compiled to WebAssembly"};
  app.name("mpiwasm");
  std::string backend_name = "sim";
  std::optional<std::int32_t> np;
  std::vector<std::string> dirs;
  std::optional<std::string> cache_dir;
  bool no_cache = false;
  bool instrument = false;
  bool print_abi = false;
  bool print_hostcalls = false;
  std::string module;
  std::vector<std::string> guest_args;

  app.add_option("--backend", backend_name, "Transport backend")
      ->check(CLI::IsMember({"sim", "native"}));
  app.add_option("--np", np, "Number of ranks (sim only)")->check(CLI::Range(1, 1024));
  app.add_option("-d,--dir", dirs, "Preopen DIR for the guest; DIR:ro for read-only")
      ->allow_extra_args(false);
  app.add_option("--cache-dir", cache_dir, "Artifact cache directory");
  app.add_flag("--no-cache", no_cache, "Always compile; never read or write the cache");
  app.add_flag("--instrument", instrument, "Time datatype translations");
  app.add_flag("--print-abi", print_abi, "Print the ABI manifest and exit");
  app.add_flag("--print-hostcalls", print_hostcalls, "Print the env imports and exit");
  app.add_option("module", module, "Guest module (.wasm or .wat)");
  app.add_option("args", guest_args, "Guest arguments (after --)");
  app.positionals_at_end(false);

  try {
    auto argv = reversed(args);
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (print_abi) {
    out << abi::abi_manifest();
    return 0;
  }
  if (print_hostcalls) {
    for (const auto& h : shipped_hostcalls()) {
      out << h.name << " (" << h.params << " x i32) -> " << (h.returns_f64 ? "f64" : "i32") << '\n';
    }
    return 0;
  }

  try {
    if (module.empty()) throw Usage("a module is required");
    const auto backend = backend_name == "sim" ? transport::BackendKind::sim
                                               : transport::BackendKind::native;
    if (backend == transport::BackendKind::sim && !np) throw Usage("--backend sim requires --np");
    if (backend == transport::BackendKind::native && np) {
      throw Usage("--np is not accepted with --backend native; the launcher sets the rank count");
    }

    InstanceConfig cfg;
    cfg.backend = backend;
    cfg.instrument = instrument;
    cfg.cache_enabled = !no_cache;
    if (cache_dir) {
      cfg.cache_dir = *cache_dir;
    } else if (const char* env = std::getenv("MPIWASM_CACHE_DIR"); env != nullptr && *env != 0) {
      cfg.cache_dir = env;
    }
    for (const auto& d : dirs) {
      auto [path, rights] = parse_dir_flag(d);
      std::error_code ec;
      if (!std::filesystem::is_directory(path, ec)) throw Usage("-d " + d + ": not a directory");
      cfg.preopens.emplace_back(path, rights);
    }
    cfg.argv.push_back(std::filesystem::path(module).filename().string());
    cfg.argv.insert(cfg.argv.end(), guest_args.begin(), guest_args.end());
    return run_module(module, cfg, backend, np, err);
  } catch (const Usage& e) {
    err << "mpiwasm: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "mpiwasm: " << e.what() << '\n';
    return kExitUsage;
  }
}

int run_bench_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IMB-style benchmarks and the datatype translation probe, under sim"};
  app.name("mpiwasm-bench");
  std::vector<std::string> suites;
  std::int32_t np = 2;
  std::int32_t iters = 100;
  std::vector<std::uint64_t> sizes;
  bool probe = false;
  std::optional<std::string> out_file;
  std::optional<std::string> cache_dir;

  app.add_option("--suite", suites, "pingpong, sendrecv, bcast, allreduce, allgather, alltoall");
  app.add_option("--np", np, "Ranks")->check(CLI::Range(1, 64));
  app.add_option("--iters", iters, "Timed iterations per size")->check(CLI::Range(1, bench::kMaxIters));
  app.add_option("--sizes", sizes, "Message sizes in bytes")->delimiter(',');
  app.add_flag("--probe", probe, "Run the datatype translation probe instead");
  app.add_option("--out", out_file, "Write CSV here instead of stdout");
  app.add_option("--cache-dir", cache_dir, "Artifact cache directory");

  try {
    auto argv = reversed(args);
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  std::vector<bench::Suite> chosen;
  for (const auto& s : suites) {
    auto suite = bench::parse_suite(s);
    if (!suite) {
      err << "mpiwasm-bench: unknown suite '" << s << "'\n";
      return kExitUsage;
    }
    chosen.push_back(*suite);
  }
  if (chosen.empty()) chosen = bench::all_suites();
  if (sizes.empty()) sizes = bench::default_sizes();

  std::ofstream file;
  if (out_file) {
    file.open(*out_file);
    if (!file) {
      err << "mpiwasm-bench: cannot write " << *out_file << '\n';
      return kExitModule;
    }
  }
  std::ostream& csv = out_file ? static_cast<std::ostream&>(file) : out;

  try {
    Engine& engine = default_engine();
    ArtifactCache cache(engine, cache_dir ? std::optional<std::filesystem::path>(*cache_dir)
                                          : std::optional<std::filesystem::path>(default_cache_dir()));
    const ModuleArtifact guest = bench::load_guest(engine, cache);
    if (probe) {
      bench::write_probe_csv(
          csv, bench::run_translation_probe(engine, guest, bench::probe_datatypes(), sizes, iters));
      return 0;
    }
    std::vector<bench::Row> rows;
    for (bench::Suite s : chosen) {
      bench::RunOptions opts;
      opts.ranks = np;
      opts.iters = iters;
      auto r = bench::run_bench(engine, guest, s, sizes, opts);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    bench::write_csv(csv, rows);
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "mpiwasm-bench: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "mpiwasm-bench: " << e.what() << '\n';
    return kExitModule;
  }
}

}  // namespace mpiwasm
