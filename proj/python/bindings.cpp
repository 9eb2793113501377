#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mpiwasm/abi.hpp"
#include "mpiwasm/artifact_cache.hpp"
#include "mpiwasm/bench.hpp"
#include "mpiwasm/cli.hpp"
#include "mpiwasm/engine.hpp"
#include "mpiwasm/fs_sandbox.hpp"
#include "mpiwasm/hostcalls.hpp"
#include "mpiwasm/sim_group.hpp"

namespace py = pybind11;
using namespace mpiwasm;

namespace {

std::vector<std::uint8_t> module_bytes(const py::object& module) {
  if (py::isinstance<py::bytes>(module)) {
    const std::string s = module.cast<std::string>();
    std::vector<std::uint8_t> b(s.begin(), s.end());
    if (b.size() < 4 || b[0] != 0 || b[1] != 'a' || b[2] != 's' || b[3] != 'm') return wat_to_wasm(s);
    return b;
  }
  if (py::isinstance<py::str>(module) && module.cast<std::string>().find("(module") != std::string::npos) {
    return wat_to_wasm(module.cast<std::string>());
  }
  const std::string path = py::str(module);
  auto b = read_file_bytes(path);
  if (b.size() < 4 || b[0] != 0 || b[1] != 'a' || b[2] != 's' || b[3] != 'm') {
    return wat_to_wasm(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
  }
  return b;
}

py::dict run_sim(const py::object& module, int np, const std::vector<std::string>& dirs,
                 const std::vector<std::string>& args, std::optional<std::filesystem::path> cache_dir,
                 bool instrument) {
  if (np < 1) throw py::value_error("np must be at least 1");
  const auto wasm = module_bytes(module);
  Engine& engine = default_engine();
  InstanceConfig cfg;
  cfg.argv = {"guest"};
  cfg.argv.insert(cfg.argv.end(), args.begin(), args.end());
  for (const auto& d : dirs) cfg.preopens.push_back(parse_dir_flag(d));
  cfg.instrument = instrument;

  GroupResult result;
  bool from_cache = false;
  {
    py::gil_scoped_release release;
    ArtifactCache cache(engine, cache_dir);
    const auto artifact = cache.compile_or_fetch(load_module(engine, wasm));
    from_cache = artifact.from_cache;
    result = spawn_sim_group(np, engine, artifact, cfg);
  }
  py::list ranks;
  for (const auto& r : result.ranks) {
    ranks.append(py::dict(py::arg("exit_code") = r.exit_code, py::arg("outcome") = outcome_name(r.outcome),
                          py::arg("diagnostic") = r.diagnostic));
  }
  return py::dict(py::arg("exit_code") = result.exit_code(), py::arg("aborted") = result.aborted,
                  py::arg("abort_code") = result.abort_code, py::arg("abort_reason") = result.abort_reason,
                  py::arg("from_cache") = from_cache, py::arg("ranks") = ranks);
}

py::list bench_rows(const std::string& suite, int np, int iters, const std::vector<std::uint64_t>& sizes) {
  const auto s = bench::parse_suite(suite);
  if (!s) throw py::value_error("unknown suite " + suite);
  std::vector<bench::Row> rows;
  {
    py::gil_scoped_release release;
    ArtifactCache cache(default_engine(), std::nullopt);
    const auto guest = bench::load_guest(default_engine(), cache);
    rows = bench::run_bench(default_engine(), guest, *s, sizes, {np, iters, nullptr});
  }
  py::list out;
  for (const auto& r : rows) {
    out.append(py::dict(py::arg("suite") = r.suite, py::arg("msg_bytes") = r.msg_bytes,
                        py::arg("ranks") = r.ranks, py::arg("iter") = r.iter,
                        py::arg("usec_avg") = r.usec_avg, py::arg("usec_min") = r.usec_min,
                        py::arg("usec_max") = r.usec_max));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_mpiwasm, m) {
  m.doc() = "Run MPI WebAssembly modules on the in-process simulated transport.";

  py::register_exception<MalformedModule>(m, "MalformedModule", PyExc_ValueError);
  py::register_exception<UnsupportedFeature>(m, "UnsupportedFeature", PyExc_ValueError);
  py::register_exception<MissingExport>(m, "MissingExport", PyExc_RuntimeError);
  py::register_exception<NotADirectory>(m, "NotADirectory", PyExc_ValueError);

  m.def("abi_manifest", &mpiwasm::abi::abi_manifest, "The frozen guest ABI as text.");
  m.def("shipped_hostcalls", [] {
    std::vector<std::tuple<std::string, std::uint32_t, bool>> out;
    for (const auto& h : shipped_hostcalls()) out.emplace_back(std::string(h.name), h.params, h.returns_f64);
    return out;
  });
  m.def("wat_to_wasm", [](const std::string& wat) {
    const auto b = wat_to_wasm(wat);
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
  });
  m.def("scan_module", [](const py::bytes& wasm) {
    const std::string s = wasm;
    const auto summary = scan_module({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
    py::list imports, exports;
    for (const auto& i : summary.imports) imports.append(py::make_tuple(i.module, i.name, extern_kind_name(i.kind)));
    for (const auto& e : summary.exports) exports.append(py::make_tuple(e.name, extern_kind_name(e.kind)));
    return py::dict(py::arg("imports") = imports, py::arg("exports") = exports);
  });
  m.def("run", &run_sim, py::arg("module"), py::arg("np"), py::arg("dirs") = std::vector<std::string>{},
        py::arg("args") = std::vector<std::string>{}, py::arg("cache_dir") = py::none(),
        py::arg("instrument") = false,
        "Runs a module (path, WAT text or bytes) on `np` simulated ranks.");
  m.def("bench", &bench_rows, py::arg("suite"), py::arg("np") = 2, py::arg("iters") = 100,
        py::arg("sizes") = bench::default_sizes());
  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Same as the mpiwasm executable; returns (exit_code, stdout, stderr).");
  m.attr("ERR_ARG") = mpiwasm::abi::kErrArg;
  m.attr("ERR_OTHER") = mpiwasm::abi::kErrOther;
}
