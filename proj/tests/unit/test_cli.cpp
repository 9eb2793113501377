#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "harness.hpp"
#include "mpiwasm/bench.hpp"
#include "mpiwasm/cli.hpp"

using namespace mpiwasm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const std::string& name) { return harness::fixture(name).string(); }

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(cli({fx("hello.wat")}).code == kExitUsage);  // sim without --np
  CHECK(cli({"--backend", "native", "--np", "2", fx("hello.wat")}).code == kExitUsage);
  CHECK(cli({"--np", "2"}).code == kExitUsage);
  CHECK(cli({"--np", "0", fx("hello.wat")}).code == kExitUsage);
  CHECK(cli({"--np", "2", "-d", fx("hello.wat"), fx("hello.wat")}).code == kExitUsage);
  CHECK(cli({"--bogus"}).code == kExitUsage);
}

TEST_CASE("module errors exit 1") {
  CHECK(cli({"--np", "1", "--no-cache", "/nonexistent.wasm"}).code == kExitModule);
  CHECK(cli({"--np", "1", "--no-cache", fx("shared_memory.wat")}).code == kExitModule);
  CHECK(cli({"--np", "1", "--no-cache", fx("no_start.wat")}).code == kExitModule);
  const auto junk = fs::temp_directory_path() / "mpiwasm-junk.wasm";
  { std::ofstream(junk) << std::string("\0asm\1\0\0\0\x05\xff", 10); }
  CHECK(cli({"--np", "1", "--no-cache", junk.string()}).code == kExitModule);
  fs::remove(junk);
}

TEST_CASE("guest exit code propagates") {
  CHECK(cli({"--np", "2", "--no-cache", fx("exit3.wat")}).code == 3);
  CHECK(cli({"--np", "1", "--no-cache", fx("oob_trap.wat")}).code == 134);
  CHECK(cli({"--np", "3", "--no-cache", fx("abort.wat")}).code == 7);
  CHECK(cli({"--np", "4", "--no-cache", fx("allreduce.wat")}).code == 0);
}

TEST_CASE("print-abi matches the golden manifest") {
  auto r = cli({"--print-abi"});
  CHECK(r.code == 0);
  CHECK(r.out == harness::read_text(fs::path(MPIWASM_SOURCE_DIR) / "abi" / "mpi_abi_v1.manifest"));
  auto h = cli({"--print-hostcalls"});
  CHECK(h.code == 0);
  CHECK(h.out.find("MPI_Allreduce") != std::string::npos);
}

TEST_CASE("cache directory from the environment") {
  const auto dir = fs::temp_directory_path() / ("mpiwasm-cli-cache-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const std::string cmd = "MPIWASM_CACHE_DIR=" + dir.string() + " " + MPIWASM_CLI + " --np 2 " +
                          fx("allreduce.wat") + " > /dev/null";
  CHECK(shell(cmd) == 0);
  int arts = 0;
  for (auto& e : fs::directory_iterator(dir)) arts += e.path().extension() == ".art";
  CHECK(arts == 1);
  CHECK(shell(cmd) == 0);
  fs::remove_all(dir);
}

TEST_CASE("the installed binaries run") {
  CHECK(shell(std::string(MPIWASM_CLI) + " --np 2 --no-cache " + fx("exit3.wat")) == 3);
  CHECK(shell(std::string(MPIWASM_CLI) + " 2>/dev/null") == 2);
  const auto csv = fs::temp_directory_path() / ("mpiwasm-bench-" + std::to_string(::getpid()) + ".csv");
  CHECK(shell(std::string(MPIWASM_BENCH_CLI) + " --suite pingpong --suite allreduce --np 2 --iters 3 " +
              "--sizes 1,64 --out " + csv.string()) == 0);
  const auto text = harness::read_text(csv);
  CHECK(text.rfind(std::string(bench::kCsvHeader), 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  fs::remove(csv);
}
