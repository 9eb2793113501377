#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mpiwasm/abi.hpp"
#include "mpiwasm/env.hpp"
#include "mpiwasm/hostcalls.hpp"
#include "mpiwasm/transport/sim.hpp"

using namespace mpiwasm;

namespace {

std::map<std::string, long> parse_manifest(const std::string& text) {
  std::map<std::string, long> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    REQUIRE(eq != std::string::npos);
    out[line.substr(0, eq)] = std::stol(line.substr(eq + 1));
  }
  return out;
}

}  // namespace

TEST_CASE("manifest matches the checked-in golden file byte for byte") {
  std::ifstream f(std::string(MPIWASM_SOURCE_DIR) + "/abi/mpi_abi_v1.manifest");
  REQUIRE(f);
  std::stringstream golden;
  golden << f.rdbuf();
  CHECK(abi::abi_manifest() == golden.str());
  CHECK(abi::abi_manifest() == abi::abi_manifest());
}

TEST_CASE("frozen constant values") {
  auto m = parse_manifest(abi::abi_manifest());
  CHECK(m.at("MPI_COMM_WORLD") == 0);
  CHECK(m.at("MPI_COMM_SELF") == 1);
  CHECK(m.at("MPI_COMM_NULL") == -1);
  CHECK(m.at("MPI_BYTE") == 0);
  CHECK(m.at("MPI_CHAR") == 1);
  CHECK(m.at("MPI_INT") == 2);
  CHECK(m.at("MPI_FLOAT") == 3);
  CHECK(m.at("MPI_DOUBLE") == 4);
  CHECK(m.at("MPI_LONG") == 5);
  CHECK(m.at("MPI_UNSIGNED") == 6);
  CHECK(m.at("MPI_LONG_LONG") == 7);
  CHECK(m.at("MPI_UNSIGNED_LONG") == 8);
  CHECK(m.at("MPI_DATATYPE_NULL") == -1);
  CHECK(m.at("MPI_SUM") == 0);
  CHECK(m.at("MPI_MAX") == 1);
  CHECK(m.at("MPI_MIN") == 2);
  CHECK(m.at("MPI_PROD") == 3);
  CHECK(m.at("MPI_LAND") == 4);
  CHECK(m.at("MPI_LOR") == 5);
  CHECK(m.at("MPI_BAND") == 6);
  CHECK(m.at("MPI_BOR") == 7);
  CHECK(m.at("MPI_OP_NULL") == -1);
  CHECK(m.at("MPI_ANY_SOURCE") == -1);
  CHECK(m.at("MPI_ANY_TAG") == -1);
  CHECK(m.at("MPI_STATUS_IGNORE") == 0);
  CHECK(m.at("MPI_SUCCESS") == 0);
  CHECK(m.at("MPI_ERR_TYPE") == 3);
  CHECK(m.at("MPI_ERR_COMM") == 5);
  CHECK(m.at("MPI_ERR_OP") == 9);
  CHECK(m.at("MPI_ERR_ARG") == 12);
  CHECK(m.at("MPI_ERR_OTHER") == 15);
  CHECK(m.at("MPI_STATUS_SIZE") == 16);
}

TEST_CASE("datatype widths; LONG is 8 bytes") {
  CHECK(abi::datatype_size(0) == 1u);
  CHECK(abi::datatype_size(1) == 1u);
  CHECK(abi::datatype_size(2) == 4u);
  CHECK(abi::datatype_size(3) == 4u);
  CHECK(abi::datatype_size(4) == 8u);
  CHECK(abi::datatype_size(5) == 8u);
  CHECK(abi::datatype_size(6) == 4u);
  CHECK(abi::datatype_size(7) == 8u);
  CHECK(abi::datatype_size(8) == 8u);
  CHECK_FALSE(abi::datatype_size(-1).has_value());
  CHECK_FALSE(abi::datatype_size(9).has_value());
}

TEST_CASE("status wire layout") {
  abi::StatusWire s{1, 2, 3, 4};
  std::int32_t raw[4];
  std::memcpy(raw, &s, 16);
  CHECK(raw[0] == 1);
  CHECK(raw[1] == 2);
  CHECK(raw[2] == 3);
  CHECK(raw[3] == 4);
}

TEST_CASE("env translation of predefined and unknown codes") {
  auto group = std::make_shared<transport::RankGroup>(1);
  transport::SimBackend backend(group, 0);
  backend.init();
  Env env;
  env.bind_predefined(backend);

  CHECK(env.translate_comm(abi::kCommWorld) == backend.world_comm());
  CHECK(env.translate_comm(abi::kCommSelf) == backend.self_comm());
  for (std::int32_t d = 0; d < abi::kDatatypeCount; ++d) {
    CHECK(env.translate_datatype(d) == backend.datatype(static_cast<abi::Datatype>(d)));
  }
  for (std::int32_t o = 0; o < abi::kOpCount; ++o) {
    CHECK(env.translate_op(o) == backend.op(static_cast<abi::Op>(o)));
  }

  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const abi::AbiError& e) {
      return e.code();
    }
    return 0;
  };
  CHECK(code_of([&] { env.translate_comm(77); }) == abi::kErrComm);
  CHECK(code_of([&] { env.translate_comm(abi::kCommNull); }) == abi::kErrComm);
  CHECK(code_of([&] { env.translate_datatype(abi::kDatatypeNull); }) == abi::kErrType);
  CHECK(code_of([&] { env.translate_datatype(12); }) == abi::kErrType);
  CHECK(code_of([&] { env.translate_op(abi::kOpNull); }) == abi::kErrOp);
  CHECK(code_of([&] { env.translate_request(5); }) == abi::kErrOther);
  CHECK(code_of([&] { env.release_comm(abi::kCommWorld); }) == abi::kErrComm);
  CHECK(env.counters.translations.load() > 0);
}

TEST_CASE("instrumented datatype lookups record their latency") {
  auto group = std::make_shared<transport::RankGroup>(1);
  transport::SimBackend backend(group, 0);
  backend.init();
  Env env;
  env.bind_predefined(backend);
  env.instrument = true;
  for (int i = 0; i < 1000; ++i) env.translate_datatype(i % abi::kDatatypeCount);
  CHECK(env.last_translation_nanos() < 1'000'000u);
}

TEST_CASE("shipped hostcall surface: unique MPI names, all-i32 parameters") {
  std::set<std::string_view> names;
  for (const auto& h : shipped_hostcalls()) {
    CHECK(h.name.substr(0, 4) == "MPI_");
    CHECK(names.insert(h.name).second);
    CHECK(h.params <= 12u);
    CHECK(h.returns_f64 == (h.name == "MPI_Wtime" || h.name == "MPI_Wtick"));
  }
  for (auto required : {"MPI_Init", "MPI_Finalize", "MPI_Comm_rank", "MPI_Comm_size", "MPI_Send",
                        "MPI_Recv", "MPI_Bcast", "MPI_Reduce", "MPI_Allreduce", "MPI_Alltoall",
                        "MPI_Alloc_mem", "MPI_Free_mem", "MPI_Wtime", "MPI_Abort"}) {
    CHECK(names.count(required) == 1);
  }
}
