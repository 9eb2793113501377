#include "mpiwasm/abi.hpp"

#include <array>
#include <sstream>
#include <utility>

namespace mpiwasm::abi {
namespace {

constexpr std::array<std::string_view, kDatatypeCount> kDatatypeNames = {
    "MPI_BYTE",     "MPI_CHAR", "MPI_INT",           "MPI_FLOAT",        "MPI_DOUBLE",
    "MPI_LONG",     "MPI_UNSIGNED", "MPI_LONG_LONG", "MPI_UNSIGNED_LONG",
};

constexpr std::array<std::string_view, kOpCount> kOpNames = {
    "MPI_SUM", "MPI_MAX", "MPI_MIN", "MPI_PROD", "MPI_LAND", "MPI_LOR", "MPI_BAND", "MPI_BOR",
};

}  // namespace

std::string_view datatype_name(std::int32_t code) {
  if (!is_predefined_datatype(code)) return "MPI_DATATYPE_NULL";
  return kDatatypeNames[static_cast<std::size_t>(code)];
}

std::string_view op_name(std::int32_t code) {
  if (!is_predefined_op(code)) return "MPI_OP_NULL";
  return kOpNames[static_cast<std::size_t>(code)];
}

std::string abi_manifest() {
  std::ostringstream out;
  auto line = [&out](std::string_view key, std::int64_t value) {
    out << key << '=' << value << '\n';
  };
  line("MPI_ABI_VERSION", kAbiVersion);

  line("MPI_SUCCESS", kSuccess);
  line("MPI_ERR_TYPE", kErrType);
  line("MPI_ERR_COMM", kErrComm);
  line("MPI_ERR_OP", kErrOp);
  line("MPI_ERR_ARG", kErrArg);
  line("MPI_ERR_OTHER", kErrOther);

  line("MPI_COMM_WORLD", kCommWorld);
  line("MPI_COMM_SELF", kCommSelf);
  line("MPI_COMM_NULL", kCommNull);

  for (std::int32_t code = 0; code < kDatatypeCount; ++code) line(datatype_name(code), code);
  line("MPI_DATATYPE_NULL", kDatatypeNull);

  for (std::int32_t code = 0; code < kOpCount; ++code) line(op_name(code), code);
  line("MPI_OP_NULL", kOpNull);

  line("MPI_ANY_SOURCE", kAnySource);
  line("MPI_ANY_TAG", kAnyTag);
  line("MPI_STATUS_IGNORE", kStatusIgnore);
  line("MPI_UNDEFINED", kUndefined);
  line("MPI_STATUS_SIZE", kStatusSize);
  return out.str();
}

}  // namespace mpiwasm::abi
