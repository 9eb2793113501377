#include "mpiwasm/env.hpp"

#include <string>

#include "mpiwasm/transport/backend.hpp"

namespace mpiwasm {

Env::Env() : comms(2), datatypes(abi::kDatatypeCount), ops(abi::kOpCount), requests(1) {}

void Env::bind_predefined(transport::Backend& backend) {
  comms.add_predefined(abi::kCommWorld, backend.world_comm());
  comms.add_predefined(abi::kCommSelf, backend.self_comm());
  for (std::int32_t code = 0; code < abi::kDatatypeCount; ++code) {
    datatypes.add_predefined(code, backend.datatype(static_cast<abi::Datatype>(code)));
  }
  for (std::int32_t code = 0; code < abi::kOpCount; ++code) {
    ops.add_predefined(code, backend.op(static_cast<abi::Op>(code)));
  }
}

HostDatatype Env::translate_datatype(std::int32_t code) {
  counters.translations.fetch_add(1, std::memory_order_relaxed);
  if (!instrument) {
    if (auto handle = datatypes.find(code)) return *handle;
    throw abi::AbiError(abi::kErrType, "unknown datatype code " + std::to_string(code));
  }
  const auto start = std::chrono::steady_clock::now();
  auto handle = datatypes.find(code);
  const auto stop = std::chrono::steady_clock::now();
  last_translation_nanos_ = static_cast<std::uint32_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count());
  if (!handle) throw abi::AbiError(abi::kErrType, "unknown datatype code " + std::to_string(code));
  return *handle;
}

HostComm Env::translate_comm(std::int32_t code) {
  counters.translations.fetch_add(1, std::memory_order_relaxed);
  if (auto handle = comms.find(code)) return *handle;
  throw abi::AbiError(abi::kErrComm, "unknown communicator code " + std::to_string(code));
}

HostOp Env::translate_op(std::int32_t code) {
  counters.translations.fetch_add(1, std::memory_order_relaxed);
  if (auto handle = ops.find(code)) return *handle;
  throw abi::AbiError(abi::kErrOp, "unknown reduction op code " + std::to_string(code));
}

HostRequest Env::translate_request(std::int32_t code) {
  counters.translations.fetch_add(1, std::memory_order_relaxed);
  if (auto handle = requests.find(code)) return *handle;
  throw abi::AbiError(abi::kErrOther, "unknown or completed request code " + std::to_string(code));
}

std::int32_t Env::register_comm(HostComm comm) {
  if (auto code = comms.add(comm)) return *code;
  throw abi::AbiError(abi::kErrOther, "communicator code space exhausted");
}

HostComm Env::release_comm(std::int32_t code) {
  if (comms.is_predefined(code)) {
    throw abi::AbiError(abi::kErrComm, "predefined communicator cannot be released");
  }
  if (auto handle = comms.remove(code)) return *handle;
  throw abi::AbiError(abi::kErrComm, "unknown communicator code " + std::to_string(code));
}

}  // namespace mpiwasm
