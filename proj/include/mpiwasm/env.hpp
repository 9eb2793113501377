#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <vector>

#include "mpiwasm/abi.hpp"
#include "mpiwasm/handle_table.hpp"
#include "mpiwasm/linear_memory.hpp"

namespace mpiwasm {

namespace transport {
class Backend;
}

struct Counters {
  std::atomic<std::uint64_t> translations{0};
  std::atomic<std::uint64_t> host_copies{0};
  std::atomic<std::uint64_t> hostcalls{0};
};

/// One timed datatype lookup taken on the send path.
struct TranslationSample {
  std::int32_t datatype = 0;
  std::uint32_t message_bytes = 0;
  std::uint32_t nanos = 0;
};

class TranslationRecorder {
 public:
  void record(TranslationSample sample) {
    std::lock_guard lock(mutex_);
    samples_.push_back(sample);
  }

  std::vector<TranslationSample> snapshot() const {
    std::lock_guard lock(mutex_);
    return samples_;
  }

  void clear() {
    std::lock_guard lock(mutex_);
    samples_.clear();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<TranslationSample> samples_;
};

/// Per-instance translation state: the memory view, one handle table per
/// MPI object kind, rank identity and instrumentation.
class Env {
 public:
  Env();

  /// Installs host handles for every predefined ABI code.
  void bind_predefined(transport::Backend& backend);

  LinearMemoryView memory;

  HandleTable<HostComm> comms;
  HandleTable<HostDatatype> datatypes;
  HandleTable<HostOp> ops;
  HandleTable<HostRequest> requests;

  std::int32_t rank = -1;
  std::int32_t world_size = 0;
  bool initialized = false;
  bool finalized = false;
  std::chrono::steady_clock::time_point wtime_epoch{};

  bool instrument = false;
  Counters counters;
  TranslationRecorder translation_samples;

  // Each lookup bumps `counters.translations`. Unknown codes throw AbiError
  // with the matching MPI error class.
  HostDatatype translate_datatype(std::int32_t code);
  HostComm translate_comm(std::int32_t code);
  HostOp translate_op(std::int32_t code);
  HostRequest translate_request(std::int32_t code);

  std::int32_t register_comm(HostComm comm);
  /// Removes a dynamic communicator code and returns its host handle.
  HostComm release_comm(std::int32_t code);

  /// Latency of the most recent `translate_datatype` when instrumenting.
  std::uint32_t last_translation_nanos() const noexcept { return last_translation_nanos_; }

 private:
  std::uint32_t last_translation_nanos_ = 0;
};

}  // namespace mpiwasm
