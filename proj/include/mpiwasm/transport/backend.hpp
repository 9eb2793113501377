#pragma once

// Message layer beneath the hostcalls. Arguments arrive already translated:
// buffers are host spans aliasing guest memory, MPI objects are host handles.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "mpiwasm/abi.hpp"
#include "mpiwasm/handle_table.hpp"

namespace mpiwasm::transport {

enum class BackendKind { native, sim };

/// Envelope of a completed receive.
struct RecvInfo {
  std::int32_t source = 0;
  std::int32_t tag = 0;
  std::uint32_t count_bytes = 0;
  bool truncated = false;
};

/// The backend could not carry out the operation.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The rank group was torn down (MPI_Abort, a trapped peer, or a detected
/// deadlock) while this rank was inside the transport.
class GroupAborted : public std::runtime_error {
 public:
  GroupAborted(std::int32_t code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  std::int32_t code() const noexcept { return code_; }

 private:
  std::int32_t code_;
};

using ConstBytes = std::span<const std::byte>;
using MutBytes = std::span<std::byte>;

class Backend {
 public:
  virtual ~Backend() = default;

  virtual BackendKind kind() const = 0;

  virtual void init() = 0;
  virtual void finalize() = 0;
  virtual std::int32_t world_rank() const = 0;
  virtual std::int32_t world_size() const = 0;

  virtual HostComm world_comm() = 0;
  virtual HostComm self_comm() = 0;
  virtual HostDatatype datatype(abi::Datatype type) = 0;
  virtual HostOp op(abi::Op op) = 0;

  virtual std::int32_t comm_rank(HostComm comm) = 0;
  virtual std::int32_t comm_size(HostComm comm) = 0;
  /// nullopt when this rank passed color MPI_UNDEFINED.
  virtual std::optional<HostComm> comm_split(HostComm comm, std::int32_t color,
                                             std::int32_t key) = 0;
  virtual HostComm comm_dup(HostComm comm) = 0;
  virtual void comm_free(HostComm comm) = 0;

  virtual void send(ConstBytes buf, std::int32_t count, HostDatatype type, std::int32_t dest,
                    std::int32_t tag, HostComm comm) = 0;
  virtual RecvInfo recv(MutBytes buf, std::int32_t count, HostDatatype type,
                        std::int32_t source, std::int32_t tag, HostComm comm) = 0;
  virtual HostRequest isend(ConstBytes buf, std::int32_t count, HostDatatype type,
                            std::int32_t dest, std::int32_t tag, HostComm comm) = 0;
  virtual HostRequest irecv(MutBytes buf, std::int32_t count, HostDatatype type,
                            std::int32_t source, std::int32_t tag, HostComm comm) = 0;
  /// Blocks until the request completes and releases it.
  virtual RecvInfo wait(HostRequest request) = 0;
  virtual RecvInfo sendrecv(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                            std::int32_t dest, std::int32_t send_tag, MutBytes recv_buf,
                            std::int32_t recv_count, HostDatatype recv_type,
                            std::int32_t source, std::int32_t recv_tag, HostComm comm) = 0;

  virtual void barrier(HostComm comm) = 0;
  virtual void bcast(MutBytes buf, std::int32_t count, HostDatatype type, std::int32_t root,
                     HostComm comm) = 0;
  virtual void reduce(ConstBytes send_buf, MutBytes recv_buf, std::int32_t count,
                      HostDatatype type, HostOp op, std::int32_t root, HostComm comm) = 0;
  virtual void allreduce(ConstBytes send_buf, MutBytes recv_buf, std::int32_t count,
                         HostDatatype type, HostOp op, HostComm comm) = 0;
  virtual void gather(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                      MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                      std::int32_t root, HostComm comm) = 0;
  virtual void allgather(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                         MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                         HostComm comm) = 0;
  virtual void scatter(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                       MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                       std::int32_t root, HostComm comm) = 0;
  virtual void alltoall(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                        MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                        HostComm comm) = 0;

  /// Tears down every rank. Native does not return; sim throws GroupAborted.
  [[noreturn]] virtual void abort(HostComm comm, std::int32_t code) = 0;

  /// Payload copies made inside the transport on behalf of this rank.
  virtual std::uint64_t payload_copies() const = 0;
};

}  // namespace mpiwasm::transport
