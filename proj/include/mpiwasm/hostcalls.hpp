#pragma once

// The `env`-namespace MPI functions a guest imports. Each one receives raw
// i32 arguments (guest addresses, counts, ABI codes), translates them through
// the Env and the linear-memory bridge, and defers to the transport backend.
//
// Hostcalls never throw for bad guest input: every failure becomes an ABI
// error code. Only GroupAborted and GuestTrap escape, because both mean the
// guest must stop running.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mpiwasm/env.hpp"
#include "mpiwasm/transport/backend.hpp"

namespace mpiwasm {

/// The guest trapped while the host was calling back into it.
class GuestTrap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GuestAllocErrorKind { export_missing, alloc_failed };

class GuestAllocError : public std::runtime_error {
 public:
  GuestAllocError(GuestAllocErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  GuestAllocErrorKind kind() const noexcept { return kind_; }

 private:
  GuestAllocErrorKind kind_;
};

/// Calls the module's exported `malloc`/`free`.
class GuestAllocator {
 public:
  virtual ~GuestAllocator() = default;

  virtual bool has_exports() const = 0;
  /// Raw guest result; may grow memory, so callers refresh their view after.
  virtual std::uint32_t call_malloc(std::uint32_t size) = 0;
  virtual void call_free(std::uint32_t addr) = 0;
  virtual LinearMemoryView current_memory() const = 0;
};

/// Allocates guest memory through the guest's own allocator so the result is
/// a guest address. A zero-size request returns whatever the guest returns.
GuestAddress guest_alloc(GuestAllocator& allocator, std::uint32_t size);
void guest_free(GuestAllocator& allocator, GuestAddress addr);

struct HostcallContext {
  Env& env;
  transport::Backend& backend;
  GuestAllocator* allocator = nullptr;
};

struct HostcallSignature {
  std::string_view name;
  std::uint32_t params;  // all i32
  bool returns_f64;      // otherwise a single i32
};

/// Every MPI function the embedder provides, by exact MPI name.
std::span<const HostcallSignature> shipped_hostcalls();

namespace hostcalls {

std::int32_t mpi_init(HostcallContext& ctx, std::uint32_t argc_addr, std::uint32_t argv_addr);
std::int32_t mpi_finalize(HostcallContext& ctx);
std::int32_t mpi_initialized(HostcallContext& ctx, std::uint32_t flag_addr);
std::int32_t mpi_finalized(HostcallContext& ctx, std::uint32_t flag_addr);
std::int32_t mpi_comm_rank(HostcallContext& ctx, std::int32_t comm, std::uint32_t rank_addr);
std::int32_t mpi_comm_size(HostcallContext& ctx, std::int32_t comm, std::uint32_t size_addr);
std::int32_t mpi_type_size(HostcallContext& ctx, std::int32_t datatype, std::uint32_t size_addr);

std::int32_t mpi_send(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                      std::int32_t datatype, std::int32_t dest, std::int32_t tag,
                      std::int32_t comm);
std::int32_t mpi_recv(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                      std::int32_t datatype, std::int32_t source, std::int32_t tag,
                      std::int32_t comm, std::uint32_t status_addr);
std::int32_t mpi_isend(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                       std::int32_t datatype, std::int32_t dest, std::int32_t tag,
                       std::int32_t comm, std::uint32_t request_addr);
std::int32_t mpi_irecv(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                       std::int32_t datatype, std::int32_t source, std::int32_t tag,
                       std::int32_t comm, std::uint32_t request_addr);
std::int32_t mpi_wait(HostcallContext& ctx, std::uint32_t request_addr, std::uint32_t status_addr);
std::int32_t mpi_waitall(HostcallContext& ctx, std::int32_t count, std::uint32_t requests_addr,
                         std::uint32_t statuses_addr);
std::int32_t mpi_sendrecv(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                          std::int32_t send_type, std::int32_t dest, std::int32_t send_tag,
                          std::uint32_t recv_buf, std::int32_t recv_count,
                          std::int32_t recv_type, std::int32_t source, std::int32_t recv_tag,
                          std::int32_t comm, std::uint32_t status_addr);

std::int32_t mpi_barrier(HostcallContext& ctx, std::int32_t comm);
std::int32_t mpi_bcast(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                       std::int32_t datatype, std::int32_t root, std::int32_t comm);
std::int32_t mpi_reduce(HostcallContext& ctx, std::uint32_t send_buf, std::uint32_t recv_buf,
                        std::int32_t count, std::int32_t datatype, std::int32_t op,
                        std::int32_t root, std::int32_t comm);
std::int32_t mpi_allreduce(HostcallContext& ctx, std::uint32_t send_buf, std::uint32_t recv_buf,
                           std::int32_t count, std::int32_t datatype, std::int32_t op,
                           std::int32_t comm);
std::int32_t mpi_gather(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                        std::int32_t send_type, std::uint32_t recv_buf, std::int32_t recv_count,
                        std::int32_t recv_type, std::int32_t root, std::int32_t comm);
std::int32_t mpi_allgather(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                           std::int32_t send_type, std::uint32_t recv_buf,
                           std::int32_t recv_count, std::int32_t recv_type, std::int32_t comm);
std::int32_t mpi_scatter(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                         std::int32_t send_type, std::uint32_t recv_buf, std::int32_t recv_count,
                         std::int32_t recv_type, std::int32_t root, std::int32_t comm);
std::int32_t mpi_alltoall(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                          std::int32_t send_type, std::uint32_t recv_buf, std::int32_t recv_count,
                          std::int32_t recv_type, std::int32_t comm);

std::int32_t mpi_alloc_mem(HostcallContext& ctx, std::int32_t size, std::int32_t info,
                           std::uint32_t baseptr_addr);
std::int32_t mpi_free_mem(HostcallContext& ctx, std::uint32_t base);

double mpi_wtime(HostcallContext& ctx);
double mpi_wtick(HostcallContext& ctx);
std::int32_t mpi_get_count(HostcallContext& ctx, std::uint32_t status_addr,
                           std::int32_t datatype, std::uint32_t count_addr);
/// Does not return normally: throws transport::GroupAborted (sim) or ends
/// the process (native).
std::int32_t mpi_abort(HostcallContext& ctx, std::int32_t comm, std::int32_t errorcode);

std::int32_t mpi_comm_split(HostcallContext& ctx, std::int32_t comm, std::int32_t color,
                            std::int32_t key, std::uint32_t newcomm_addr);
std::int32_t mpi_comm_dup(HostcallContext& ctx, std::int32_t comm, std::uint32_t newcomm_addr);
std::int32_t mpi_comm_free(HostcallContext& ctx, std::uint32_t comm_addr);

/// Writes a StatusWire unless `addr` is the status-ignore sentinel.
void write_status(const Env& env, std::uint32_t addr, const abi::StatusWire& status);

}  // namespace hostcalls
}  // namespace mpiwasm
