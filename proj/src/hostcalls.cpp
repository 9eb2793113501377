#include "mpiwasm/hostcalls.hpp"

#include <array>
#include <chrono>
#include <limits>
#include <unordered_set>
#include <vector>

#include <spdlog/spdlog.h>

#include "mpiwasm/transport/reduce.hpp"

namespace mpiwasm {

using abi::AbiError;
using transport::RecvInfo;

namespace {

constexpr std::array<HostcallSignature, 30> kShipped = {{
    {"MPI_Init", 2, false},       {"MPI_Finalize", 0, false},  {"MPI_Initialized", 1, false},
    {"MPI_Finalized", 1, false},  {"MPI_Comm_rank", 2, false}, {"MPI_Comm_size", 2, false},
    {"MPI_Type_size", 2, false},  {"MPI_Send", 6, false},      {"MPI_Recv", 7, false},
    {"MPI_Isend", 7, false},      {"MPI_Irecv", 7, false},     {"MPI_Wait", 2, false},
    {"MPI_Waitall", 3, false},    {"MPI_Sendrecv", 12, false}, {"MPI_Barrier", 1, false},
    {"MPI_Bcast", 5, false},      {"MPI_Reduce", 7, false},    {"MPI_Allreduce", 6, false},
    {"MPI_Gather", 8, false},     {"MPI_Allgather", 7, false}, {"MPI_Scatter", 8, false},
    {"MPI_Alltoall", 7, false},   {"MPI_Alloc_mem", 3, false}, {"MPI_Free_mem", 1, false},
    {"MPI_Wtime", 0, true},       {"MPI_Wtick", 0, true},      {"MPI_Get_count", 3, false},
    {"MPI_Abort", 2, false},      {"MPI_Comm_split", 4, false}, {"MPI_Comm_dup", 2, false},
}};

// MPI_Comm_free is listed separately so the array above stays a neat grid.
constexpr HostcallSignature kCommFree = {"MPI_Comm_free", 1, false};

template <class Body>
std::int32_t guarded(HostcallContext& ctx, const char* name, Body&& body) {
  ctx.env.counters.hostcalls.fetch_add(1, std::memory_order_relaxed);
  try {
    return body();
  } catch (const AbiError& e) {
    spdlog::debug("{} (rank {}): {}", name, ctx.env.rank, e.what());
    return e.code();
  } catch (const MemoryFault& e) {
    spdlog::debug("{} (rank {}): {}", name, ctx.env.rank, e.what());
    return abi::kErrArg;
  } catch (const GuestAllocError& e) {
    spdlog::warn("{} (rank {}): {}", name, ctx.env.rank, e.what());
    return abi::kErrOther;
  } catch (const transport::GroupAborted&) {
    throw;
  } catch (const GuestTrap&) {
    throw;
  } catch (const transport::BackendError& e) {
    spdlog::warn("{} (rank {}): backend failure: {}", name, ctx.env.rank, e.what());
    return abi::kErrOther;
  } catch (const std::exception& e) {
    spdlog::error("{} (rank {}): {}", name, ctx.env.rank, e.what());
    return abi::kErrOther;
  }
}

void require_active(const Env& env) {
  if (!env.initialized) throw AbiError(abi::kErrOther, "MPI is not initialized");
  if (env.finalized) throw AbiError(abi::kErrOther, "MPI is already finalized");
}

void require_count(std::int32_t count) {
  if (count < 0) throw AbiError(abi::kErrArg, "negative count");
}

std::uint32_t width(std::int32_t datatype) {
  auto size = abi::datatype_size(datatype);
  if (!size) throw AbiError(abi::kErrType, "datatype has no size");
  return *size;
}

/// Span for `count` elements of `datatype` times `blocks` at a guest address.
HostSpan buffer(const Env& env, std::uint32_t addr, std::int32_t count, std::int32_t datatype,
                std::uint64_t blocks = 1) {
  require_count(count);
  const std::uint64_t len = static_cast<std::uint64_t>(count) * width(datatype) * blocks;
  return to_host(env.memory, GuestAddress{addr}, len);
}

void check_out(const Env& env, std::uint32_t addr, std::uint64_t len) {
  (void)to_host(env.memory, GuestAddress{addr}, len);
}

void check_status_addr(const Env& env, std::uint32_t addr) {
  if (addr != abi::kStatusIgnore) check_out(env, addr, abi::kStatusSize);
}

void check_peer(std::int32_t peer, std::int32_t size, bool allow_any) {
  if (allow_any && peer == abi::kAnySource) return;
  if (peer < 0 || peer >= size) throw AbiError(abi::kErrArg, "rank outside communicator");
}

void check_tag(std::int32_t tag, bool allow_any) {
  if (allow_any && tag == abi::kAnyTag) return;
  if (tag < 0) throw AbiError(abi::kErrArg, "negative tag");
}

void check_op(std::int32_t op, std::int32_t datatype) {
  if (!abi::is_predefined_op(op) || !abi::is_predefined_datatype(datatype) ||
      !transport::op_supports(static_cast<abi::Op>(op), static_cast<abi::Datatype>(datatype))) {
    throw AbiError(abi::kErrOp, "reduction op not defined for datatype");
  }
}

void write_i32(const Env& env, std::uint32_t addr, std::int32_t value) {
  write_scalar<std::int32_t>(env.memory, GuestAddress{addr}, value);
}

std::int32_t finish_receive(const Env& env, std::uint32_t status_addr, const RecvInfo& info) {
  const std::int32_t error = info.truncated ? abi::kErrOther : abi::kSuccess;
  hostcalls::write_status(
      env, status_addr,
      abi::StatusWire{info.source, info.tag, error, static_cast<std::int32_t>(info.count_bytes)});
  return error;
}

}  // namespace

std::span<const HostcallSignature> shipped_hostcalls() {
  static const std::vector<HostcallSignature> all = [] {
    std::vector<HostcallSignature> v(kShipped.begin(), kShipped.end());
    v.push_back(kCommFree);
    return v;
  }();
  return all;
}

GuestAddress guest_alloc(GuestAllocator& allocator, std::uint32_t size) {
  if (!allocator.has_exports()) {
    throw GuestAllocError(GuestAllocErrorKind::export_missing,
                          "module does not export malloc and free");
  }
  const std::uint32_t addr = allocator.call_malloc(size);
  if (size == 0) return GuestAddress{addr};
  if (addr == 0) {
    throw GuestAllocError(GuestAllocErrorKind::alloc_failed, "guest malloc returned null");
  }
  if (!in_bounds(allocator.current_memory(), addr, size)) {
    throw GuestAllocError(GuestAllocErrorKind::alloc_failed,
                          "guest malloc returned a region outside linear memory");
  }
  return GuestAddress{addr};
}

void guest_free(GuestAllocator& allocator, GuestAddress addr) {
  if (!allocator.has_exports()) {
    throw GuestAllocError(GuestAllocErrorKind::export_missing,
                          "module does not export malloc and free");
  }
  allocator.call_free(addr.offset);
}

namespace hostcalls {

void write_status(const Env& env, std::uint32_t addr, const abi::StatusWire& status) {
  if (addr == abi::kStatusIgnore) return;
  auto span = to_host(env.memory, GuestAddress{addr}, abi::kStatusSize);
  std::memcpy(span.start, &status, abi::kStatusSize);
}

std::int32_t mpi_init(HostcallContext& ctx, std::uint32_t, std::uint32_t) {
  return guarded(ctx, "MPI_Init", [&] {
    Env& env = ctx.env;
    if (env.initialized) throw AbiError(abi::kErrOther, "MPI_Init called twice");
    ctx.backend.init();
    env.bind_predefined(ctx.backend);
    env.rank = ctx.backend.world_rank();
    env.world_size = ctx.backend.world_size();
    env.wtime_epoch = std::chrono::steady_clock::now();
    env.initialized = true;
    return abi::kSuccess;
  });
}

std::int32_t mpi_finalize(HostcallContext& ctx) {
  return guarded(ctx, "MPI_Finalize", [&] {
    require_active(ctx.env);
    ctx.backend.finalize();
    ctx.env.finalized = true;
    return abi::kSuccess;
  });
}

std::int32_t mpi_initialized(HostcallContext& ctx, std::uint32_t flag_addr) {
  return guarded(ctx, "MPI_Initialized", [&] {
    write_i32(ctx.env, flag_addr, ctx.env.initialized ? 1 : 0);
    return abi::kSuccess;
  });
}

std::int32_t mpi_finalized(HostcallContext& ctx, std::uint32_t flag_addr) {
  return guarded(ctx, "MPI_Finalized", [&] {
    write_i32(ctx.env, flag_addr, ctx.env.finalized ? 1 : 0);
    return abi::kSuccess;
  });
}

std::int32_t mpi_comm_rank(HostcallContext& ctx, std::int32_t comm, std::uint32_t rank_addr) {
  return guarded(ctx, "MPI_Comm_rank", [&] {
    require_active(ctx.env);
    const HostComm c = ctx.env.translate_comm(comm);
    check_out(ctx.env, rank_addr, 4);
    write_i32(ctx.env, rank_addr, ctx.backend.comm_rank(c));
    return abi::kSuccess;
  });
}

std::int32_t mpi_comm_size(HostcallContext& ctx, std::int32_t comm, std::uint32_t size_addr) {
  return guarded(ctx, "MPI_Comm_size", [&] {
    require_active(ctx.env);
    const HostComm c = ctx.env.translate_comm(comm);
    check_out(ctx.env, size_addr, 4);
    write_i32(ctx.env, size_addr, ctx.backend.comm_size(c));
    return abi::kSuccess;
  });
}

std::int32_t mpi_type_size(HostcallContext& ctx, std::int32_t datatype, std::uint32_t size_addr) {
  return guarded(ctx, "MPI_Type_size", [&] {
    ctx.env.translate_datatype(datatype);
    write_i32(ctx.env, size_addr, static_cast<std::int32_t>(width(datatype)));
    return abi::kSuccess;
  });
}

std::int32_t mpi_send(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                      std::int32_t datatype, std::int32_t dest, std::int32_t tag,
                      std::int32_t comm) {
  return guarded(ctx, "MPI_Send", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype type = env.translate_datatype(datatype);
    const std::uint32_t translation_ns = env.last_translation_nanos();
    const HostComm c = env.translate_comm(comm);
    const HostSpan data = buffer(env, buf, count, datatype);
    check_peer(dest, ctx.backend.comm_size(c), false);
    check_tag(tag, false);
    if (env.instrument) {
      env.translation_samples.record(
          {datatype, static_cast<std::uint32_t>(data.length), translation_ns});
    }
    ctx.backend.send(data.bytes(), count, type, dest, tag, c);
    return abi::kSuccess;
  });
}

std::int32_t mpi_recv(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                      std::int32_t datatype, std::int32_t source, std::int32_t tag,
                      std::int32_t comm, std::uint32_t status_addr) {
  return guarded(ctx, "MPI_Recv", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype type = env.translate_datatype(datatype);
    const HostComm c = env.translate_comm(comm);
    const HostSpan data = buffer(env, buf, count, datatype);
    check_peer(source, ctx.backend.comm_size(c), true);
    check_tag(tag, true);
    check_status_addr(env, status_addr);
    const RecvInfo info = ctx.backend.recv(data.bytes(), count, type, source, tag, c);
    return finish_receive(env, status_addr, info);
  });
}

std::int32_t mpi_isend(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                       std::int32_t datatype, std::int32_t dest, std::int32_t tag,
                       std::int32_t comm, std::uint32_t request_addr) {
  return guarded(ctx, "MPI_Isend", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype type = env.translate_datatype(datatype);
    const HostComm c = env.translate_comm(comm);
    const HostSpan data = buffer(env, buf, count, datatype);
    check_peer(dest, ctx.backend.comm_size(c), false);
    check_tag(tag, false);
    check_out(env, request_addr, 4);
    const HostRequest request = ctx.backend.isend(data.bytes(), count, type, dest, tag, c);
    auto code = env.requests.add(request);
    if (!code) throw AbiError(abi::kErrOther, "request code space exhausted");
    write_i32(env, request_addr, *code);
    return abi::kSuccess;
  });
}

std::int32_t mpi_irecv(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                       std::int32_t datatype, std::int32_t source, std::int32_t tag,
                       std::int32_t comm, std::uint32_t request_addr) {
  return guarded(ctx, "MPI_Irecv", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype type = env.translate_datatype(datatype);
    const HostComm c = env.translate_comm(comm);
    const HostSpan data = buffer(env, buf, count, datatype);
    check_peer(source, ctx.backend.comm_size(c), true);
    check_tag(tag, true);
    check_out(env, request_addr, 4);
    const HostRequest request = ctx.backend.irecv(data.bytes(), count, type, source, tag, c);
    auto code = env.requests.add(request);
    if (!code) throw AbiError(abi::kErrOther, "request code space exhausted");
    write_i32(env, request_addr, *code);
    return abi::kSuccess;
  });
}

std::int32_t mpi_wait(HostcallContext& ctx, std::uint32_t request_addr,
                      std::uint32_t status_addr) {
  return guarded(ctx, "MPI_Wait", [&] {
    Env& env = ctx.env;
    require_active(env);
    const auto code = read_scalar<std::int32_t>(env.memory, GuestAddress{request_addr});
    const HostRequest request = env.translate_request(code);
    check_status_addr(env, status_addr);
    env.requests.remove(code);
    const RecvInfo info = ctx.backend.wait(request);
    return finish_receive(env, status_addr, info);
  });
}

std::int32_t mpi_waitall(HostcallContext& ctx, std::int32_t count, std::uint32_t requests_addr,
                         std::uint32_t statuses_addr) {
  return guarded(ctx, "MPI_Waitall", [&] {
    Env& env = ctx.env;
    require_active(env);
    require_count(count);
    if (count == 0) return abi::kSuccess;
    const auto n = static_cast<std::uint64_t>(count);
    const HostSpan codes_span = to_host(env.memory, GuestAddress{requests_addr}, n * 4);
    if (statuses_addr != abi::kStatusIgnore) check_out(env, statuses_addr, n * abi::kStatusSize);

    std::vector<std::int32_t> codes(static_cast<std::size_t>(count));
    std::memcpy(codes.data(), codes_span.start, codes_span.length);
    std::vector<HostRequest> requests;
    requests.reserve(codes.size());
    std::unordered_set<std::int32_t> seen;
    for (std::int32_t code : codes) {
      if (!seen.insert(code).second) throw AbiError(abi::kErrOther, "duplicate request code");
      requests.push_back(env.translate_request(code));
    }

    std::int32_t result = abi::kSuccess;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      env.requests.remove(codes[i]);
      const RecvInfo info = ctx.backend.wait(requests[i]);
      const std::uint32_t slot =
          statuses_addr == abi::kStatusIgnore
              ? abi::kStatusIgnore
              : statuses_addr + static_cast<std::uint32_t>(i) * abi::kStatusSize;
      if (finish_receive(env, slot, info) != abi::kSuccess) result = abi::kErrOther;
    }
    return result;
  });
}

std::int32_t mpi_sendrecv(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                          std::int32_t send_type, std::int32_t dest, std::int32_t send_tag,
                          std::uint32_t recv_buf, std::int32_t recv_count,
                          std::int32_t recv_type, std::int32_t source, std::int32_t recv_tag,
                          std::int32_t comm, std::uint32_t status_addr) {
  return guarded(ctx, "MPI_Sendrecv", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype stype = env.translate_datatype(send_type);
    const HostDatatype rtype = env.translate_datatype(recv_type);
    const HostComm c = env.translate_comm(comm);
    const HostSpan out = buffer(env, send_buf, send_count, send_type);
    const HostSpan in = buffer(env, recv_buf, recv_count, recv_type);
    const std::int32_t size = ctx.backend.comm_size(c);
    check_peer(dest, size, false);
    check_peer(source, size, true);
    check_tag(send_tag, false);
    check_tag(recv_tag, true);
    check_status_addr(env, status_addr);
    const RecvInfo info = ctx.backend.sendrecv(out.bytes(), send_count, stype, dest, send_tag,
                                               in.bytes(), recv_count, rtype, source, recv_tag, c);
    return finish_receive(env, status_addr, info);
  });
}

std::int32_t mpi_barrier(HostcallContext& ctx, std::int32_t comm) {
  return guarded(ctx, "MPI_Barrier", [&] {
    require_active(ctx.env);
    ctx.backend.barrier(ctx.env.translate_comm(comm));
    return abi::kSuccess;
  });
}

std::int32_t mpi_bcast(HostcallContext& ctx, std::uint32_t buf, std::int32_t count,
                       std::int32_t datatype, std::int32_t root, std::int32_t comm) {
  return guarded(ctx, "MPI_Bcast", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype type = env.translate_datatype(datatype);
    const HostComm c = env.translate_comm(comm);
    const HostSpan data = buffer(env, buf, count, datatype);
    check_peer(root, ctx.backend.comm_size(c), false);
    ctx.backend.bcast(data.bytes(), count, type, root, c);
    return abi::kSuccess;
  });
}

std::int32_t mpi_reduce(HostcallContext& ctx, std::uint32_t send_buf, std::uint32_t recv_buf,
                        std::int32_t count, std::int32_t datatype, std::int32_t op,
                        std::int32_t root, std::int32_t comm) {
  return guarded(ctx, "MPI_Reduce", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype type = env.translate_datatype(datatype);
    const HostOp reduction = env.translate_op(op);
    check_op(op, datatype);
    const HostComm c = env.translate_comm(comm);
    check_peer(root, ctx.backend.comm_size(c), false);
    const HostSpan in = buffer(env, send_buf, count, datatype);
    // The receive buffer is only significant at the root.
    HostSpan out{};
    if (ctx.backend.comm_rank(c) == root) out = buffer(env, recv_buf, count, datatype);
    ctx.backend.reduce(in.bytes(), out.bytes(), count, type, reduction, root, c);
    return abi::kSuccess;
  });
}

std::int32_t mpi_allreduce(HostcallContext& ctx, std::uint32_t send_buf, std::uint32_t recv_buf,
                           std::int32_t count, std::int32_t datatype, std::int32_t op,
                           std::int32_t comm) {
  return guarded(ctx, "MPI_Allreduce", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype type = env.translate_datatype(datatype);
    const HostOp reduction = env.translate_op(op);
    check_op(op, datatype);
    const HostComm c = env.translate_comm(comm);
    const HostSpan in = buffer(env, send_buf, count, datatype);
    const HostSpan out = buffer(env, recv_buf, count, datatype);
    ctx.backend.allreduce(in.bytes(), out.bytes(), count, type, reduction, c);
    return abi::kSuccess;
  });
}

std::int32_t mpi_gather(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                        std::int32_t send_type, std::uint32_t recv_buf, std::int32_t recv_count,
                        std::int32_t recv_type, std::int32_t root, std::int32_t comm) {
  return guarded(ctx, "MPI_Gather", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype stype = env.translate_datatype(send_type);
    const HostDatatype rtype = env.translate_datatype(recv_type);
    const HostComm c = env.translate_comm(comm);
    const std::int32_t size = ctx.backend.comm_size(c);
    check_peer(root, size, false);
    const HostSpan in = buffer(env, send_buf, send_count, send_type);
    HostSpan out{};
    require_count(recv_count);
    if (ctx.backend.comm_rank(c) == root) {
      out = buffer(env, recv_buf, recv_count, recv_type, static_cast<std::uint64_t>(size));
    }
    ctx.backend.gather(in.bytes(), send_count, stype, out.bytes(), recv_count, rtype, root, c);
    return abi::kSuccess;
  });
}

std::int32_t mpi_allgather(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                           std::int32_t send_type, std::uint32_t recv_buf,
                           std::int32_t recv_count, std::int32_t recv_type, std::int32_t comm) {
  return guarded(ctx, "MPI_Allgather", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype stype = env.translate_datatype(send_type);
    const HostDatatype rtype = env.translate_datatype(recv_type);
    const HostComm c = env.translate_comm(comm);
    const std::int32_t size = ctx.backend.comm_size(c);
    const HostSpan in = buffer(env, send_buf, send_count, send_type);
    const HostSpan out =
        buffer(env, recv_buf, recv_count, recv_type, static_cast<std::uint64_t>(size));
    ctx.backend.allgather(in.bytes(), send_count, stype, out.bytes(), recv_count, rtype, c);
    return abi::kSuccess;
  });
}

std::int32_t mpi_scatter(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                         std::int32_t send_type, std::uint32_t recv_buf, std::int32_t recv_count,
                         std::int32_t recv_type, std::int32_t root, std::int32_t comm) {
  return guarded(ctx, "MPI_Scatter", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype stype = env.translate_datatype(send_type);
    const HostDatatype rtype = env.translate_datatype(recv_type);
    const HostComm c = env.translate_comm(comm);
    const std::int32_t size = ctx.backend.comm_size(c);
    check_peer(root, size, false);
    require_count(send_count);
    HostSpan in{};
    if (ctx.backend.comm_rank(c) == root) {
      in = buffer(env, send_buf, send_count, send_type, static_cast<std::uint64_t>(size));
    }
    const HostSpan out = buffer(env, recv_buf, recv_count, recv_type);
    ctx.backend.scatter(in.bytes(), send_count, stype, out.bytes(), recv_count, rtype, root, c);
    return abi::kSuccess;
  });
}

std::int32_t mpi_alltoall(HostcallContext& ctx, std::uint32_t send_buf, std::int32_t send_count,
                          std::int32_t send_type, std::uint32_t recv_buf, std::int32_t recv_count,
                          std::int32_t recv_type, std::int32_t comm) {
  return guarded(ctx, "MPI_Alltoall", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostDatatype stype = env.translate_datatype(send_type);
    const HostDatatype rtype = env.translate_datatype(recv_type);
    const HostComm c = env.translate_comm(comm);
    const auto size = static_cast<std::uint64_t>(ctx.backend.comm_size(c));
    const HostSpan in = buffer(env, send_buf, send_count, send_type, size);
    const HostSpan out = buffer(env, recv_buf, recv_count, recv_type, size);
    ctx.backend.alltoall(in.bytes(), send_count, stype, out.bytes(), recv_count, rtype, c);
    return abi::kSuccess;
  });
}

std::int32_t mpi_alloc_mem(HostcallContext& ctx, std::int32_t size, std::int32_t,
                           std::uint32_t baseptr_addr) {
  return guarded(ctx, "MPI_Alloc_mem", [&] {
    Env& env = ctx.env;
    if (size < 0) throw AbiError(abi::kErrArg, "negative allocation size");
    check_out(env, baseptr_addr, 4);
    if (ctx.allocator == nullptr) {
      throw GuestAllocError(GuestAllocErrorKind::export_missing, "no guest allocator bound");
    }
    const GuestAddress addr = guest_alloc(*ctx.allocator, static_cast<std::uint32_t>(size));
    env.memory = ctx.allocator->current_memory();
    write_scalar<std::uint32_t>(env.memory, GuestAddress{baseptr_addr}, addr.offset);
    return abi::kSuccess;
  });
}

std::int32_t mpi_free_mem(HostcallContext& ctx, std::uint32_t base) {
  return guarded(ctx, "MPI_Free_mem", [&] {
    if (ctx.allocator == nullptr) {
      throw GuestAllocError(GuestAllocErrorKind::export_missing, "no guest allocator bound");
    }
    guest_free(*ctx.allocator, GuestAddress{base});
    ctx.env.memory = ctx.allocator->current_memory();
    return abi::kSuccess;
  });
}

double mpi_wtime(HostcallContext& ctx) {
  ctx.env.counters.hostcalls.fetch_add(1, std::memory_order_relaxed);
  const auto elapsed = std::chrono::steady_clock::now() - ctx.env.wtime_epoch;
  return std::chrono::duration<double>(elapsed).count();
}

double mpi_wtick(HostcallContext& ctx) {
  ctx.env.counters.hostcalls.fetch_add(1, std::memory_order_relaxed);
  using period = std::chrono::steady_clock::period;
  return static_cast<double>(period::num) / static_cast<double>(period::den);
}

std::int32_t mpi_get_count(HostcallContext& ctx, std::uint32_t status_addr,
                           std::int32_t datatype, std::uint32_t count_addr) {
  return guarded(ctx, "MPI_Get_count", [&] {
    Env& env = ctx.env;
    ctx.env.translate_datatype(datatype);
    const std::uint32_t size = width(datatype);
    check_out(env, status_addr, abi::kStatusSize);
    const auto count_bytes =
        read_scalar<std::int32_t>(env.memory, GuestAddress{status_addr + 12});
    const std::int32_t count = (count_bytes >= 0 && count_bytes % static_cast<std::int32_t>(size) == 0)
                                   ? count_bytes / static_cast<std::int32_t>(size)
                                   : abi::kUndefined;
    write_i32(env, count_addr, count);
    return abi::kSuccess;
  });
}

std::int32_t mpi_abort(HostcallContext& ctx, std::int32_t comm, std::int32_t errorcode) {
  ctx.env.counters.hostcalls.fetch_add(1, std::memory_order_relaxed);
  HostComm c = ctx.backend.world_comm();
  if (auto found = ctx.env.comms.find(comm)) c = *found;
  ctx.backend.abort(c, errorcode);
  return abi::kErrOther;  // not reached
}

std::int32_t mpi_comm_split(HostcallContext& ctx, std::int32_t comm, std::int32_t color,
                            std::int32_t key, std::uint32_t newcomm_addr) {
  return guarded(ctx, "MPI_Comm_split", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostComm parent = env.translate_comm(comm);
    if (color < 0 && color != abi::kUndefined) throw AbiError(abi::kErrArg, "negative color");
    check_out(env, newcomm_addr, 4);
    const auto created = ctx.backend.comm_split(parent, color, key);
    write_i32(env, newcomm_addr, created ? env.register_comm(*created) : abi::kCommNull);
    return abi::kSuccess;
  });
}

std::int32_t mpi_comm_dup(HostcallContext& ctx, std::int32_t comm, std::uint32_t newcomm_addr) {
  return guarded(ctx, "MPI_Comm_dup", [&] {
    Env& env = ctx.env;
    require_active(env);
    const HostComm parent = env.translate_comm(comm);
    check_out(env, newcomm_addr, 4);
    write_i32(env, newcomm_addr, env.register_comm(ctx.backend.comm_dup(parent)));
    return abi::kSuccess;
  });
}

std::int32_t mpi_comm_free(HostcallContext& ctx, std::uint32_t comm_addr) {
  return guarded(ctx, "MPI_Comm_free", [&] {
    Env& env = ctx.env;
    require_active(env);
    const auto code = read_scalar<std::int32_t>(env.memory, GuestAddress{comm_addr});
    const HostComm released = env.release_comm(code);
    ctx.backend.comm_free(released);
    write_i32(env, comm_addr, abi::kCommNull);
    return abi::kSuccess;
  });
}

}  // namespace hostcalls
}  // namespace mpiwasm
