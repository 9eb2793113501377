#include "mpiwasm/transport/native.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include <mpi.h>

namespace mpiwasm::transport {
namespace {

// MPI handles are ints in some implementations and pointers in others.
template <class Handle, class Mpi>
Handle wrap(Mpi raw) {
  static_assert(sizeof(Mpi) <= sizeof(std::intptr_t));
  std::intptr_t v = 0;
  std::memcpy(&v, &raw, sizeof raw);
  return Handle{v};
}

template <class Mpi, class Handle>
Mpi unwrap(Handle h) {
  Mpi raw;
  std::memcpy(&raw, &h.value, sizeof raw);
  return raw;
}

MPI_Comm C(HostComm h) { return unwrap<MPI_Comm>(h); }
MPI_Datatype T(HostDatatype h) { return unwrap<MPI_Datatype>(h); }
MPI_Op O(HostOp h) { return unwrap<MPI_Op>(h); }

void check(int rc, const char* what) {
  if (rc == MPI_SUCCESS) return;
  char msg[MPI_MAX_ERROR_STRING];
  int len = 0;
  MPI_Error_string(rc, msg, &len);
  throw BackendError(std::string(what) + ": " + std::string(msg, static_cast<std::size_t>(len)));
}

int src(std::int32_t s) { return s == abi::kAnySource ? MPI_ANY_SOURCE : s; }
int tg(std::int32_t t) { return t == abi::kAnyTag ? MPI_ANY_TAG : t; }

RecvInfo info_from(const MPI_Status& st, int rc) {
  RecvInfo info;
  info.source = st.MPI_SOURCE;
  info.tag = st.MPI_TAG;
  int bytes = 0;
  MPI_Get_count(&st, MPI_BYTE, &bytes);
  info.count_bytes = bytes == MPI_UNDEFINED ? 0 : static_cast<std::uint32_t>(bytes);
  int cls = rc;
  if (rc != MPI_SUCCESS) MPI_Error_class(rc, &cls);
  info.truncated = cls == MPI_ERR_TRUNCATE;
  return info;
}

void* mut(ConstBytes b) { return const_cast<std::byte*>(b.data()); }

}  // namespace

struct NativeBackend::Pending {
  MPI_Request request = MPI_REQUEST_NULL;
};

NativeBackend::NativeBackend() = default;

NativeBackend::~NativeBackend() {
  for (auto& [raw, p] : pending_) {
    if (p->request != MPI_REQUEST_NULL) MPI_Request_free(&p->request);
  }
}

void NativeBackend::init() {
  int already = 0;
  MPI_Initialized(&already);
  if (!already) {
    check(MPI_Init(nullptr, nullptr), "MPI_Init");
    owns_init_ = true;
  }
  MPI_Comm_set_errhandler(MPI_COMM_WORLD, MPI_ERRORS_RETURN);
  MPI_Comm_set_errhandler(MPI_COMM_SELF, MPI_ERRORS_RETURN);
}

void NativeBackend::finalize() {
  if (owns_init_) check(MPI_Finalize(), "MPI_Finalize");
}

std::int32_t NativeBackend::world_rank() const {
  int r = 0;
  check(MPI_Comm_rank(MPI_COMM_WORLD, &r), "MPI_Comm_rank");
  return r;
}

std::int32_t NativeBackend::world_size() const {
  int n = 0;
  check(MPI_Comm_size(MPI_COMM_WORLD, &n), "MPI_Comm_size");
  return n;
}

HostComm NativeBackend::world_comm() { return wrap<HostComm>(MPI_COMM_WORLD); }
HostComm NativeBackend::self_comm() { return wrap<HostComm>(MPI_COMM_SELF); }

HostDatatype NativeBackend::datatype(abi::Datatype type) {
  switch (type) {
    case abi::Datatype::byte:
      return wrap<HostDatatype>(MPI_UINT8_T);
    case abi::Datatype::char_:
      return wrap<HostDatatype>(MPI_SIGNED_CHAR);
    case abi::Datatype::int_:
      return wrap<HostDatatype>(MPI_INT32_T);
    case abi::Datatype::float_:
      return wrap<HostDatatype>(MPI_FLOAT);
    case abi::Datatype::double_:
      return wrap<HostDatatype>(MPI_DOUBLE);
    case abi::Datatype::long_:
    case abi::Datatype::long_long:
      return wrap<HostDatatype>(MPI_INT64_T);
    case abi::Datatype::unsigned_:
      return wrap<HostDatatype>(MPI_UINT32_T);
    case abi::Datatype::unsigned_long:
      return wrap<HostDatatype>(MPI_UINT64_T);
  }
  throw BackendError("unknown datatype");
}

HostOp NativeBackend::op(abi::Op op) {
  switch (op) {
    case abi::Op::sum:
      return wrap<HostOp>(MPI_SUM);
    case abi::Op::max:
      return wrap<HostOp>(MPI_MAX);
    case abi::Op::min:
      return wrap<HostOp>(MPI_MIN);
    case abi::Op::prod:
      return wrap<HostOp>(MPI_PROD);
    case abi::Op::land:
      return wrap<HostOp>(MPI_LAND);
    case abi::Op::lor:
      return wrap<HostOp>(MPI_LOR);
    case abi::Op::band:
      return wrap<HostOp>(MPI_BAND);
    case abi::Op::bor:
      return wrap<HostOp>(MPI_BOR);
  }
  throw BackendError("unknown op");
}

std::int32_t NativeBackend::comm_rank(HostComm comm) {
  int r = 0;
  check(MPI_Comm_rank(C(comm), &r), "MPI_Comm_rank");
  return r;
}

std::int32_t NativeBackend::comm_size(HostComm comm) {
  int n = 0;
  check(MPI_Comm_size(C(comm), &n), "MPI_Comm_size");
  return n;
}

std::optional<HostComm> NativeBackend::comm_split(HostComm comm, std::int32_t color,
                                                  std::int32_t key) {
  MPI_Comm out = MPI_COMM_NULL;
  check(MPI_Comm_split(C(comm), color == abi::kUndefined ? MPI_UNDEFINED : color, key, &out),
        "MPI_Comm_split");
  if (out == MPI_COMM_NULL) return std::nullopt;
  MPI_Comm_set_errhandler(out, MPI_ERRORS_RETURN);
  return wrap<HostComm>(out);
}

HostComm NativeBackend::comm_dup(HostComm comm) {
  MPI_Comm out = MPI_COMM_NULL;
  check(MPI_Comm_dup(C(comm), &out), "MPI_Comm_dup");
  MPI_Comm_set_errhandler(out, MPI_ERRORS_RETURN);
  return wrap<HostComm>(out);
}

void NativeBackend::comm_free(HostComm comm) {
  MPI_Comm c = C(comm);
  check(MPI_Comm_free(&c), "MPI_Comm_free");
}

void NativeBackend::send(ConstBytes buf, std::int32_t count, HostDatatype type,
                         std::int32_t dest, std::int32_t tag, HostComm comm) {
  check(MPI_Send(buf.data(), count, T(type), dest, tag, C(comm)), "MPI_Send");
}

RecvInfo NativeBackend::recv(MutBytes buf, std::int32_t count, HostDatatype type,
                             std::int32_t source, std::int32_t tag, HostComm comm) {
  MPI_Status st;
  const int rc = MPI_Recv(buf.data(), count, T(type), src(source), tg(tag), C(comm), &st);
  RecvInfo info = info_from(st, rc);
  if (rc != MPI_SUCCESS && !info.truncated) check(rc, "MPI_Recv");
  if (info.truncated) info.count_bytes = static_cast<std::uint32_t>(buf.size());
  return info;
}

HostRequest NativeBackend::isend(ConstBytes buf, std::int32_t count, HostDatatype type,
                                 std::int32_t dest, std::int32_t tag, HostComm comm) {
  auto p = std::make_unique<Pending>();
  check(MPI_Isend(buf.data(), count, T(type), dest, tag, C(comm), &p->request), "MPI_Isend");
  Pending* key = p.get();
  pending_.emplace(key, std::move(p));
  return HostRequest{reinterpret_cast<std::intptr_t>(key)};
}

HostRequest NativeBackend::irecv(MutBytes buf, std::int32_t count, HostDatatype type,
                                 std::int32_t source, std::int32_t tag, HostComm comm) {
  auto p = std::make_unique<Pending>();
  check(MPI_Irecv(buf.data(), count, T(type), src(source), tg(tag), C(comm), &p->request),
        "MPI_Irecv");
  Pending* key = p.get();
  pending_.emplace(key, std::move(p));
  return HostRequest{reinterpret_cast<std::intptr_t>(key)};
}

RecvInfo NativeBackend::wait(HostRequest request) {
  auto it = pending_.find(reinterpret_cast<Pending*>(request.value));
  if (it == pending_.end()) throw BackendError("unknown request");
  auto p = std::move(it->second);
  pending_.erase(it);
  MPI_Status st;
  const int rc = MPI_Wait(&p->request, &st);
  RecvInfo info = info_from(st, rc);
  if (rc != MPI_SUCCESS && !info.truncated) check(rc, "MPI_Wait");
  return info;
}

RecvInfo NativeBackend::sendrecv(ConstBytes send_buf, std::int32_t send_count,
                                 HostDatatype send_type, std::int32_t dest,
                                 std::int32_t send_tag, MutBytes recv_buf,
                                 std::int32_t recv_count, HostDatatype recv_type,
                                 std::int32_t source, std::int32_t recv_tag, HostComm comm) {
  MPI_Status st;
  const int rc = MPI_Sendrecv(send_buf.data(), send_count, T(send_type), dest, send_tag,
                              recv_buf.data(), recv_count, T(recv_type), src(source),
                              tg(recv_tag), C(comm), &st);
  RecvInfo info = info_from(st, rc);
  if (rc != MPI_SUCCESS && !info.truncated) check(rc, "MPI_Sendrecv");
  if (info.truncated) info.count_bytes = static_cast<std::uint32_t>(recv_buf.size());
  return info;
}

void NativeBackend::barrier(HostComm comm) { check(MPI_Barrier(C(comm)), "MPI_Barrier"); }

void NativeBackend::bcast(MutBytes buf, std::int32_t count, HostDatatype type, std::int32_t root,
                          HostComm comm) {
  check(MPI_Bcast(buf.data(), count, T(type), root, C(comm)), "MPI_Bcast");
}

void NativeBackend::reduce(ConstBytes send_buf, MutBytes recv_buf, std::int32_t count,
                           HostDatatype type, HostOp op, std::int32_t root, HostComm comm) {
  check(MPI_Reduce(send_buf.data(), recv_buf.data(), count, T(type), O(op), root, C(comm)),
        "MPI_Reduce");
}

void NativeBackend::allreduce(ConstBytes send_buf, MutBytes recv_buf, std::int32_t count,
                              HostDatatype type, HostOp op, HostComm comm) {
  check(MPI_Allreduce(send_buf.data(), recv_buf.data(), count, T(type), O(op), C(comm)),
        "MPI_Allreduce");
}

void NativeBackend::gather(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                           MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                           std::int32_t root, HostComm comm) {
  check(MPI_Gather(mut(send_buf), send_count, T(send_type), recv_buf.data(), recv_count,
                   T(recv_type), root, C(comm)),
        "MPI_Gather");
}

void NativeBackend::allgather(ConstBytes send_buf, std::int32_t send_count,
                              HostDatatype send_type, MutBytes recv_buf, std::int32_t recv_count,
                              HostDatatype recv_type, HostComm comm) {
  check(MPI_Allgather(mut(send_buf), send_count, T(send_type), recv_buf.data(), recv_count,
                      T(recv_type), C(comm)),
        "MPI_Allgather");
}

void NativeBackend::scatter(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                            MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                            std::int32_t root, HostComm comm) {
  check(MPI_Scatter(mut(send_buf), send_count, T(send_type), recv_buf.data(), recv_count,
                    T(recv_type), root, C(comm)),
        "MPI_Scatter");
}

void NativeBackend::alltoall(ConstBytes send_buf, std::int32_t send_count,
                             HostDatatype send_type, MutBytes recv_buf, std::int32_t recv_count,
                             HostDatatype recv_type, HostComm comm) {
  check(MPI_Alltoall(mut(send_buf), send_count, T(send_type), recv_buf.data(), recv_count,
                     T(recv_type), C(comm)),
        "MPI_Alltoall");
}

void NativeBackend::abort(HostComm comm, std::int32_t code) {
  MPI_Abort(C(comm), code);
  std::_Exit(code);
}

}  // namespace mpiwasm::transport
