#pragma once

// Delegates every call to the host MPI library. One embedder process per rank,
// started by the host launcher. Guest buffers are passed by span: nothing is
// staged, so payload_copies() is always 0.

#include <memory>
#include <unordered_map>

#include "mpiwasm/transport/backend.hpp"

namespace mpiwasm::transport {

class NativeBackend final : public Backend {
 public:
  NativeBackend();
  ~NativeBackend() override;

  BackendKind kind() const override { return BackendKind::native; }

  void init() override;
  void finalize() override;
  std::int32_t world_rank() const override;
  std::int32_t world_size() const override;

  HostComm world_comm() override;
  HostComm self_comm() override;
  HostDatatype datatype(abi::Datatype type) override;
  HostOp op(abi::Op op) override;

  std::int32_t comm_rank(HostComm comm) override;
  std::int32_t comm_size(HostComm comm) override;
  std::optional<HostComm> comm_split(HostComm comm, std::int32_t color, std::int32_t key) override;
  HostComm comm_dup(HostComm comm) override;
  void comm_free(HostComm comm) override;

  void send(ConstBytes buf, std::int32_t count, HostDatatype type, std::int32_t dest,
            std::int32_t tag, HostComm comm) override;
  RecvInfo recv(MutBytes buf, std::int32_t count, HostDatatype type, std::int32_t source,
                std::int32_t tag, HostComm comm) override;
  HostRequest isend(ConstBytes buf, std::int32_t count, HostDatatype type, std::int32_t dest,
                    std::int32_t tag, HostComm comm) override;
  HostRequest irecv(MutBytes buf, std::int32_t count, HostDatatype type, std::int32_t source,
                    std::int32_t tag, HostComm comm) override;
  RecvInfo wait(HostRequest request) override;
  RecvInfo sendrecv(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                    std::int32_t dest, std::int32_t send_tag, MutBytes recv_buf,
                    std::int32_t recv_count, HostDatatype recv_type, std::int32_t source,
                    std::int32_t recv_tag, HostComm comm) override;

  void barrier(HostComm comm) override;
  void bcast(MutBytes buf, std::int32_t count, HostDatatype type, std::int32_t root,
             HostComm comm) override;
  void reduce(ConstBytes send_buf, MutBytes recv_buf, std::int32_t count, HostDatatype type,
              HostOp op, std::int32_t root, HostComm comm) override;
  void allreduce(ConstBytes send_buf, MutBytes recv_buf, std::int32_t count, HostDatatype type,
                 HostOp op, HostComm comm) override;
  void gather(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
              MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
              std::int32_t root, HostComm comm) override;
  void allgather(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                 MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                 HostComm comm) override;
  void scatter(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
               MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
               std::int32_t root, HostComm comm) override;
  void alltoall(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                HostComm comm) override;

  [[noreturn]] void abort(HostComm comm, std::int32_t code) override;

  std::uint64_t payload_copies() const override { return 0; }

 private:
  struct Pending;
  std::unordered_map<Pending*, std::unique_ptr<Pending>> pending_;
  bool owns_init_ = false;
};

}  // namespace mpiwasm::transport
