#pragma once
// Stand-in for the native transport: rank 0 of a world of `size`, peers are
// imaginary. It records every buffer span it is handed and never touches the
// bytes unless `scribble` is set, in which case every writable span gets
// filled with 0x5a (lets a test see exactly where results land).
#include <cstring>
#include <map>
#include <mutex>
#include <vector>

#include "mpiwasm/transport/backend.hpp"

namespace mock {

using namespace mpiwasm;
using namespace mpiwasm::transport;

enum class Use { send, recv, coll_in, coll_out };

struct Seen {
  Use use;
  const std::byte* data;
  std::size_t size;
};

class MockBackend final : public Backend {
 public:
  explicit MockBackend(std::int32_t size = 2) : size_(size) {}

  std::vector<Seen> seen;
  std::uint64_t calls = 0;
  bool scribble = false;

  BackendKind kind() const override { return BackendKind::native; }
  void init() override {}
  void finalize() override {}
  std::int32_t world_rank() const override { return 0; }
  std::int32_t world_size() const override { return size_; }
  HostComm world_comm() override { return HostComm{1}; }
  HostComm self_comm() override { return HostComm{2}; }
  HostDatatype datatype(abi::Datatype t) override { return HostDatatype{100 + static_cast<int>(t)}; }
  HostOp op(abi::Op o) override { return HostOp{200 + static_cast<int>(o)}; }
  std::int32_t comm_rank(HostComm) override { return 0; }
  std::int32_t comm_size(HostComm c) override { return c.value == 2 ? 1 : size_; }
  std::optional<HostComm> comm_split(HostComm, std::int32_t color, std::int32_t) override {
    if (color == abi::kUndefined) return std::nullopt;
    return HostComm{next_++};
  }
  HostComm comm_dup(HostComm) override { return HostComm{next_++}; }
  void comm_free(HostComm) override {}

  void send(ConstBytes buf, std::int32_t, HostDatatype, std::int32_t, std::int32_t, HostComm) override {
    note(Use::send, buf.data(), buf.size());
  }
  RecvInfo recv(MutBytes buf, std::int32_t, HostDatatype, std::int32_t source, std::int32_t tag,
                HostComm) override {
    note(Use::recv, buf.data(), buf.size());
    return RecvInfo{source < 0 ? 1 : source, tag < 0 ? 0 : tag, static_cast<std::uint32_t>(buf.size()), false};
  }
  HostRequest isend(ConstBytes buf, std::int32_t c, HostDatatype t, std::int32_t d, std::int32_t tag,
                    HostComm comm) override {
    send(buf, c, t, d, tag, comm);
    const auto id = next_++;
    pending_[id] = RecvInfo{};
    return HostRequest{id};
  }
  HostRequest irecv(MutBytes buf, std::int32_t c, HostDatatype t, std::int32_t s, std::int32_t tag,
                    HostComm comm) override {
    const auto id = next_++;
    pending_[id] = recv(buf, c, t, s, tag, comm);
    return HostRequest{id};
  }
  RecvInfo wait(HostRequest r) override {
    auto it = pending_.find(r.value);
    if (it == pending_.end()) throw BackendError("unknown request");
    RecvInfo info = it->second;
    pending_.erase(it);
    return info;
  }
  RecvInfo sendrecv(ConstBytes sb, std::int32_t sc, HostDatatype st, std::int32_t d, std::int32_t stag,
                    MutBytes rb, std::int32_t rc, HostDatatype rt, std::int32_t s, std::int32_t rtag,
                    HostComm comm) override {
    send(sb, sc, st, d, stag, comm);
    return recv(rb, rc, rt, s, rtag, comm);
  }
  void barrier(HostComm) override { ++calls; }
  void bcast(MutBytes buf, std::int32_t, HostDatatype, std::int32_t, HostComm) override {
    note(Use::coll_out, buf.data(), buf.size());
  }
  void reduce(ConstBytes sb, MutBytes rb, std::int32_t, HostDatatype, HostOp, std::int32_t, HostComm) override {
    note(Use::coll_in, sb.data(), sb.size());
    note(Use::coll_out, rb.data(), rb.size());
  }
  void allreduce(ConstBytes sb, MutBytes rb, std::int32_t, HostDatatype, HostOp, HostComm) override {
    note(Use::coll_in, sb.data(), sb.size());
    note(Use::coll_out, rb.data(), rb.size());
  }
  void gather(ConstBytes sb, std::int32_t, HostDatatype, MutBytes rb, std::int32_t, HostDatatype,
              std::int32_t, HostComm) override {
    note(Use::coll_in, sb.data(), sb.size());
    note(Use::coll_out, rb.data(), rb.size());
  }
  void allgather(ConstBytes sb, std::int32_t, HostDatatype, MutBytes rb, std::int32_t, HostDatatype,
                 HostComm) override {
    note(Use::coll_in, sb.data(), sb.size());
    note(Use::coll_out, rb.data(), rb.size());
  }
  void scatter(ConstBytes sb, std::int32_t, HostDatatype, MutBytes rb, std::int32_t, HostDatatype,
               std::int32_t, HostComm) override {
    note(Use::coll_in, sb.data(), sb.size());
    note(Use::coll_out, rb.data(), rb.size());
  }
  void alltoall(ConstBytes sb, std::int32_t, HostDatatype, MutBytes rb, std::int32_t, HostDatatype,
                HostComm) override {
    note(Use::coll_in, sb.data(), sb.size());
    note(Use::coll_out, rb.data(), rb.size());
  }
  [[noreturn]] void abort(HostComm, std::int32_t code) override { throw GroupAborted(code, "mock abort"); }
  std::uint64_t payload_copies() const override { return 0; }

 private:
  void note(Use u, const std::byte* p, std::size_t n) {
    ++calls;
    seen.push_back(Seen{u, p, n});
    if (scribble && (u == Use::recv || u == Use::coll_out) && n > 0) {
      std::memset(const_cast<std::byte*>(p), 0x5a, n);
    }
  }

  std::int32_t size_;
  std::intptr_t next_ = 1000;
  std::map<std::intptr_t, RecvInfo> pending_;
};

}  // namespace mock
