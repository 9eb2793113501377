#pragma once

// In-process transport: N ranks, one worker thread each, sharing a RankGroup.
//
// Matching follows MPI rules. Every message is staged in an Envelope (copy in
// on send, copy out on match), receives are matched against the unexpected
// queue in arrival order, and arriving messages against posted receives in
// posting order. Sends are eager and never block, so the only place a rank
// blocks is `wait`. The group uses that to detect deadlock exactly: when every
// live rank is blocked in `wait`, nothing can ever complete.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "mpiwasm/transport/backend.hpp"

namespace mpiwasm::transport {

struct Envelope {
  std::int32_t src = 0;  // sender's rank within the communicator
  std::int32_t dst = 0;  // receiver's world rank
  std::int32_t tag = 0;
  std::int32_t comm_epoch = 0;
  std::vector<std::byte> payload;
};

struct PostedRecv {
  std::int32_t owner = 0;  // world rank
  std::int32_t source = 0;
  std::int32_t tag = 0;
  std::int32_t comm_epoch = 0;
  MutBytes dest;
  bool complete = false;
  RecvInfo info;
  std::string description;
};

class RankGroup {
 public:
  explicit RankGroup(std::int32_t size);

  std::int32_t size() const noexcept { return size_; }

  /// Sender-side: stage `payload` and hand it to `env.dst`.
  void deliver(Envelope envelope);
  /// Matches against the unexpected queue or queues the receive.
  void post(PostedRecv& recv);
  /// Blocks the owner until `recv` completes. Throws GroupAborted.
  void wait(PostedRecv& recv);
  /// Withdraws a receive that will never be waited on.
  void cancel(PostedRecv& recv);

  /// Epoch pair (point-to-point, collective) for a communicator derived
  /// from `parent` by its `sequence`-th split/dup with `color`. Every member
  /// asking with the same key gets the same value.
  std::int32_t derive_epoch(std::int32_t parent_epoch, std::int32_t sequence, std::int32_t color);

  void rank_finished(std::int32_t rank);

  /// First caller wins; later aborts keep the original code and reason.
  void abort(std::int32_t code, const std::string& reason);
  bool aborted() const;
  std::int32_t abort_code() const;
  std::string abort_reason() const;
  void set_abort_hook(std::function<void()> hook);

  /// Test hook: a rank blocked longer than this aborts the group.
  void set_watchdog(std::chrono::milliseconds timeout);

  void count_copy(std::int32_t rank);
  std::uint64_t copies(std::int32_t rank) const;
  std::uint64_t messages_delivered() const;

 private:
  struct RankState {
    std::deque<Envelope> unexpected;
    std::list<PostedRecv*> posted;
    std::condition_variable cv;
    PostedRecv* waiting_on = nullptr;
    bool finished = false;
    std::atomic<std::uint64_t> copies{0};
  };

  static bool matches(const PostedRecv& recv, const Envelope& envelope);
  void complete(PostedRecv& recv, Envelope& envelope);
  void abort_locked(std::int32_t code, const std::string& reason);
  void check_deadlock_locked();
  std::string blocked_summary_locked() const;

  std::int32_t size_;
  mutable std::mutex mutex_;
  std::vector<std::unique_ptr<RankState>> ranks_;
  std::int32_t live_ = 0;
  std::int32_t blocked_ = 0;
  bool aborted_ = false;
  std::int32_t abort_code_ = 0;
  std::string abort_reason_;
  std::function<void()> abort_hook_;
  std::optional<std::chrono::milliseconds> watchdog_;
  std::map<std::tuple<std::int32_t, std::int32_t, std::int32_t>, std::int32_t> epochs_;
  std::int32_t next_epoch_ = 4;  // 0/1 world, 2/3 self
  std::atomic<std::uint64_t> delivered_{0};
};

class SimBackend final : public Backend {
 public:
  SimBackend(std::shared_ptr<RankGroup> group, std::int32_t rank);
  ~SimBackend() override;

  BackendKind kind() const override { return BackendKind::sim; }

  void init() override;
  void finalize() override;
  std::int32_t world_rank() const override { return rank_; }
  std::int32_t world_size() const override { return group_->size(); }

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

  std::uint64_t payload_copies() const override { return group_->copies(rank_); }

  RankGroup& group() noexcept { return *group_; }

  /// Withdraws outstanding receives so their guest buffers are never written
  /// after the instance is gone.
  void cancel_pending();

 private:
  struct Comm {
    std::int32_t epoch = 0;            // point-to-point; collectives use epoch + 1
    std::vector<std::int32_t> members; // world rank of each comm rank
    std::int32_t my_rank = 0;
    std::int32_t derived = 0;          // splits/dups made from this comm so far
  };

  struct Request {
    PostedRecv posted;   // receives only
    bool is_send = false;
  };

  Comm& comm_of(HostComm handle);
  HostComm adopt(std::unique_ptr<Comm> comm);

  void p2p_send(const Comm& comm, std::int32_t epoch, ConstBytes data, std::int32_t dest,
                std::int32_t tag);
  RecvInfo p2p_recv(const Comm& comm, std::int32_t epoch, MutBytes dest, std::int32_t source,
                    std::int32_t tag, const char* what);
  void coll_send(const Comm& comm, ConstBytes data, std::int32_t dest);
  void coll_recv_exact(const Comm& comm, MutBytes dest, std::int32_t source, const char* what);

  std::shared_ptr<RankGroup> group_;
  std::int32_t rank_;
  Comm* world_ = nullptr;
  Comm* self_ = nullptr;
  std::unordered_map<Comm*, std::unique_ptr<Comm>> comms_;
  std::unordered_map<Request*, std::unique_ptr<Request>> requests_;
};

}  // namespace mpiwasm::transport
