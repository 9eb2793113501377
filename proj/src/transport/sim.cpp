#include "mpiwasm/transport/sim.hpp"

#include <algorithm>
#include <climits>
#include <cstring>
#include <sstream>

#include "mpiwasm/transport/reduce.hpp"

namespace mpiwasm::transport {
namespace {

constexpr std::int32_t kWorldEpoch = 0;
constexpr std::int32_t kSelfEpoch = 2;
constexpr std::int32_t kDupColor = INT_MIN;
constexpr std::int32_t kDeadlockCode = 1;

std::uint32_t width_of(HostDatatype type) {
  auto size = abi::datatype_size(static_cast<std::int32_t>(type.value));
  if (!size) throw BackendError("sim backend received an unknown datatype handle");
  return *size;
}

}  // namespace

// ---------------------------------------------------------------- RankGroup

RankGroup::RankGroup(std::int32_t size) : size_(size), live_(size) {
  if (size < 1) throw BackendError("rank group needs at least one rank");
  ranks_.reserve(static_cast<std::size_t>(size));
  for (std::int32_t r = 0; r < size; ++r) ranks_.push_back(std::make_unique<RankState>());
}

bool RankGroup::matches(const PostedRecv& recv, const Envelope& envelope) {
  return recv.comm_epoch == envelope.comm_epoch &&
         (recv.source == abi::kAnySource || recv.source == envelope.src) &&
         (recv.tag == abi::kAnyTag || recv.tag == envelope.tag);
}

void RankGroup::complete(PostedRecv& recv, Envelope& envelope) {
  const std::size_t n = std::min(envelope.payload.size(), recv.dest.size());
  if (n > 0) std::memcpy(recv.dest.data(), envelope.payload.data(), n);
  ranks_[static_cast<std::size_t>(recv.owner)]->copies.fetch_add(1, std::memory_order_relaxed);
  recv.info = RecvInfo{envelope.src, envelope.tag, static_cast<std::uint32_t>(n),
                       envelope.payload.size() > recv.dest.size()};
  recv.complete = true;
  delivered_.fetch_add(1, std::memory_order_relaxed);
}

void RankGroup::deliver(Envelope envelope) {
  std::lock_guard lock(mutex_);
  if (aborted_) throw GroupAborted(abort_code_, abort_reason_);
  auto& state = *ranks_.at(static_cast<std::size_t>(envelope.dst));
  for (auto it = state.posted.begin(); it != state.posted.end(); ++it) {
    PostedRecv& recv = **it;
    if (!matches(recv, envelope)) continue;
    state.posted.erase(it);
    complete(recv, envelope);
    if (state.waiting_on == &recv) {
      state.waiting_on = nullptr;
      --blocked_;
    }
    state.cv.notify_all();
    return;
  }
  state.unexpected.push_back(std::move(envelope));
}

void RankGroup::post(PostedRecv& recv) {
  std::lock_guard lock(mutex_);
  if (aborted_) throw GroupAborted(abort_code_, abort_reason_);
  auto& state = *ranks_.at(static_cast<std::size_t>(recv.owner));
  for (auto it = state.unexpected.begin(); it != state.unexpected.end(); ++it) {
    if (!matches(recv, *it)) continue;
    Envelope envelope = std::move(*it);
    state.unexpected.erase(it);
    complete(recv, envelope);
    return;
  }
  state.posted.push_back(&recv);
}

void RankGroup::cancel(PostedRecv& recv) {
  std::lock_guard lock(mutex_);
  auto& state = *ranks_.at(static_cast<std::size_t>(recv.owner));
  state.posted.remove(&recv);
  if (state.waiting_on == &recv) {
    state.waiting_on = nullptr;
    --blocked_;
  }
}

void RankGroup::wait(PostedRecv& recv) {
  std::unique_lock lock(mutex_);
  auto& state = *ranks_.at(static_cast<std::size_t>(recv.owner));
  const auto deadline = watchdog_ ? std::chrono::steady_clock::now() + *watchdog_
                                  : std::chrono::steady_clock::time_point::max();
  while (!recv.complete) {
    if (aborted_) {
      state.posted.remove(&recv);
      if (state.waiting_on == &recv) {
        state.waiting_on = nullptr;
        --blocked_;
      }
      throw GroupAborted(abort_code_, abort_reason_);
    }
    if (state.waiting_on != &recv) {
      state.waiting_on = &recv;
      ++blocked_;
      check_deadlock_locked();
      continue;
    }
    if (watchdog_) {
      if (state.cv.wait_until(lock, deadline) == std::cv_status::timeout && !recv.complete &&
          !aborted_) {
        abort_locked(kDeadlockCode, "watchdog expired after " +
                                        std::to_string(watchdog_->count()) + " ms; " +
                                        blocked_summary_locked());
      }
    } else {
      state.cv.wait(lock);
    }
  }
}

std::int32_t RankGroup::derive_epoch(std::int32_t parent_epoch, std::int32_t sequence,
                                     std::int32_t color) {
  std::lock_guard lock(mutex_);
  auto [it, inserted] = epochs_.try_emplace({parent_epoch, sequence, color}, next_epoch_);
  if (inserted) next_epoch_ += 2;
  return it->second;
}

void RankGroup::rank_finished(std::int32_t rank) {
  std::lock_guard lock(mutex_);
  auto& state = *ranks_.at(static_cast<std::size_t>(rank));
  if (state.finished) return;
  state.finished = true;
  if (state.waiting_on != nullptr) {
    state.waiting_on = nullptr;
    --blocked_;
  }
  --live_;
  check_deadlock_locked();
}

void RankGroup::check_deadlock_locked() {
  if (aborted_ || live_ == 0 || blocked_ < live_) return;
  abort_locked(kDeadlockCode, "deadlock: " + blocked_summary_locked());
}

std::string RankGroup::blocked_summary_locked() const {
  std::ostringstream out;
  bool first = true;
  for (std::size_t r = 0; r < ranks_.size(); ++r) {
    const auto& state = *ranks_[r];
    if (state.finished) {
      out << (first ? "" : "; ") << "rank " << r << " exited";
    } else if (state.waiting_on != nullptr) {
      out << (first ? "" : "; ") << "rank " << r << " blocked in "
          << state.waiting_on->description;
    } else {
      out << (first ? "" : "; ") << "rank " << r << " running";
    }
    first = false;
  }
  return out.str();
}

void RankGroup::abort(std::int32_t code, const std::string& reason) {
  std::lock_guard lock(mutex_);
  abort_locked(code, reason);
}

void RankGroup::abort_locked(std::int32_t code, const std::string& reason) {
  if (aborted_) return;
  aborted_ = true;
  abort_code_ = code;
  abort_reason_ = reason;
  for (auto& state : ranks_) state->cv.notify_all();
  // The hook interrupts running guests; it only bumps an atomic counter so it
  // is safe under the lock.
  if (abort_hook_) abort_hook_();
}

bool RankGroup::aborted() const {
  std::lock_guard lock(mutex_);
  return aborted_;
}

std::int32_t RankGroup::abort_code() const {
  std::lock_guard lock(mutex_);
  return abort_code_;
}

std::string RankGroup::abort_reason() const {
  std::lock_guard lock(mutex_);
  return abort_reason_;
}

void RankGroup::set_abort_hook(std::function<void()> hook) {
  std::lock_guard lock(mutex_);
  abort_hook_ = std::move(hook);
}

void RankGroup::set_watchdog(std::chrono::milliseconds timeout) {
  std::lock_guard lock(mutex_);
  watchdog_ = timeout;
}

void RankGroup::count_copy(std::int32_t rank) {
  ranks_.at(static_cast<std::size_t>(rank))->copies.fetch_add(1, std::memory_order_relaxed);
}

std::uint64_t RankGroup::copies(std::int32_t rank) const {
  return ranks_.at(static_cast<std::size_t>(rank))->copies.load(std::memory_order_relaxed);
}

std::uint64_t RankGroup::messages_delivered() const {
  return delivered_.load(std::memory_order_relaxed);
}

// --------------------------------------------------------------- SimBackend

SimBackend::SimBackend(std::shared_ptr<RankGroup> group, std::int32_t rank)
    : group_(std::move(group)), rank_(rank) {
  if (rank_ < 0 || rank_ >= group_->size()) throw BackendError("rank outside group");
  auto world = std::make_unique<Comm>();
  world->epoch = kWorldEpoch;
  world->my_rank = rank_;
  for (std::int32_t r = 0; r < group_->size(); ++r) world->members.push_back(r);
  world_ = world.get();
  adopt(std::move(world));

  auto self = std::make_unique<Comm>();
  self->epoch = kSelfEpoch;
  self->members = {rank_};
  self_ = self.get();
  adopt(std::move(self));
}

SimBackend::~SimBackend() { cancel_pending(); }

void SimBackend::cancel_pending() {
  for (auto& [ptr, request] : requests_) {
    if (!request->is_send) group_->cancel(request->posted);
  }
  requests_.clear();
}

void SimBackend::init() {}
void SimBackend::finalize() {}

HostComm SimBackend::adopt(std::unique_ptr<Comm> comm) {
  Comm* raw = comm.get();
  comms_.emplace(raw, std::move(comm));
  return HostComm{reinterpret_cast<std::intptr_t>(raw)};
}

SimBackend::Comm& SimBackend::comm_of(HostComm handle) {
  auto it = comms_.find(reinterpret_cast<Comm*>(handle.value));
  if (it == comms_.end()) throw BackendError("sim backend received an unknown communicator");
  return *it->second;
}

HostComm SimBackend::world_comm() { return HostComm{reinterpret_cast<std::intptr_t>(world_)}; }
HostComm SimBackend::self_comm() { return HostComm{reinterpret_cast<std::intptr_t>(self_)}; }

HostDatatype SimBackend::datatype(abi::Datatype type) {
  return HostDatatype{static_cast<std::intptr_t>(type)};
}

HostOp SimBackend::op(abi::Op op) { return HostOp{static_cast<std::intptr_t>(op)}; }

std::int32_t SimBackend::comm_rank(HostComm comm) { return comm_of(comm).my_rank; }

std::int32_t SimBackend::comm_size(HostComm comm) {
  return static_cast<std::int32_t>(comm_of(comm).members.size());
}

std::optional<HostComm> SimBackend::comm_split(HostComm handle, std::int32_t color,
                                               std::int32_t key) {
  Comm& parent = comm_of(handle);
  const auto n = parent.members.size();
  std::vector<std::int32_t> mine = {color, key};
  std::vector<std::int32_t> all(2 * n);
  allgather(std::as_bytes(std::span(mine)), 2, datatype(abi::Datatype::int_),
            std::as_writable_bytes(std::span(all)), 2, datatype(abi::Datatype::int_), handle);

  const std::int32_t sequence = parent.derived++;
  if (color == abi::kUndefined) return std::nullopt;

  struct Entry {
    std::int32_t key;
    std::int32_t parent_rank;
  };
  std::vector<Entry> same;
  for (std::size_t r = 0; r < n; ++r) {
    if (all[2 * r] == color) same.push_back({all[2 * r + 1], static_cast<std::int32_t>(r)});
  }
  std::stable_sort(same.begin(), same.end(), [](const Entry& a, const Entry& b) {
    return a.key != b.key ? a.key < b.key : a.parent_rank < b.parent_rank;
  });

  auto comm = std::make_unique<Comm>();
  comm->epoch = group_->derive_epoch(parent.epoch, sequence, color);
  for (std::size_t i = 0; i < same.size(); ++i) {
    comm->members.push_back(parent.members[static_cast<std::size_t>(same[i].parent_rank)]);
    if (same[i].parent_rank == parent.my_rank) comm->my_rank = static_cast<std::int32_t>(i);
  }
  return adopt(std::move(comm));
}

HostComm SimBackend::comm_dup(HostComm handle) {
  Comm& parent = comm_of(handle);
  auto comm = std::make_unique<Comm>();
  comm->epoch = group_->derive_epoch(parent.epoch, parent.derived++, kDupColor);
  comm->members = parent.members;
  comm->my_rank = parent.my_rank;
  return adopt(std::move(comm));
}

void SimBackend::comm_free(HostComm handle) {
  Comm* raw = reinterpret_cast<Comm*>(handle.value);
  if (raw == world_ || raw == self_) throw BackendError("cannot free a predefined communicator");
  if (comms_.erase(raw) == 0) throw BackendError("sim backend received an unknown communicator");
}

void SimBackend::p2p_send(const Comm& comm, std::int32_t epoch, ConstBytes data,
                          std::int32_t dest, std::int32_t tag) {
  Envelope envelope;
  envelope.src = comm.my_rank;
  envelope.dst = comm.members.at(static_cast<std::size_t>(dest));
  envelope.tag = tag;
  envelope.comm_epoch = epoch;
  envelope.payload.assign(data.begin(), data.end());
  group_->count_copy(rank_);
  group_->deliver(std::move(envelope));
}

RecvInfo SimBackend::p2p_recv(const Comm& comm, std::int32_t epoch, MutBytes dest,
                              std::int32_t source, std::int32_t tag, const char* what) {
  PostedRecv recv;
  recv.owner = rank_;
  recv.source = source;
  recv.tag = tag;
  recv.comm_epoch = epoch;
  recv.dest = dest;
  std::ostringstream desc;
  desc << what << "(source=" << source << ", tag=" << tag << ", comm_epoch=" << epoch
       << ", comm_rank=" << comm.my_rank << ")";
  recv.description = desc.str();
  group_->post(recv);
  group_->wait(recv);
  return recv.info;
}

void SimBackend::coll_send(const Comm& comm, ConstBytes data, std::int32_t dest) {
  p2p_send(comm, comm.epoch + 1, data, dest, 0);
}

void SimBackend::coll_recv_exact(const Comm& comm, MutBytes dest, std::int32_t source,
                                 const char* what) {
  RecvInfo info = p2p_recv(comm, comm.epoch + 1, dest, source, 0, what);
  if (info.truncated || info.count_bytes != dest.size()) {
    throw BackendError(std::string(what) + ": collective message size mismatch between ranks");
  }
}

void SimBackend::send(ConstBytes buf, std::int32_t, HostDatatype, std::int32_t dest,
                      std::int32_t tag, HostComm comm) {
  Comm& c = comm_of(comm);
  p2p_send(c, c.epoch, buf, dest, tag);
}

RecvInfo SimBackend::recv(MutBytes buf, std::int32_t, HostDatatype, std::int32_t source,
                          std::int32_t tag, HostComm comm) {
  Comm& c = comm_of(comm);
  return p2p_recv(c, c.epoch, buf, source, tag, "MPI_Recv");
}

HostRequest SimBackend::isend(ConstBytes buf, std::int32_t count, HostDatatype type,
                              std::int32_t dest, std::int32_t tag, HostComm comm) {
  send(buf, count, type, dest, tag, comm);
  auto request = std::make_unique<Request>();
  request->is_send = true;
  Request* raw = request.get();
  requests_.emplace(raw, std::move(request));
  return HostRequest{reinterpret_cast<std::intptr_t>(raw)};
}

HostRequest SimBackend::irecv(MutBytes buf, std::int32_t, HostDatatype, std::int32_t source,
                              std::int32_t tag, HostComm comm) {
  Comm& c = comm_of(comm);
  auto request = std::make_unique<Request>();
  PostedRecv& recv = request->posted;
  recv.owner = rank_;
  recv.source = source;
  recv.tag = tag;
  recv.comm_epoch = c.epoch;
  recv.dest = buf;
  std::ostringstream desc;
  desc << "MPI_Wait on MPI_Irecv(source=" << source << ", tag=" << tag
       << ", comm_epoch=" << c.epoch << ")";
  recv.description = desc.str();
  Request* raw = request.get();
  requests_.emplace(raw, std::move(request));
  group_->post(recv);
  return HostRequest{reinterpret_cast<std::intptr_t>(raw)};
}

RecvInfo SimBackend::wait(HostRequest handle) {
  auto it = requests_.find(reinterpret_cast<Request*>(handle.value));
  if (it == requests_.end()) throw BackendError("sim backend received an unknown request");
  Request& request = *it->second;
  RecvInfo info;
  if (!request.is_send) {
    group_->wait(request.posted);
    info = request.posted.info;
  }
  requests_.erase(it);
  return info;
}

RecvInfo SimBackend::sendrecv(ConstBytes send_buf, std::int32_t, HostDatatype, std::int32_t dest,
                              std::int32_t send_tag, MutBytes recv_buf, std::int32_t,
                              HostDatatype, std::int32_t source, std::int32_t recv_tag,
                              HostComm comm) {
  Comm& c = comm_of(comm);
  p2p_send(c, c.epoch, send_buf, dest, send_tag);
  return p2p_recv(c, c.epoch, recv_buf, source, recv_tag, "MPI_Sendrecv");
}

void SimBackend::barrier(HostComm comm) {
  Comm& c = comm_of(comm);
  const auto n = static_cast<std::int32_t>(c.members.size());
  if (n == 1) return;
  if (c.my_rank == 0) {
    for (std::int32_t r = 1; r < n; ++r) coll_recv_exact(c, {}, r, "MPI_Barrier");
    for (std::int32_t r = 1; r < n; ++r) coll_send(c, {}, r);
  } else {
    coll_send(c, {}, 0);
    coll_recv_exact(c, {}, 0, "MPI_Barrier");
  }
}

void SimBackend::bcast(MutBytes buf, std::int32_t, HostDatatype, std::int32_t root,
                       HostComm comm) {
  Comm& c = comm_of(comm);
  const auto n = static_cast<std::int32_t>(c.members.size());
  if (c.my_rank == root) {
    for (std::int32_t r = 0; r < n; ++r) {
      if (r != root) coll_send(c, buf, r);
    }
  } else {
    coll_recv_exact(c, buf, root, "MPI_Bcast");
  }
}

void SimBackend::reduce(ConstBytes send_buf, MutBytes recv_buf, std::int32_t count,
                        HostDatatype type, HostOp op, std::int32_t root, HostComm comm) {
  Comm& c = comm_of(comm);
  if (c.my_rank != root) {
    coll_send(c, send_buf, root);
    return;
  }
  const auto n = static_cast<std::int32_t>(c.members.size());
  const auto dt = static_cast<abi::Datatype>(type.value);
  const auto reduction = static_cast<abi::Op>(op.value);
  std::vector<std::byte> acc(send_buf.size());
  std::vector<std::byte> incoming(send_buf.size());
  for (std::int32_t r = 0; r < n; ++r) {
    ConstBytes contribution = send_buf;
    if (r != c.my_rank) {
      coll_recv_exact(c, incoming, r, "MPI_Reduce");
      contribution = incoming;
    }
    if (r == 0) {
      std::copy(contribution.begin(), contribution.end(), acc.begin());
    } else {
      reduce_into(acc, contribution, count, dt, reduction);
    }
  }
  std::copy(acc.begin(), acc.end(), recv_buf.begin());
}

void SimBackend::allreduce(ConstBytes send_buf, MutBytes recv_buf, std::int32_t count,
                           HostDatatype type, HostOp op, HostComm comm) {
  reduce(send_buf, recv_buf, count, type, op, 0, comm);
  bcast(recv_buf.first(send_buf.size()), count, type, 0, comm);
}

void SimBackend::gather(ConstBytes send_buf, std::int32_t, HostDatatype, MutBytes recv_buf,
                        std::int32_t recv_count, HostDatatype recv_type, std::int32_t root,
                        HostComm comm) {
  Comm& c = comm_of(comm);
  if (c.my_rank != root) {
    coll_send(c, send_buf, root);
    return;
  }
  const std::size_t block = static_cast<std::size_t>(recv_count) * width_of(recv_type);
  if (send_buf.size() != block) throw BackendError("MPI_Gather: send and receive block differ");
  const auto n = static_cast<std::int32_t>(c.members.size());
  for (std::int32_t r = 0; r < n; ++r) {
    MutBytes slot = recv_buf.subspan(static_cast<std::size_t>(r) * block, block);
    if (r == c.my_rank) {
      std::copy(send_buf.begin(), send_buf.end(), slot.begin());
    } else {
      coll_recv_exact(c, slot, r, "MPI_Gather");
    }
  }
}

void SimBackend::allgather(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                           MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                           HostComm comm) {
  gather(send_buf, send_count, send_type, recv_buf, recv_count, recv_type, 0, comm);
  const std::size_t total = static_cast<std::size_t>(recv_count) * width_of(recv_type) *
                            comm_of(comm).members.size();
  bcast(recv_buf.first(total), 0, recv_type, 0, comm);
}

void SimBackend::scatter(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                         MutBytes recv_buf, std::int32_t, HostDatatype, std::int32_t root,
                         HostComm comm) {
  Comm& c = comm_of(comm);
  if (c.my_rank != root) {
    coll_recv_exact(c, recv_buf, root, "MPI_Scatter");
    return;
  }
  const std::size_t block = static_cast<std::size_t>(send_count) * width_of(send_type);
  if (recv_buf.size() != block) throw BackendError("MPI_Scatter: send and receive block differ");
  const auto n = static_cast<std::int32_t>(c.members.size());
  for (std::int32_t r = 0; r < n; ++r) {
    ConstBytes slot = send_buf.subspan(static_cast<std::size_t>(r) * block, block);
    if (r == c.my_rank) {
      std::copy(slot.begin(), slot.end(), recv_buf.begin());
    } else {
      coll_send(c, slot, r);
    }
  }
}

void SimBackend::alltoall(ConstBytes send_buf, std::int32_t send_count, HostDatatype send_type,
                          MutBytes recv_buf, std::int32_t recv_count, HostDatatype recv_type,
                          HostComm comm) {
  Comm& c = comm_of(comm);
  const std::size_t send_block = static_cast<std::size_t>(send_count) * width_of(send_type);
  const std::size_t recv_block = static_cast<std::size_t>(recv_count) * width_of(recv_type);
  if (send_block != recv_block) throw BackendError("MPI_Alltoall: send and receive block differ");
  const auto n = static_cast<std::int32_t>(c.members.size());
  for (std::int32_t j = 0; j < n; ++j) {
    ConstBytes out = send_buf.subspan(static_cast<std::size_t>(j) * send_block, send_block);
    if (j == c.my_rank) {
      std::copy(out.begin(), out.end(),
                recv_buf.begin() + static_cast<std::ptrdiff_t>(j * recv_block));
    } else {
      coll_send(c, out, j);
    }
  }
  for (std::int32_t j = 0; j < n; ++j) {
    if (j == c.my_rank) continue;
    coll_recv_exact(c, recv_buf.subspan(static_cast<std::size_t>(j) * recv_block, recv_block),
                    j, "MPI_Alltoall");
  }
}

void SimBackend::abort(HostComm, std::int32_t code) {
  const std::string reason =
      "MPI_Abort called by rank " + std::to_string(rank_) + " with code " + std::to_string(code);
  group_->abort(code, reason);
  throw GroupAborted(group_->abort_code(), group_->abort_reason());
}

}  // namespace mpiwasm::transport
