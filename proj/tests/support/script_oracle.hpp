#pragma once

// Random MPI scripts for the script_vm guest and a sequential reference
// interpreter for them. The interpreter shares no code with the embedder: it
// keeps its own message queues, matching rules and reduction arithmetic.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace script {

enum Opcode : std::int32_t {
  END = 0, SEND, RECV, ISEND, IRECV, WAIT, SENDRECV, BCAST, REDUCE, ALLREDUCE,
  GATHER, SCATTER, ALLGATHER, ALLTOALL, BARRIER, LOCAL,
};

inline constexpr std::uint32_t kProgramAt = 1024;
inline constexpr std::uint32_t kRcAt = 9216;
inline constexpr std::uint32_t kStatusAt = 10240;
inline constexpr std::uint32_t kRequestAt = 14336;
inline constexpr std::uint32_t kBufferAt = 16384;
inline constexpr std::uint32_t kImageSize = kBufferAt + 8 * 256;
inline constexpr int kMaxInstructions = 255;
inline constexpr int kBuffers = 8;
inline constexpr int kElems = 64;
inline constexpr int kSlots = 16;
inline constexpr std::int32_t kAny = -1;

using Instr = std::array<std::int32_t, 8>;

struct Script {
  std::int32_t ranks = 1;
  std::uint64_t seed = 0;
  std::vector<std::vector<Instr>> programs;
};

/// Initial contents of buffer `k` element `i` on `rank`.
inline std::int32_t initial_value(std::uint64_t seed, std::int32_t rank, int k, int i) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(rank) * 1000003u +
                    static_cast<std::uint64_t>(k) * 4099u + static_cast<std::uint64_t>(i);
  x ^= x >> 31;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 29;
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(x));
}

/// The guest memory a rank starts with: its program and initialized buffers.
inline std::vector<std::uint8_t> initial_image(const Script& s, std::int32_t rank) {
  std::vector<std::uint8_t> img(kImageSize, 0);
  const auto& prog = s.programs.at(static_cast<std::size_t>(rank));
  std::memcpy(img.data() + kProgramAt, prog.data(), prog.size() * sizeof(Instr));
  for (int k = 0; k < kBuffers; ++k) {
    for (int i = 0; i < kElems; ++i) {
      const std::int32_t v = initial_value(s.seed, rank, k, i);
      std::memcpy(img.data() + kBufferAt + k * 256 + i * 4, &v, 4);
    }
  }
  return img;
}

/// Byte ranges compared between the guest and the reference: return codes,
/// statuses and buffers. Request slots hold handle codes and are skipped.
inline bool compared(std::uint32_t offset) {
  return (offset >= kRcAt && offset < kRequestAt) || (offset >= kBufferAt && offset < kImageSize);
}

// ---------------------------------------------------------------- generator

class Generator {
 public:
  Generator(std::uint64_t seed, std::int32_t ranks) : rng_(seed), n_(ranks) {
    script_.ranks = ranks;
    script_.seed = seed;
    script_.programs.resize(static_cast<std::size_t>(ranks));
    state_.resize(static_cast<std::size_t>(ranks));
  }

  Script make(int events) {
    for (int e = 0; e < events && room(8); ++e) event();
    for (std::int32_t r = 0; r < n_; ++r) {
      while (!st(r).pending.empty()) emit_wait(r, 0);
    }
    return script_;
  }

 private:
  struct Pending {
    int slot;
    int buf;
    bool recv;
  };
  struct RankState {
    std::array<bool, kBuffers> locked{};
    std::array<bool, kSlots> slot_used{};
    std::vector<Pending> pending;
  };

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  RankState& st(std::int32_t r) { return state_[static_cast<std::size_t>(r)]; }
  void push(std::int32_t r, Instr in) { script_.programs[static_cast<std::size_t>(r)].push_back(in); }

  bool room(std::size_t need) const {
    for (const auto& p : script_.programs) {
      if (p.size() + need + kSlots >= static_cast<std::size_t>(kMaxInstructions)) return false;
    }
    return true;
  }

  int free_buf(std::int32_t r, int avoid = -1) {
    std::vector<int> c;
    for (int k = 0; k < kBuffers; ++k) {
      if (!st(r).locked[static_cast<std::size_t>(k)] && k != avoid) c.push_back(k);
    }
    return c.at(static_cast<std::size_t>(uniform(0, static_cast<int>(c.size()) - 1)));
  }

  std::optional<int> free_slot(std::int32_t r) {
    if (st(r).pending.size() >= 4) return std::nullopt;
    for (int s = 0; s < kSlots; ++s) {
      if (!st(r).slot_used[static_cast<std::size_t>(s)]) return s;
    }
    return std::nullopt;
  }

  void emit_wait(std::int32_t r, std::size_t which) {
    auto& p = st(r).pending;
    const Pending w = p.at(which);
    p.erase(p.begin() + static_cast<std::ptrdiff_t>(which));
    push(r, {WAIT, w.slot, w.recv ? 1 : 0, 0, 0, 0, 0, 0});
    st(r).locked[static_cast<std::size_t>(w.buf)] = false;
    st(r).slot_used[static_cast<std::size_t>(w.slot)] = false;
  }

  void event() {
    const int pick = uniform(0, 99);
    if (n_ >= 2 && pick < 35) return p2p();
    if (pick < 45) return wait_some();
    if (n_ >= 2 && pick < 52) return pair_exchange();
    if (pick < 56) return ring();
    if (pick < 82) return collective();
    if (pick < 85) {
      for (std::int32_t r = 0; r < n_; ++r) push(r, {BARRIER, 0, 0, 0, 0, 0, 0, 0});
      return;
    }
    const std::int32_t r = uniform(0, n_ - 1);
    push(r, {LOCAL, free_buf(r), uniform(-3, 3), uniform(-1000, 1000), 0, 0, 0, 0});
  }

  void wait_some() {
    const std::int32_t r = uniform(0, n_ - 1);
    if (st(r).pending.empty()) return;
    emit_wait(r, static_cast<std::size_t>(uniform(0, static_cast<int>(st(r).pending.size()) - 1)));
  }

  void p2p() {
    const std::int32_t s = uniform(0, n_ - 1);
    std::int32_t r = uniform(0, n_ - 2);
    if (r >= s) ++r;
    const std::int32_t dtype = chance(0.5) ? 2 : 0;
    const int scount = chance(0.1) ? 0 : uniform(1, kElems);
    const int rcount = chance(0.2) ? uniform(0, kElems) : uniform(scount, kElems);
    std::int32_t tag = uniform(0, 3);
    std::int32_t match_src = s;
    std::int32_t match_tag = tag;
    const int style = uniform(0, 9);
    if (style < 2) {
      tag = next_unique_tag_++;  // the only message with this tag, so any source is safe
      match_src = kAny;
      match_tag = tag;
    } else if (style < 4) {
      match_tag = kAny;  // per-channel order fixes the match
    }

    const int sbuf = free_buf(s);
    if (auto slot = free_slot(s); slot && chance(0.4)) {
      push(s, {ISEND, sbuf, scount, dtype, r, tag, *slot, 0});
      st(s).slot_used[static_cast<std::size_t>(*slot)] = true;
      st(s).locked[static_cast<std::size_t>(sbuf)] = true;
      st(s).pending.push_back({*slot, sbuf, false});
    } else {
      push(s, {SEND, sbuf, scount, dtype, r, tag, 0, 0});
    }

    const int rbuf = free_buf(r);
    if (auto slot = free_slot(r); slot && chance(0.4)) {
      push(r, {IRECV, rbuf, rcount, dtype, match_src, match_tag, *slot, 0});
      st(r).slot_used[static_cast<std::size_t>(*slot)] = true;
      st(r).locked[static_cast<std::size_t>(rbuf)] = true;
      st(r).pending.push_back({*slot, rbuf, true});
    } else {
      push(r, {RECV, rbuf, rcount, dtype, match_src, match_tag, 0, 0});
    }
  }

  void pair_exchange() {
    const std::int32_t a = uniform(0, n_ - 1);
    std::int32_t b = uniform(0, n_ - 2);
    if (b >= a) ++b;
    const bool any_source = chance(0.3);
    const std::int32_t ta = any_source ? next_unique_tag_++ : uniform(0, 3);
    const std::int32_t tb = uniform(0, 3);
    const int sa = free_buf(a), ra = free_buf(a, sa);
    const int sb = free_buf(b), rb = free_buf(b, sb);
    push(a, {SENDRECV, sa, uniform(0, kElems), b, ta, ra, b, tb});
    push(b, {SENDRECV, sb, uniform(0, kElems), a, tb, rb, any_source ? kAny : a, ta});
  }

  void ring() {
    const std::int32_t tag = uniform(0, 3);
    const int count = uniform(0, kElems);
    for (std::int32_t r = 0; r < n_; ++r) {
      const int sb = free_buf(r), rb = free_buf(r, sb);
      push(r, {SENDRECV, sb, count, (r + 1) % n_, tag, rb, (r + n_ - 1) % n_, tag});
    }
  }

  void collective() {
    const int kind = uniform(0, 6);
    const std::int32_t root = uniform(0, n_ - 1);
    const std::int32_t op = uniform(0, 7);
    const int full = uniform(0, kElems);
    const int block = uniform(0, kElems / n_);
    for (std::int32_t r = 0; r < n_; ++r) {
      const int sb = free_buf(r), rb = free_buf(r, sb);
      switch (kind) {
        case 0: push(r, {BCAST, sb, full, root, 0, 0, 0, 0}); break;
        case 1: push(r, {REDUCE, sb, rb, full, op, root, 0, 0}); break;
        case 2: push(r, {ALLREDUCE, sb, rb, full, op, 0, 0, 0}); break;
        case 3: push(r, {GATHER, sb, rb, block, root, 0, 0, 0}); break;
        case 4: push(r, {SCATTER, sb, rb, block, root, 0, 0, 0}); break;
        case 5: push(r, {ALLGATHER, sb, rb, block, 0, 0, 0, 0}); break;
        default: push(r, {ALLTOALL, sb, rb, block, 0, 0, 0, 0}); break;
      }
    }
  }

  std::mt19937_64 rng_;
  std::int32_t n_;
  Script script_;
  std::vector<RankState> state_;
  std::int32_t next_unique_tag_ = 100;
};

inline Script generate(std::uint64_t seed, std::int32_t ranks, int events) {
  return Generator(seed, ranks).make(events);
}

// ---------------------------------------------------------------- reference

class Reference {
 public:
  explicit Reference(const Script& s) : s_(s), n_(s.ranks) {
    for (std::int32_t r = 0; r < n_; ++r) {
      ranks_.push_back(Rank{initial_image(s, r)});
    }
  }

  /// Runs every rank to its END. Throws when the script cannot make progress.
  std::vector<std::vector<std::uint8_t>> run() {
    for (;;) {
      bool progress = false;
      bool all_done = true;
      for (std::int32_t r = 0; r < n_; ++r) {
        while (step(r)) progress = true;
        if (!done(r)) all_done = false;
      }
      if (all_done) break;
      if (try_collective()) continue;
      if (!progress) throw std::runtime_error("reference: script deadlocks");
    }
    std::vector<std::vector<std::uint8_t>> out;
    for (auto& rk : ranks_) out.push_back(rk.mem);
    return out;
  }

 private:
  struct Message {
    std::int32_t src;
    std::int32_t tag;
    std::vector<std::uint8_t> payload;
  };
  struct Posted {
    std::int32_t src;
    std::int32_t tag;
    std::uint32_t addr;
    std::uint32_t cap;
    bool complete = false;
    std::int32_t got_src = 0, got_tag = 0;
    std::uint32_t got_bytes = 0;
    bool truncated = false;
  };
  struct Rank {
    std::vector<std::uint8_t> mem;
    int pc = 0;
    std::deque<Message> unexpected;
    std::deque<Posted*> posted;            // in posting order
    std::vector<std::unique_ptr<Posted>> slots = std::vector<std::unique_ptr<Posted>>(kSlots);
    std::vector<bool> slot_is_send = std::vector<bool>(kSlots, false);
    std::unique_ptr<Posted> blocking;     // the receive of RECV / SENDRECV in progress
    bool sent_half = false;                // SENDRECV already sent its half
  };

  static std::uint32_t width(std::int32_t dtype) { return dtype == 0 ? 1 : 4; }
  static std::uint32_t buf(std::int32_t k) { return kBufferAt + static_cast<std::uint32_t>(k) * 256; }

  const Instr& cur(std::int32_t r) {
    const auto& prog = s_.programs[static_cast<std::size_t>(r)];
    static const Instr end{};
    const auto pc = static_cast<std::size_t>(ranks_[static_cast<std::size_t>(r)].pc);
    return pc < prog.size() ? prog[pc] : end;
  }
  bool done(std::int32_t r) { return cur(r)[0] == END; }
  Rank& rk(std::int32_t r) { return ranks_[static_cast<std::size_t>(r)]; }

  std::int32_t get(std::int32_t r, std::uint32_t at) {
    std::int32_t v;
    std::memcpy(&v, rk(r).mem.data() + at, 4);
    return v;
  }
  void put(std::int32_t r, std::uint32_t at, std::int32_t v) { std::memcpy(rk(r).mem.data() + at, &v, 4); }

  void finish(std::int32_t r, std::int32_t rc) {
    put(r, kRcAt + 4 * static_cast<std::uint32_t>(rk(r).pc), rc);
    ++rk(r).pc;
  }
  void write_status(std::int32_t r, const Posted& p) {
    const std::uint32_t at = kStatusAt + 16 * static_cast<std::uint32_t>(rk(r).pc);
    put(r, at, p.got_src);
    put(r, at + 4, p.got_tag);
    put(r, at + 8, p.truncated ? 15 : 0);
    put(r, at + 12, static_cast<std::int32_t>(p.got_bytes));
  }

  static bool matches(const Posted& p, const Message& m) {
    return (p.src == kAny || p.src == m.src) && (p.tag == kAny || p.tag == m.tag);
  }

  void fill(std::int32_t dst, Posted& p, const Message& m) {
    const auto n = std::min<std::size_t>(m.payload.size(), p.cap);
    std::memcpy(rk(dst).mem.data() + p.addr, m.payload.data(), n);
    p.complete = true;
    p.got_src = m.src;
    p.got_tag = m.tag;
    p.got_bytes = static_cast<std::uint32_t>(n);
    p.truncated = m.payload.size() > p.cap;
  }

  void send(std::int32_t src, std::int32_t dst, std::int32_t tag, std::uint32_t addr, std::uint32_t len) {
    Message m{src, tag, {rk(src).mem.begin() + addr, rk(src).mem.begin() + addr + len}};
    auto& q = rk(dst).posted;
    for (auto it = q.begin(); it != q.end(); ++it) {
      if (matches(**it, m)) {
        Posted* p = *it;
        q.erase(it);
        fill(dst, *p, m);
        return;
      }
    }
    rk(dst).unexpected.push_back(std::move(m));
  }

  void post(std::int32_t r, Posted* p) {
    auto& q = rk(r).unexpected;
    for (auto it = q.begin(); it != q.end(); ++it) {
      if (matches(*p, *it)) {
        fill(r, *p, *it);
        q.erase(it);
        return;
      }
    }
    rk(r).posted.push_back(p);
  }

  // Advances rank r by one instruction if it can proceed on its own.
  bool step(std::int32_t r) {
    const Instr in = cur(r);
    Rank& me = rk(r);
    switch (in[0]) {
      case END:
        return false;
      case SEND:
        send(r, in[4], in[5], buf(in[1]), static_cast<std::uint32_t>(in[2]) * width(in[3]));
        finish(r, 0);
        return true;
      case ISEND:
        send(r, in[4], in[5], buf(in[1]), static_cast<std::uint32_t>(in[2]) * width(in[3]));
        me.slots[static_cast<std::size_t>(in[6])] = std::make_unique<Posted>();
        me.slots[static_cast<std::size_t>(in[6])]->complete = true;
        me.slot_is_send[static_cast<std::size_t>(in[6])] = true;
        finish(r, 0);
        return true;
      case IRECV: {
        auto p = std::make_unique<Posted>(Posted{in[4], in[5], buf(in[1]),
                                                 static_cast<std::uint32_t>(in[2]) * width(in[3])});
        post(r, p.get());
        me.slots[static_cast<std::size_t>(in[6])] = std::move(p);
        me.slot_is_send[static_cast<std::size_t>(in[6])] = false;
        finish(r, 0);
        return true;
      }
      case WAIT: {
        auto& p = me.slots[static_cast<std::size_t>(in[1])];
        if (!p->complete) return false;
        std::int32_t rc = 0;
        if (!me.slot_is_send[static_cast<std::size_t>(in[1])]) {
          if (in[2] != 0) write_status(r, *p);
          rc = p->truncated ? 15 : 0;
        }
        p.reset();
        finish(r, rc);
        return true;
      }
      case RECV:
        return blocking_recv(r, in[4], in[5], buf(in[1]),
                             static_cast<std::uint32_t>(in[2]) * width(in[3]));
      case SENDRECV:
        if (!me.sent_half) {
          send(r, in[3], in[4], buf(in[1]), static_cast<std::uint32_t>(in[2]) * 4);
          me.sent_half = true;
        }
        if (!blocking_recv(r, in[6], in[7], buf(in[5]), static_cast<std::uint32_t>(in[2]) * 4)) {
          return false;
        }
        me.sent_half = false;
        return true;
      case LOCAL:
        for (std::uint32_t i = 0; i < kElems; ++i) {
          const std::uint32_t at = buf(in[1]) + 4 * i;
          const auto v = static_cast<std::uint32_t>(get(r, at)) * static_cast<std::uint32_t>(in[2]) +
                         static_cast<std::uint32_t>(in[3]) + i;
          put(r, at, static_cast<std::int32_t>(v));
        }
        finish(r, 0);
        return true;
      default:
        return false;  // collective: waits for everyone
    }
  }

  bool blocking_recv(std::int32_t r, std::int32_t src, std::int32_t tag, std::uint32_t addr,
                     std::uint32_t cap) {
    Rank& me = rk(r);
    if (!me.blocking) {
      me.blocking = std::make_unique<Posted>(Posted{src, tag, addr, cap});
      post(r, me.blocking.get());
    }
    if (!me.blocking->complete) return false;
    write_status(r, *me.blocking);
    const std::int32_t rc = me.blocking->truncated ? 15 : 0;
    me.blocking.reset();
    finish(r, rc);
    return true;
  }

  static std::int32_t combine(std::int32_t op, std::int32_t a, std::int32_t b) {
    const auto ua = static_cast<std::uint32_t>(a), ub = static_cast<std::uint32_t>(b);
    switch (op) {
      case 0: return static_cast<std::int32_t>(ua + ub);
      case 1: return std::max(a, b);
      case 2: return std::min(a, b);
      case 3: return static_cast<std::int32_t>(ua * ub);
      case 4: return (a != 0 && b != 0) ? 1 : 0;
      case 5: return (a != 0 || b != 0) ? 1 : 0;
      case 6: return a & b;
      default: return a | b;
    }
  }

  bool try_collective() {
    const std::int32_t kind = cur(0)[0];
    if (kind < BCAST || kind > BARRIER) return false;
    for (std::int32_t r = 0; r < n_; ++r) {
      if (cur(r)[0] != kind) return false;
    }
    std::vector<Instr> in;
    for (std::int32_t r = 0; r < n_; ++r) in.push_back(cur(r));
    // Inputs are read from a snapshot so a rank's output never feeds another's input.
    std::vector<std::vector<std::uint8_t>> before;
    for (auto& x : ranks_) before.push_back(x.mem);
    auto src = [&](std::int32_t r, std::uint32_t at) {
      std::int32_t v;
      std::memcpy(&v, before[static_cast<std::size_t>(r)].data() + at, 4);
      return v;
    };

    switch (kind) {
      case BCAST: {
        const std::int32_t root = in[0][3];
        for (std::int32_t r = 0; r < n_; ++r) {
          for (std::int32_t i = 0; i < in[0][2]; ++i) {
            put(r, buf(in[static_cast<std::size_t>(r)][1]) + 4 * static_cast<std::uint32_t>(i),
                src(root, buf(in[static_cast<std::size_t>(root)][1]) + 4 * static_cast<std::uint32_t>(i)));
          }
        }
        break;
      }
      case REDUCE:
      case ALLREDUCE: {
        const std::int32_t count = in[0][3];
        const std::int32_t op = in[0][4];
        std::vector<std::int32_t> acc(static_cast<std::size_t>(count));
        for (std::int32_t i = 0; i < count; ++i) {
          std::int32_t v = src(0, buf(in[0][1]) + 4 * static_cast<std::uint32_t>(i));
          for (std::int32_t r = 1; r < n_; ++r) {
            v = combine(op, v, src(r, buf(in[static_cast<std::size_t>(r)][1]) + 4 * static_cast<std::uint32_t>(i)));
          }
          acc[static_cast<std::size_t>(i)] = v;
        }
        for (std::int32_t r = 0; r < n_; ++r) {
          if (kind == REDUCE && r != in[0][5]) continue;
          for (std::int32_t i = 0; i < count; ++i) {
            put(r, buf(in[static_cast<std::size_t>(r)][2]) + 4 * static_cast<std::uint32_t>(i),
                acc[static_cast<std::size_t>(i)]);
          }
        }
        break;
      }
      case GATHER:
      case ALLGATHER: {
        const std::int32_t count = in[0][3];
        for (std::int32_t r = 0; r < n_; ++r) {
          if (kind == GATHER && r != in[0][4]) continue;
          for (std::int32_t j = 0; j < n_; ++j) {
            for (std::int32_t i = 0; i < count; ++i) {
              put(r, buf(in[static_cast<std::size_t>(r)][2]) + 4 * static_cast<std::uint32_t>(j * count + i),
                  src(j, buf(in[static_cast<std::size_t>(j)][1]) + 4 * static_cast<std::uint32_t>(i)));
            }
          }
        }
        break;
      }
      case SCATTER: {
        const std::int32_t count = in[0][3];
        const std::int32_t root = in[0][4];
        for (std::int32_t r = 0; r < n_; ++r) {
          for (std::int32_t i = 0; i < count; ++i) {
            put(r, buf(in[static_cast<std::size_t>(r)][2]) + 4 * static_cast<std::uint32_t>(i),
                src(root, buf(in[static_cast<std::size_t>(root)][1]) + 4 * static_cast<std::uint32_t>(r * count + i)));
          }
        }
        break;
      }
      case ALLTOALL: {
        const std::int32_t count = in[0][3];
        for (std::int32_t r = 0; r < n_; ++r) {
          for (std::int32_t j = 0; j < n_; ++j) {
            for (std::int32_t i = 0; i < count; ++i) {
              put(r, buf(in[static_cast<std::size_t>(r)][2]) + 4 * static_cast<std::uint32_t>(j * count + i),
                  src(j, buf(in[static_cast<std::size_t>(j)][1]) + 4 * static_cast<std::uint32_t>(r * count + i)));
            }
          }
        }
        break;
      }
      default:
        break;  // barrier
    }
    for (std::int32_t r = 0; r < n_; ++r) finish(r, 0);
    return true;
  }

  const Script& s_;
  std::int32_t n_;
  std::vector<Rank> ranks_;
};

inline std::vector<std::vector<std::uint8_t>> reference_run(const Script& s) {
  return Reference(s).run();
}

}  // namespace script
