#include "mpiwasm/instance.hpp"

#include <spdlog/spdlog.h>

namespace mpiwasm {

namespace {

std::vector<std::pair<std::string, std::string>> split_env(const std::vector<std::string>& vars) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& kv : vars) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      out.emplace_back(kv, "");
    } else {
      out.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
  return out;
}

bool is_shipped(std::string_view name) {
  for (const auto& sig : shipped_hostcalls()) {
    if (sig.name == name) return true;
  }
  return false;
}

}  // namespace

const char* outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::exited:
      return "exited";
    case Outcome::trapped:
      return "trapped";
    case Outcome::aborted:
      return "aborted";
  }
  return "unknown";
}

Instance::Instance(Engine& engine, const ModuleArtifact& artifact, const InstanceConfig& cfg,
                   transport::Backend& backend)
    : engine_(engine),
      backend_(backend),
      ctx_{env_, backend, this},
      store_(engine.raw()),
      linker_(engine.raw()) {
  if (!artifact.module) throw InstantiationFailed("artifact holds no compiled module");
  env_.instrument = cfg.instrument;

  store_.context().set_data(this);
  store_.context().set_epoch_deadline(1);
  store_.epoch_deadline_callback(
      [this](wasmtime::Store::Context, std::uint64_t& delta) -> wasmtime::Result<wasmtime::DeadlineKind> {
        if (interrupted_.load()) return wasmtime::Error("interrupted: rank group aborted");
        delta = 1;
        return wasmtime::DeadlineKind::Continue;
      });

  wasmtime::WasiConfig wasi;
  wasi.argv(cfg.argv);
  wasi.env(split_env(cfg.env_vars));
  wasi.inherit_stdin();
  wasi.inherit_stderr();
  if (cfg.stdout_file) {
    if (!wasi.stdout_file(cfg.stdout_file->string())) {
      throw InstantiationFailed("cannot open stdout file " + cfg.stdout_file->string());
    }
  } else {
    wasi.inherit_stdout();
  }
  for (const auto& [path, rights] : cfg.preopens) {
    const Preopen& p = preopens_.map_preopen(path, rights);
    if (!wasi.preopen_dir(p.host_path.string(), p.guest_root(), rights == Rights::read_write)) {
      throw InstantiationFailed("cannot preopen " + p.host_path.string());
    }
  }
  if (auto ok = store_.context().set_wasi(std::move(wasi)); !ok) {
    throw InstantiationFailed("WASI setup failed: " + ok.err().message());
  }
  if (auto ok = linker_.define_wasi(); !ok) {
    throw InstantiationFailed("WASI link failed: " + ok.err().message());
  }

  bind_hostcalls();
  stub_unknown_imports(*artifact.module);

  auto inst = linker_.instantiate(store_, *artifact.module);
  if (!inst) throw InstantiationFailed("instantiation failed: " + inst.err().message());
  instance_ = inst.ok();

  auto get = [&](std::string_view name) { return instance_->get(store_, name); };
  if (auto mem = get("memory"); mem && std::holds_alternative<wasmtime::Memory>(*mem)) {
    memory_ = std::get<wasmtime::Memory>(*mem);
  } else {
    throw MissingExport("module does not export memory `memory`");
  }
  if (auto start = get("_start"); start && std::holds_alternative<wasmtime::Func>(*start)) {
    start_ = std::get<wasmtime::Func>(*start);
  } else {
    throw MissingExport("module does not export function `_start`");
  }
  if (auto f = get("malloc"); f && std::holds_alternative<wasmtime::Func>(*f)) {
    malloc_ = std::get<wasmtime::Func>(*f);
  }
  if (auto f = get("free"); f && std::holds_alternative<wasmtime::Func>(*f)) {
    free_ = std::get<wasmtime::Func>(*f);
  }
  refresh_memory();
}

Instance::~Instance() = default;

wasmtime::Store::Context Instance::cx() const {
  return active_cx_ ? *active_cx_ : wasmtime::Store::Context(store_);
}

LinearMemoryView Instance::current_memory() const {
  auto data = memory_->data(cx());
  return LinearMemoryView{reinterpret_cast<std::byte*>(data.data()), data.size()};
}

LinearMemoryView Instance::refresh_memory() {
  env_.memory = current_memory();
  return env_.memory;
}

std::span<std::byte> Instance::memory_bytes() {
  const auto view = refresh_memory();
  return {view.base, static_cast<std::size_t>(view.length)};
}

std::optional<std::uint32_t> Instance::exported_global_u32(std::string_view name) {
  auto ext = instance_->get(cx(), name);
  if (!ext || !std::holds_alternative<wasmtime::Global>(*ext)) return std::nullopt;
  auto value = std::get<wasmtime::Global>(*ext).get(cx());
  if (value.kind() != wasmtime::ValKind::I32) return std::nullopt;
  return static_cast<std::uint32_t>(value.i32());
}

bool Instance::has_exports() const { return malloc_.has_value() && free_.has_value(); }

std::uint32_t Instance::call_malloc(std::uint32_t size) {
  auto typed = malloc_->typed<std::uint32_t, std::uint32_t>(cx());
  if (!typed) {
    throw GuestAllocError(GuestAllocErrorKind::export_missing, "`malloc` has the wrong signature");
  }
  auto result = typed.ok().call(cx(), size);
  if (!result) throw GuestTrap("guest malloc trapped: " + result.err().message());
  return result.ok();
}

void Instance::call_free(std::uint32_t addr) {
  auto typed = free_->typed<std::uint32_t, std::monostate>(cx());
  if (!typed) {
    throw GuestAllocError(GuestAllocErrorKind::export_missing, "`free` has the wrong signature");
  }
  auto result = typed.ok().call(cx(), addr);
  if (!result) throw GuestTrap("guest free trapped: " + result.err().message());
}

void Instance::enter(wasmtime::Caller& caller) {
  active_cx_ = caller.context();
  refresh_memory();
}

template <class R, class... A>
void Instance::bind(std::string_view name, R (*fn)(HostcallContext&, A...)) {
  auto ok = linker_.func_wrap(
      "env", name,
      [this, fn, name](wasmtime::Caller caller, A... args) -> wasmtime::Result<R, wasmtime::Trap> {
        enter(caller);
        try {
          R r = fn(ctx_, args...);
          active_cx_.reset();
          return r;
        } catch (const transport::GroupAborted& e) {
          active_cx_.reset();
          abort_.emplace(e);
          return wasmtime::Trap(std::string(name) + ": " + e.what());
        } catch (const std::exception& e) {
          active_cx_.reset();
          return wasmtime::Trap(std::string(name) + ": " + e.what());
        }
      });
  if (!ok) throw InstantiationFailed("cannot bind env." + std::string(name) + ": " + ok.err().message());
}

void Instance::bind_hostcalls() {
  using namespace hostcalls;
  bind("MPI_Init", &mpi_init);
  bind("MPI_Finalize", &mpi_finalize);
  bind("MPI_Initialized", &mpi_initialized);
  bind("MPI_Finalized", &mpi_finalized);
  bind("MPI_Comm_rank", &mpi_comm_rank);
  bind("MPI_Comm_size", &mpi_comm_size);
  bind("MPI_Type_size", &mpi_type_size);
  bind("MPI_Send", &mpi_send);
  bind("MPI_Recv", &mpi_recv);
  bind("MPI_Isend", &mpi_isend);
  bind("MPI_Irecv", &mpi_irecv);
  bind("MPI_Wait", &mpi_wait);
  bind("MPI_Waitall", &mpi_waitall);
  bind("MPI_Sendrecv", &mpi_sendrecv);
  bind("MPI_Barrier", &mpi_barrier);
  bind("MPI_Bcast", &mpi_bcast);
  bind("MPI_Reduce", &mpi_reduce);
  bind("MPI_Allreduce", &mpi_allreduce);
  bind("MPI_Gather", &mpi_gather);
  bind("MPI_Allgather", &mpi_allgather);
  bind("MPI_Scatter", &mpi_scatter);
  bind("MPI_Alltoall", &mpi_alltoall);
  bind("MPI_Alloc_mem", &mpi_alloc_mem);
  bind("MPI_Free_mem", &mpi_free_mem);
  bind("MPI_Wtime", &mpi_wtime);
  bind("MPI_Wtick", &mpi_wtick);
  bind("MPI_Get_count", &mpi_get_count);
  bind("MPI_Abort", &mpi_abort);
  bind("MPI_Comm_split", &mpi_comm_split);
  bind("MPI_Comm_dup", &mpi_comm_dup);
  bind("MPI_Comm_free", &mpi_comm_free);
}

void Instance::stub_unknown_imports(const wasmtime::Module& module) {
  const wasmtime::ValType i32 = wasmtime::ValType::i32();
  const wasmtime::ValType i64 = wasmtime::ValType::i64();
  const wasmtime::ValType f32 = wasmtime::ValType::f32();
  const wasmtime::ValType f64 = wasmtime::ValType::f64();

  for (const auto& import : module.imports()) {
    if (import.module() != "env" || is_shipped(import.name())) continue;
    auto ty = wasmtime::ExternType::from_import(import);
    const auto* fty = std::get_if<wasmtime::FuncType::Ref>(&ty);
    if (fty == nullptr) continue;

    std::string name(import.name());
    std::vector<wasmtime::Val> defaults;
    bool representable = true;
    for (auto r : fty->results()) {
      if (r == wasmtime::ValType::Ref(i32)) {
        defaults.emplace_back(static_cast<std::int32_t>(abi::kErrOther));
      } else if (r == wasmtime::ValType::Ref(i64)) {
        defaults.emplace_back(static_cast<std::int64_t>(0));
      } else if (r == wasmtime::ValType::Ref(f32)) {
        defaults.emplace_back(0.0f);
      } else if (r == wasmtime::ValType::Ref(f64)) {
        defaults.emplace_back(0.0);
      } else {
        representable = false;
      }
    }
    spdlog::debug("env.{} is not provided; linking a stub", name);
    auto ok = linker_.func_new(
        "env", name, wasmtime::FuncType(*fty),
        [name, defaults, representable](wasmtime::Caller, wasmtime::Span<const wasmtime::Val>,
                                        wasmtime::Span<wasmtime::Val> results)
            -> wasmtime::Result<std::monostate, wasmtime::Trap> {
          if (!representable) return wasmtime::Trap("unsupported MPI function env." + name);
          spdlog::warn("unsupported MPI function env.{} called; returning MPI_ERR_OTHER", name);
          for (std::size_t i = 0; i < results.size(); ++i) results[i] = defaults[i];
          return std::monostate();
        });
    if (!ok) throw InstantiationFailed("cannot stub env." + name + ": " + ok.err().message());
  }
}

RunResult Instance::run(const LifecycleHooks& hooks) {
  refresh_memory();
  if (hooks.on_instantiated) hooks.on_instantiated(*this);

  RunResult result;
  auto call = start_->call(store_, {});
  if (call) {
    result.exit_code = 0;
    result.outcome = Outcome::exited;
  } else {
    const auto& err = call.err();
    const auto* as_error = std::get_if<wasmtime::Error>(&err.data);
    if (as_error != nullptr && as_error->i32_exit()) {
      result.exit_code = *as_error->i32_exit();
      result.outcome = Outcome::exited;
    } else if (abort_) {
      result.exit_code = abort_->code();
      result.outcome = Outcome::aborted;
      result.diagnostic = abort_->what();
    } else if (interrupted_.load()) {
      result.exit_code = kTrapExitCode;
      result.outcome = Outcome::aborted;
      result.diagnostic = "interrupted after the rank group aborted";
    } else {
      result.exit_code = kTrapExitCode;
      result.outcome = Outcome::trapped;
      result.diagnostic = err.message();
    }
  }
  refresh_memory();
  if (hooks.on_exit) hooks.on_exit(*this, result);
  return result;
}

}  // namespace mpiwasm
