#ifndef WASMTIME_CONF_H
#define WASMTIME_CONF_H

// Feature set matching the prebuilt libwasmtime shipped in the `wasmtime`
// PyPI wheel (49.0.0) that this project links against.
#define WASMTIME_FEATURE_WAT
#define WASMTIME_FEATURE_CACHE
#define WASMTIME_FEATURE_PARALLEL_COMPILATION
#define WASMTIME_FEATURE_WASI
#define WASMTIME_FEATURE_THREADS
#define WASMTIME_FEATURE_CRANELIFT
#define WASMTIME_FEATURE_GC

#if defined(WASMTIME_FEATURE_CRANELIFT) || defined(WASMTIME_FEATURE_WINCH)
#define WASMTIME_FEATURE_COMPILER
#endif

#endif // WASMTIME_CONF_H
