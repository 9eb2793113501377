#include "mpiwasm_rt.h"

typedef struct {
  const void *buf;
  size_t len;
} ciovec;

__attribute__((import_module("wasi_snapshot_preview1"), import_name("fd_write")))
int wasi_fd_write(int fd, const ciovec *iovs, size_t n, size_t *written);

static size_t length(const char *s) {
  size_t n = 0;
  while (s[n]) ++n;
  return n;
}

void rt_print(const char *s) {
  ciovec v = {s, length(s)};
  size_t written;
  wasi_fd_write(1, &v, 1, &written);
}

void rt_print_int(long long v) {
  char buf[24];
  int i = 23;
  int neg = v < 0;
  unsigned long long u = neg ? 0ull - (unsigned long long)v : (unsigned long long)v;
  buf[i] = 0;
  do {
    buf[--i] = (char)('0' + u % 10);
    u /= 10;
  } while (u);
  if (neg) buf[--i] = '-';
  rt_print(buf + i);
}

void rt_newline(void) { rt_print("\n"); }

#ifdef MPIWASM_FREESTANDING

__attribute__((import_module("wasi_snapshot_preview1"), import_name("proc_exit")))
_Noreturn void wasi_proc_exit(int code);

extern unsigned char __heap_base;
static uintptr_t heap_top;

/* Bump allocator; free only counts. Exported so MPI_Alloc_mem can call it. */
__attribute__((export_name("malloc"))) void *malloc(size_t size) {
  if (!heap_top) heap_top = (uintptr_t)&__heap_base;
  uintptr_t at = (heap_top + 15) & ~(uintptr_t)15;
  uintptr_t end = at + size;
  uintptr_t limit = __builtin_wasm_memory_size(0) * 65536u;
  if (end > limit) {
    size_t pages = (end - limit + 65535) / 65536;
    if (__builtin_wasm_memory_grow(0, pages) == (size_t)-1) return 0;
  }
  heap_top = end;
  return (void *)at;
}

__attribute__((export_name("free"))) void free(void *p) { (void)p; }

void *memcpy(void *dst, const void *src, size_t n) {
  unsigned char *d = dst;
  const unsigned char *s = src;
  while (n--) *d++ = *s++;
  return dst;
}

void *memset(void *dst, int c, size_t n) {
  unsigned char *d = dst;
  while (n--) *d++ = (unsigned char)c;
  return dst;
}

int main(int argc, char **argv);

__attribute__((export_name("_start"))) void _start(void) { wasi_proc_exit(main(0, 0)); }

#endif
