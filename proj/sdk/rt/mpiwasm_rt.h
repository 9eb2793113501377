/* Small helpers the samples use for output. Built on WASI fd_write, so they
   work with and without a libc. */
#ifndef MPIWASM_RT_H
#define MPIWASM_RT_H

#include <stddef.h>
#include <stdint.h>

void rt_print(const char *s);
void rt_print_int(long long v);
void rt_newline(void);

#ifdef MPIWASM_FREESTANDING
/* Provided by mpiwasm_rt.c when there is no libc. */
void *malloc(size_t size);
void free(void *p);
void *memcpy(void *dst, const void *src, size_t n);
void *memset(void *dst, int c, size_t n);
#else
#include <stdlib.h>
#include <string.h>
#endif

#endif
