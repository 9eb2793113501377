/* Rank 0 and 1 bounce a buffer for each size; the payload is checked on return. */
#include <mpi.h>

#include "mpiwasm_rt.h"

#define MAX_BYTES (1 << 20)

static unsigned char buf[MAX_BYTES];

int main(int argc, char **argv) {
  int rank, size;
  MPI_Init(&argc, &argv);
  MPI_Comm_rank(MPI_COMM_WORLD, &rank);
  MPI_Comm_size(MPI_COMM_WORLD, &size);
  if (size < 2) {
    MPI_Finalize();
    return 0;
  }
  for (int bytes = 1; bytes <= MAX_BYTES; bytes *= 4) {
    MPI_Status st;
    if (rank == 0) {
      for (int i = 0; i < bytes; ++i) buf[i] = (unsigned char)(i * 13 + bytes);
      double t0 = MPI_Wtime();
      MPI_Send(buf, bytes, MPI_BYTE, 1, 5, MPI_COMM_WORLD);
      MPI_Recv(buf, bytes, MPI_BYTE, 1, 5, MPI_COMM_WORLD, &st);
      double us = (MPI_Wtime() - t0) * 1e6 / 2;
      int count = -1;
      MPI_Get_count(&st, MPI_BYTE, &count);
      if (count != bytes) return 2;
      for (int i = 0; i < bytes; ++i) {
        if (buf[i] != (unsigned char)(i * 13 + bytes + 1)) return 3;
      }
      rt_print("pingpong ");
      rt_print_int(bytes);
      rt_print(" B ");
      rt_print_int((long long)us);
      rt_print(" us");
      rt_newline();
    } else if (rank == 1) {
      MPI_Recv(buf, bytes, MPI_BYTE, 0, 5, MPI_COMM_WORLD, &st);
      for (int i = 0; i < bytes; ++i) buf[i] += 1;
      MPI_Send(buf, bytes, MPI_BYTE, 0, 5, MPI_COMM_WORLD);
    }
  }
  MPI_Barrier(MPI_COMM_WORLD);
  MPI_Finalize();
  return 0;
}
