/* MPI_Alloc_mem hands out guest memory through the module's own malloc. */
#include <mpi.h>

#include "mpiwasm_rt.h"

#define BYTES (1 << 20)

int main(int argc, char **argv) {
  int rank, n;
  MPI_Init(&argc, &argv);
  MPI_Comm_rank(MPI_COMM_WORLD, &rank);
  MPI_Comm_size(MPI_COMM_WORLD, &n);

  int *block = 0;
  if (MPI_Alloc_mem(BYTES, MPI_INFO_NULL, &block) != MPI_SUCCESS || !block) return 1;
  const int ints = BYTES / (int)sizeof(int);
  for (int i = 0; i < ints; ++i) block[i] = rank * 1000 + i % 97;

  int *incoming = 0;
  if (MPI_Alloc_mem(BYTES, MPI_INFO_NULL, &incoming) != MPI_SUCCESS) return 2;
  MPI_Status st;
  const int left = (rank + n - 1) % n;
  MPI_Sendrecv(block, ints, MPI_INT, (rank + 1) % n, 1, incoming, ints, MPI_INT, left, 1,
               MPI_COMM_WORLD, &st);
  for (int i = 0; i < ints; ++i) {
    if (incoming[i] != left * 1000 + i % 97) return 3;
  }
  if (MPI_Free_mem(incoming) != MPI_SUCCESS || MPI_Free_mem(block) != MPI_SUCCESS) return 4;
  MPI_Finalize();
  return 0;
}
