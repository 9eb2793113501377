/* Every rank checks SUM of ranks against n(n-1)/2, in INT, LONG and DOUBLE. */
#include <mpi.h>

#include "mpiwasm_rt.h"

int main(int argc, char **argv) {
  int rank, n;
  MPI_Init(&argc, &argv);
  MPI_Comm_rank(MPI_COMM_WORLD, &rank);
  MPI_Comm_size(MPI_COMM_WORLD, &n);

  int sum = -1;
  MPI_Allreduce(&rank, &sum, 1, MPI_INT, MPI_SUM, MPI_COMM_WORLD);
  if (sum != n * (n - 1) / 2) return 1;

  mpi_long_t big = (mpi_long_t)rank << 33, big_sum = 0;
  MPI_Allreduce(&big, &big_sum, 1, MPI_LONG, MPI_SUM, MPI_COMM_WORLD);
  if (big_sum != ((mpi_long_t)n * (n - 1) / 2) << 33) return 2;

  double x = rank + 0.5, mx = 0;
  MPI_Allreduce(&x, &mx, 1, MPI_DOUBLE, MPI_MAX, MPI_COMM_WORLD);
  if (mx != n - 0.5) return 3;

  if (rank == 0) {
    rt_print("allreduce ok: ");
    rt_print_int(sum);
    rt_newline();
  }
  MPI_Finalize();
  return 0;
}
