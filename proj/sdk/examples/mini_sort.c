/* Bucketed integer sort in the manner of NPB IS: keys are routed to the rank
   owning their range with a fixed-width Alltoall, sorted locally by counting,
   and the result is checked for global order and conservation. */
#include <mpi.h>

#include "mpiwasm_rt.h"

#define KEYS_PER_RANK 4096
#define MAX_KEY 65536
#define MAX_RANKS 16
#define SLOT (KEYS_PER_RANK + 1) /* first int of a slot is its fill count */

static int keys[KEYS_PER_RANK];
static int out_slots[MAX_RANKS * SLOT];
static int in_slots[MAX_RANKS * SLOT];
static int mine[MAX_RANKS * KEYS_PER_RANK];
static int counts[MAX_KEY];

int main(int argc, char **argv) {
  int rank, n;
  MPI_Init(&argc, &argv);
  MPI_Comm_rank(MPI_COMM_WORLD, &rank);
  MPI_Comm_size(MPI_COMM_WORLD, &n);
  if (n > MAX_RANKS) MPI_Abort(MPI_COMM_WORLD, 4);

  unsigned int seed = 314159265u + 2718281u * (unsigned)rank;
  long long local_sum = 0;
  for (int i = 0; i < KEYS_PER_RANK; ++i) {
    seed = seed * 1103515245u + 12345u;
    keys[i] = (int)((seed >> 8) % MAX_KEY);
    local_sum += keys[i];
  }

  const int width = (MAX_KEY + n - 1) / n;
  for (int r = 0; r < n; ++r) out_slots[r * SLOT] = 0;
  for (int i = 0; i < KEYS_PER_RANK; ++i) {
    int r = keys[i] / width;
    int *slot = &out_slots[r * SLOT];
    slot[1 + slot[0]++] = keys[i];
  }
  MPI_Alltoall(out_slots, SLOT, MPI_INT, in_slots, SLOT, MPI_INT, MPI_COMM_WORLD);

  int have = 0;
  for (int r = 0; r < n; ++r) {
    const int *slot = &in_slots[r * SLOT];
    for (int j = 0; j < slot[0]; ++j) mine[have++] = slot[1 + j];
  }
  memset(counts, 0, sizeof counts);
  for (int i = 0; i < have; ++i) ++counts[mine[i]];
  int at = 0;
  for (int k = 0; k < MAX_KEY; ++k) {
    for (int c = 0; c < counts[k]; ++c) mine[at++] = k;
  }

  for (int i = 1; i < have; ++i) {
    if (mine[i - 1] > mine[i]) return 1;
  }
  int lo = have ? mine[0] : MAX_KEY, hi = have ? mine[have - 1] : -1;
  if (have && (lo < rank * width || hi >= (rank + 1) * width)) return 2;

  /* Conservation: the key total and key sum are unchanged. */
  int total = 0;
  MPI_Allreduce(&have, &total, 1, MPI_INT, MPI_SUM, MPI_COMM_WORLD);
  long long sorted_sum = 0, before = 0, after = 0;
  for (int i = 0; i < have; ++i) sorted_sum += mine[i];
  MPI_Allreduce(&local_sum, &before, 1, MPI_LONG_LONG, MPI_SUM, MPI_COMM_WORLD);
  MPI_Allreduce(&sorted_sum, &after, 1, MPI_LONG_LONG, MPI_SUM, MPI_COMM_WORLD);
  if (total != n * KEYS_PER_RANK || before != after) return 3;

  /* Boundary order: my largest key is below my right neighbour's smallest. */
  int right_lo = MAX_KEY;
  MPI_Status st;
  MPI_Sendrecv(&lo, 1, MPI_INT, (rank + n - 1) % n, 9, &right_lo, 1, MPI_INT, (rank + 1) % n, 9,
               MPI_COMM_WORLD, &st);
  if (rank < n - 1 && have && right_lo < hi) return 5;

  if (rank == 0) {
    rt_print("sorted ");
    rt_print_int(total);
    rt_print(" keys");
    rt_newline();
  }
  MPI_Finalize();
  return 0;
}
