/* Prints what the header says next to what the host says, KEY=VALUE per line. */
#include <mpi.h>

#include "mpiwasm_rt.h"

static void kv(const char *key, long long v) {
  rt_print(key);
  rt_print("=");
  rt_print_int(v);
  rt_newline();
}

#define SHOW(name) kv(#name, (long long)(name))

int main(int argc, char **argv) {
  MPI_Init(&argc, &argv);
  int rank;
  MPI_Comm_rank(MPI_COMM_WORLD, &rank);
  if (rank == 0) {
    SHOW(MPI_ABI_VERSION);
    SHOW(MPI_SUCCESS);
    SHOW(MPI_ERR_TYPE);
    SHOW(MPI_ERR_COMM);
    SHOW(MPI_ERR_OP);
    SHOW(MPI_ERR_ARG);
    SHOW(MPI_ERR_OTHER);
    SHOW(MPI_COMM_WORLD);
    SHOW(MPI_COMM_SELF);
    SHOW(MPI_COMM_NULL);
    SHOW(MPI_BYTE);
    SHOW(MPI_CHAR);
    SHOW(MPI_INT);
    SHOW(MPI_FLOAT);
    SHOW(MPI_DOUBLE);
    SHOW(MPI_LONG);
    SHOW(MPI_UNSIGNED);
    SHOW(MPI_LONG_LONG);
    SHOW(MPI_UNSIGNED_LONG);
    SHOW(MPI_DATATYPE_NULL);
    SHOW(MPI_SUM);
    SHOW(MPI_MAX);
    SHOW(MPI_MIN);
    SHOW(MPI_PROD);
    SHOW(MPI_LAND);
    SHOW(MPI_LOR);
    SHOW(MPI_BAND);
    SHOW(MPI_BOR);
    SHOW(MPI_OP_NULL);
    SHOW(MPI_ANY_SOURCE);
    SHOW(MPI_ANY_TAG);
    kv("MPI_STATUS_IGNORE", (long long)(intptr_t)MPI_STATUS_IGNORE);
    SHOW(MPI_UNDEFINED);
    SHOW(MPI_STATUS_SIZE);
    kv("sizeof(MPI_Status)", (long long)sizeof(MPI_Status));
    kv("sizeof(mpi_long_t)", (long long)sizeof(mpi_long_t));
    static const MPI_Datatype types[] = {MPI_BYTE, MPI_CHAR, MPI_INT, MPI_FLOAT, MPI_DOUBLE,
                                         MPI_LONG, MPI_UNSIGNED, MPI_LONG_LONG, MPI_UNSIGNED_LONG};
    for (unsigned i = 0; i < sizeof types / sizeof types[0]; ++i) {
      int size = -1;
      MPI_Type_size(types[i], &size);
      rt_print("type_size(");
      rt_print_int(types[i]);
      rt_print(")=");
      rt_print_int(size);
      rt_newline();
    }
  }
  MPI_Finalize();
  return 0;
}
