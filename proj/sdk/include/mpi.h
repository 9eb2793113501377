/* Generated by sdk/gen_mpi_h.py from abi/mpi_abi_v1.manifest. Do not edit. */
#ifndef MPIWASM_MPI_H
#define MPIWASM_MPI_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int MPI_Comm;
typedef int MPI_Datatype;
typedef int MPI_Op;
typedef int MPI_Request;
typedef int MPI_Info;
typedef int32_t MPI_Aint;

typedef struct MPI_Status {
  int MPI_SOURCE;
  int MPI_TAG;
  int MPI_ERROR;
  int count_bytes; /* read through MPI_Get_count */
} MPI_Status;

/* MPI_LONG is 8 bytes in this ABI. wasm32 `long` is 4, so use mpi_long_t
   for MPI_LONG buffers. */
typedef int64_t mpi_long_t;

#define MPI_ABI_VERSION 1
#define MPI_SUCCESS 0
#define MPI_ERR_TYPE 3
#define MPI_ERR_COMM 5
#define MPI_ERR_OP 9
#define MPI_ERR_ARG 12
#define MPI_ERR_OTHER 15
#define MPI_COMM_WORLD 0
#define MPI_COMM_SELF 1
#define MPI_COMM_NULL (-1)
#define MPI_BYTE 0
#define MPI_CHAR 1
#define MPI_INT 2
#define MPI_FLOAT 3
#define MPI_DOUBLE 4
#define MPI_LONG 5
#define MPI_UNSIGNED 6
#define MPI_LONG_LONG 7
#define MPI_UNSIGNED_LONG 8
#define MPI_DATATYPE_NULL (-1)
#define MPI_SUM 0
#define MPI_MAX 1
#define MPI_MIN 2
#define MPI_PROD 3
#define MPI_LAND 4
#define MPI_LOR 5
#define MPI_BAND 6
#define MPI_BOR 7
#define MPI_OP_NULL (-1)
#define MPI_ANY_SOURCE (-1)
#define MPI_ANY_TAG (-1)
#define MPI_STATUS_IGNORE ((MPI_Status *)0)
#define MPI_UNDEFINED (-32766)
#define MPI_STATUS_SIZE 16
#define MPI_STATUSES_IGNORE ((MPI_Status *)0)
#define MPI_INFO_NULL 0

#define MPIWASM_IMPORT(name) __attribute__((import_module("env"), import_name(#name)))

MPIWASM_IMPORT(MPI_Init) int MPI_Init(int *argc, char ***argv);
MPIWASM_IMPORT(MPI_Finalize) int MPI_Finalize(void);
MPIWASM_IMPORT(MPI_Initialized) int MPI_Initialized(int *flag);
MPIWASM_IMPORT(MPI_Finalized) int MPI_Finalized(int *flag);
MPIWASM_IMPORT(MPI_Comm_rank) int MPI_Comm_rank(MPI_Comm comm, int *rank);
MPIWASM_IMPORT(MPI_Comm_size) int MPI_Comm_size(MPI_Comm comm, int *size);
MPIWASM_IMPORT(MPI_Type_size) int MPI_Type_size(MPI_Datatype datatype, int *size);
MPIWASM_IMPORT(MPI_Send) int MPI_Send(const void *buf, int count, MPI_Datatype datatype, int dest, int tag, MPI_Comm comm);
MPIWASM_IMPORT(MPI_Recv) int MPI_Recv(void *buf, int count, MPI_Datatype datatype, int source, int tag, MPI_Comm comm, MPI_Status *status);
MPIWASM_IMPORT(MPI_Isend) int MPI_Isend(const void *buf, int count, MPI_Datatype datatype, int dest, int tag, MPI_Comm comm, MPI_Request *request);
MPIWASM_IMPORT(MPI_Irecv) int MPI_Irecv(void *buf, int count, MPI_Datatype datatype, int source, int tag, MPI_Comm comm, MPI_Request *request);
MPIWASM_IMPORT(MPI_Wait) int MPI_Wait(MPI_Request *request, MPI_Status *status);
MPIWASM_IMPORT(MPI_Waitall) int MPI_Waitall(int count, MPI_Request *requests, MPI_Status *statuses);
MPIWASM_IMPORT(MPI_Sendrecv) int MPI_Sendrecv(const void *sendbuf, int sendcount, MPI_Datatype sendtype, int dest, int sendtag, void *recvbuf, int recvcount, MPI_Datatype recvtype, int source, int recvtag, MPI_Comm comm, MPI_Status *status);
MPIWASM_IMPORT(MPI_Barrier) int MPI_Barrier(MPI_Comm comm);
MPIWASM_IMPORT(MPI_Bcast) int MPI_Bcast(void *buf, int count, MPI_Datatype datatype, int root, MPI_Comm comm);
MPIWASM_IMPORT(MPI_Reduce) int MPI_Reduce(const void *sendbuf, void *recvbuf, int count, MPI_Datatype datatype, MPI_Op op, int root, MPI_Comm comm);
MPIWASM_IMPORT(MPI_Allreduce) int MPI_Allreduce(const void *sendbuf, void *recvbuf, int count, MPI_Datatype datatype, MPI_Op op, MPI_Comm comm);
MPIWASM_IMPORT(MPI_Gather) int MPI_Gather(const void *sendbuf, int sendcount, MPI_Datatype sendtype, void *recvbuf, int recvcount, MPI_Datatype recvtype, int root, MPI_Comm comm);
MPIWASM_IMPORT(MPI_Allgather) int MPI_Allgather(const void *sendbuf, int sendcount, MPI_Datatype sendtype, void *recvbuf, int recvcount, MPI_Datatype recvtype, MPI_Comm comm);
MPIWASM_IMPORT(MPI_Scatter) int MPI_Scatter(const void *sendbuf, int sendcount, MPI_Datatype sendtype, void *recvbuf, int recvcount, MPI_Datatype recvtype, int root, MPI_Comm comm);
MPIWASM_IMPORT(MPI_Alltoall) int MPI_Alltoall(const void *sendbuf, int sendcount, MPI_Datatype sendtype, void *recvbuf, int recvcount, MPI_Datatype recvtype, MPI_Comm comm);
MPIWASM_IMPORT(MPI_Alloc_mem) int MPI_Alloc_mem(MPI_Aint size, MPI_Info info, void *baseptr);
MPIWASM_IMPORT(MPI_Free_mem) int MPI_Free_mem(void *base);
MPIWASM_IMPORT(MPI_Wtime) double MPI_Wtime(void);
MPIWASM_IMPORT(MPI_Wtick) double MPI_Wtick(void);
MPIWASM_IMPORT(MPI_Get_count) int MPI_Get_count(const MPI_Status *status, MPI_Datatype datatype, int *count);
MPIWASM_IMPORT(MPI_Abort) int MPI_Abort(MPI_Comm comm, int errorcode);
MPIWASM_IMPORT(MPI_Comm_split) int MPI_Comm_split(MPI_Comm comm, int color, int key, MPI_Comm *newcomm);
MPIWASM_IMPORT(MPI_Comm_dup) int MPI_Comm_dup(MPI_Comm comm, MPI_Comm *newcomm);
MPIWASM_IMPORT(MPI_Comm_free) int MPI_Comm_free(MPI_Comm *comm);

#ifdef __cplusplus
}
#endif

_Static_assert(sizeof(MPI_Status) == MPI_STATUS_SIZE, "MPI_Status layout");

#endif
