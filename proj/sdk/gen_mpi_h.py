#!/usr/bin/env python3
"""Generate the guest mpi.h from the host's ABI manifest."""

import argparse
import sys
from pathlib import Path

SUPPORTED_VERSION = 1

# C prototypes of the shipped env imports. Arity is checked against
# `mpiwasm --print-hostcalls` by the SDK tests.
PROTOTYPES = [
    ("int", "MPI_Init", "int *argc, char ***argv"),
    ("int", "MPI_Finalize", "void"),
    ("int", "MPI_Initialized", "int *flag"),
    ("int", "MPI_Finalized", "int *flag"),
    ("int", "MPI_Comm_rank", "MPI_Comm comm, int *rank"),
    ("int", "MPI_Comm_size", "MPI_Comm comm, int *size"),
    ("int", "MPI_Type_size", "MPI_Datatype datatype, int *size"),
    ("int", "MPI_Send", "const void *buf, int count, MPI_Datatype datatype, int dest, int tag, MPI_Comm comm"),
    ("int", "MPI_Recv",
     "void *buf, int count, MPI_Datatype datatype, int source, int tag, MPI_Comm comm, MPI_Status *status"),
    ("int", "MPI_Isend",
     "const void *buf, int count, MPI_Datatype datatype, int dest, int tag, MPI_Comm comm, "
     "MPI_Request *request"),
    ("int", "MPI_Irecv",
     "void *buf, int count, MPI_Datatype datatype, int source, int tag, MPI_Comm comm, MPI_Request *request"),
    ("int", "MPI_Wait", "MPI_Request *request, MPI_Status *status"),
    ("int", "MPI_Waitall", "int count, MPI_Request *requests, MPI_Status *statuses"),
    ("int", "MPI_Sendrecv",
     "const void *sendbuf, int sendcount, MPI_Datatype sendtype, int dest, int sendtag, "
     "void *recvbuf, int recvcount, MPI_Datatype recvtype, int source, int recvtag, "
     "MPI_Comm comm, MPI_Status *status"),
    ("int", "MPI_Barrier", "MPI_Comm comm"),
    ("int", "MPI_Bcast", "void *buf, int count, MPI_Datatype datatype, int root, MPI_Comm comm"),
    ("int", "MPI_Reduce",
     "const void *sendbuf, void *recvbuf, int count, MPI_Datatype datatype, MPI_Op op, int root, "
     "MPI_Comm comm"),
    ("int", "MPI_Allreduce",
     "const void *sendbuf, void *recvbuf, int count, MPI_Datatype datatype, MPI_Op op, MPI_Comm comm"),
    ("int", "MPI_Gather",
     "const void *sendbuf, int sendcount, MPI_Datatype sendtype, void *recvbuf, int recvcount, "
     "MPI_Datatype recvtype, int root, MPI_Comm comm"),
    ("int", "MPI_Allgather",
     "const void *sendbuf, int sendcount, MPI_Datatype sendtype, void *recvbuf, int recvcount, "
     "MPI_Datatype recvtype, MPI_Comm comm"),
    ("int", "MPI_Scatter",
     "const void *sendbuf, int sendcount, MPI_Datatype sendtype, void *recvbuf, int recvcount, "
     "MPI_Datatype recvtype, int root, MPI_Comm comm"),
    ("int", "MPI_Alltoall",
     "const void *sendbuf, int sendcount, MPI_Datatype sendtype, void *recvbuf, int recvcount, "
     "MPI_Datatype recvtype, MPI_Comm comm"),
    ("int", "MPI_Alloc_mem", "MPI_Aint size, MPI_Info info, void *baseptr"),
    ("int", "MPI_Free_mem", "void *base"),
    ("double", "MPI_Wtime", "void"),
    ("double", "MPI_Wtick", "void"),
    ("int", "MPI_Get_count", "const MPI_Status *status, MPI_Datatype datatype, int *count"),
    ("int", "MPI_Abort", "MPI_Comm comm, int errorcode"),
    ("int", "MPI_Comm_split", "MPI_Comm comm, int color, int key, MPI_Comm *newcomm"),
    ("int", "MPI_Comm_dup", "MPI_Comm comm, MPI_Comm *newcomm"),
    ("int", "MPI_Comm_free", "MPI_Comm *comm"),
]


class ManifestError(Exception):
    pass


def parse_manifest(text):
    entries = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.isidentifier():
            raise ManifestError(f"line {n}: expected KEY=VALUE")
        try:
            int(value)
        except ValueError:
            raise ManifestError(f"line {n}: {key} is not an integer") from None
        entries.append((key, value))
    keys = [k for k, _ in entries]
    if len(set(keys)) != len(keys):
        raise ManifestError("duplicate keys")
    return entries


def arity(params):
    return 0 if params == "void" else params.count(",") + 1


def generate_header(manifest_text, expect_version=SUPPORTED_VERSION):
    entries = parse_manifest(manifest_text)
    consts = dict(entries)
    version = consts.get("MPI_ABI_VERSION")
    if version is None or int(version) != expect_version:
        raise ManifestError(f"manifest ABI version {version}, generator speaks {expect_version}")

    out = [
        "/* Generated by sdk/gen_mpi_h.py from abi/mpi_abi_v1.manifest. Do not edit. */",
        "#ifndef MPIWASM_MPI_H",
        "#define MPIWASM_MPI_H",
        "",
        "#include <stdint.h>",
        "",
        "#ifdef __cplusplus",
        'extern "C" {',
        "#endif",
        "",
        "typedef int MPI_Comm;",
        "typedef int MPI_Datatype;",
        "typedef int MPI_Op;",
        "typedef int MPI_Request;",
        "typedef int MPI_Info;",
        "typedef int32_t MPI_Aint;",
        "",
        "typedef struct MPI_Status {",
        "  int MPI_SOURCE;",
        "  int MPI_TAG;",
        "  int MPI_ERROR;",
        "  int count_bytes; /* read through MPI_Get_count */",
        "} MPI_Status;",
        "",
        "/* MPI_LONG is 8 bytes in this ABI. wasm32 `long` is 4, so use mpi_long_t",
        "   for MPI_LONG buffers. */",
        "typedef int64_t mpi_long_t;",
        "",
    ]
    for key, value in entries:
        if key == "MPI_STATUS_IGNORE":
            out.append(f"#define {key} ((MPI_Status *){value})")
        elif int(value) < 0:
            out.append(f"#define {key} ({value})")
        else:
            out.append(f"#define {key} {value}")
    out += [
        "#define MPI_STATUSES_IGNORE ((MPI_Status *)0)",
        "#define MPI_INFO_NULL 0",
        "",
        "#define MPIWASM_IMPORT(name) __attribute__((import_module(\"env\"), import_name(#name)))",
        "",
    ]
    for ret, name, params in PROTOTYPES:
        out.append(f"MPIWASM_IMPORT({name}) {ret} {name}({params});")
    out += [
        "",
        "#ifdef __cplusplus",
        "}",
        "#endif",
        "",
        "_Static_assert(sizeof(MPI_Status) == MPI_STATUS_SIZE, \"MPI_Status layout\");",
        "",
        "#endif",
        "",
    ]
    return "\n".join(out)


def imports_list():
    """Symbols the freestanding link may leave undefined."""
    return "\n".join([name for _, name, _ in PROTOTYPES] + ["wasi_fd_write", "wasi_proc_exit"]) + "\n"


def main(argv=None):
    here = Path(__file__).resolve().parent
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--manifest", type=Path, default=here.parent / "abi" / "mpi_abi_v1.manifest")
    ap.add_argument("-o", "--output", type=Path, default=here / "include" / "mpi.h")
    ap.add_argument("--imports", type=Path, default=here / "rt" / "imports.txt")
    ap.add_argument("--expect-version", type=int, default=SUPPORTED_VERSION)
    ap.add_argument("--check", action="store_true", help="fail if the output file is stale")
    args = ap.parse_args(argv)
    try:
        text = generate_header(args.manifest.read_text(), args.expect_version)
    except ManifestError as e:
        print(f"gen_mpi_h: {e}", file=sys.stderr)
        return 1
    outputs = [(args.output, text), (args.imports, imports_list())]
    if args.check:
        stale = [str(p) for p, t in outputs if not p.exists() or p.read_text() != t]
        if stale:
            print(f"gen_mpi_h: stale: {', '.join(stale)}", file=sys.stderr)
            return 1
        return 0
    for path, t in outputs:
        path.write_text(t)
    return 0


if __name__ == "__main__":
    sys.exit(main())
