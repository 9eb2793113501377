"""Python front end for the MPI WebAssembly embedder."""

from ._mpiwasm import (
    ERR_ARG,
    ERR_OTHER,
    MalformedModule,
    MissingExport,
    NotADirectory,
    UnsupportedFeature,
    abi_manifest,
    bench,
    cli,
    run,
    scan_module,
    shipped_hostcalls,
    wat_to_wasm,
)

__all__ = [
    "ERR_ARG",
    "ERR_OTHER",
    "MalformedModule",
    "MissingExport",
    "NotADirectory",
    "UnsupportedFeature",
    "abi_manifest",
    "bench",
    "cli",
    "run",
    "scan_module",
    "shipped_hostcalls",
    "wat_to_wasm",
]
