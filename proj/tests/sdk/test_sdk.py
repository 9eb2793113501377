import importlib.util
import os
import re
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]
SDK = ROOT / "sdk"
MANIFEST = ROOT / "abi" / "mpi_abi_v1.manifest"
CLI = os.environ.get("MPIWASM_CLI", str(ROOT / "build" / "mpiwasm"))
SAMPLES = ["pingpong", "allreduce_check", "mini_sort", "alloc_mem", "abi_probe"]

spec = importlib.util.spec_from_file_location("gen_mpi_h", SDK / "gen_mpi_h.py")
gen = importlib.util.module_from_spec(spec)
spec.loader.exec_module(gen)

have_toolchain = shutil.which("clang") and shutil.which("wasm-ld")
needs_toolchain = pytest.mark.skipif(not have_toolchain, reason="clang and wasm-ld are required")


def manifest():
    return dict(gen.parse_manifest(MANIFEST.read_text()))


def test_checked_in_header_is_current():
    assert subprocess.call([sys.executable, str(SDK / "gen_mpi_h.py"), "--check"]) == 0


def test_header_constants_follow_manifest():
    text = gen.generate_header(MANIFEST.read_text())
    assert "#define MPI_SUM 0\n" in text
    for key, value in manifest().items():
        if key == "MPI_STATUS_IGNORE":
            continue
        shown = f"({value})" if int(value) < 0 else value
        assert f"#define {key} {shown}\n" in text
    assert text == gen.generate_header(MANIFEST.read_text())


def test_stale_version_is_refused():
    stale = MANIFEST.read_text().replace("MPI_ABI_VERSION=1", "MPI_ABI_VERSION=0")
    with pytest.raises(gen.ManifestError):
        gen.generate_header(stale)
    with pytest.raises(gen.ManifestError):
        gen.generate_header("MPI_SUM=zero\n")


def test_prototypes_match_shipped_hostcalls():
    out = subprocess.run([CLI, "--print-hostcalls"], capture_output=True, text=True, check=True).stdout
    host = {}
    for line in out.splitlines():
        m = re.match(r"(\w+) \((\d+) x i32\) -> (\w+)", line)
        assert m, line
        host[m.group(1)] = (int(m.group(2)), m.group(3))
    ours = {name: (gen.arity(params), "f64" if ret == "double" else "i32") for ret, name, params in gen.PROTOTYPES}
    assert ours == host


def test_cli_prints_the_manifest():
    out = subprocess.run([CLI, "--print-abi"], capture_output=True, text=True, check=True).stdout
    assert out == MANIFEST.read_text()


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    if not have_toolchain:
        pytest.skip("clang and wasm-ld are required")
    out = tmp_path_factory.mktemp("samples")
    paths = {}
    for name in SAMPLES:
        wasm = out / f"{name}.wasm"
        subprocess.run([sys.executable, str(SDK / "mpiwasm-cc"), str(SDK / "examples" / f"{name}.c"),
                        "-o", str(wasm)], check=True)
        paths[name] = wasm
    return paths


def run(wasm, np):
    return subprocess.run([CLI, "--np", str(np), "--no-cache", str(wasm)], capture_output=True, text=True,
                          timeout=120)


@needs_toolchain
def test_pingpong_imports_mpi_send(built):
    wasmtime = pytest.importorskip("wasmtime")
    module = wasmtime.Module(wasmtime.Engine(), built["pingpong"].read_bytes())
    imports = {(i.module, i.name) for i in module.imports}
    assert ("env", "MPI_Send") in imports
    exports = {e.name for e in module.exports}
    assert {"_start", "memory", "malloc", "free"} <= exports


@needs_toolchain
@pytest.mark.parametrize("np", [1, 2, 4, 8])
@pytest.mark.parametrize("name", ["pingpong", "allreduce_check", "mini_sort", "alloc_mem"])
def test_samples_run_clean(built, name, np):
    r = run(built[name], np)
    assert r.returncode == 0, r.stderr


@needs_toolchain
def test_probe_agrees_with_manifest(built):
    r = run(built["abi_probe"], 4)
    assert r.returncode == 0, r.stderr
    seen = dict(line.split("=", 1) for line in r.stdout.splitlines() if "=" in line)
    for key, value in manifest().items():
        assert seen[key] == value, key
    assert seen["sizeof(MPI_Status)"] == "16"
    assert seen["sizeof(mpi_long_t)"] == seen["type_size(5)"] == "8"


@needs_toolchain
def test_samples_are_small(built):
    for name, wasm in built.items():
        assert wasm.stat().st_size < 1 << 20, name
