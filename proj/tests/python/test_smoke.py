import pathlib

import pytest

import mpiwasm

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def test_manifest_is_golden():
    golden = (FIXTURES.parent.parent / "abi" / "mpi_abi_v1.manifest").read_text()
    assert mpiwasm.abi_manifest() == golden


def test_hostcall_surface():
    names = {name for name, _, _ in mpiwasm.shipped_hostcalls()}
    assert {"MPI_Init", "MPI_Allreduce", "MPI_Wtime"} <= names
    assert len(names) == 31


@pytest.mark.parametrize("np", [1, 2, 4, 8])
def test_allreduce_fixture(np):
    result = mpiwasm.run(FIXTURES / "allreduce.wat", np=np)
    assert result["exit_code"] == 0
    assert len(result["ranks"]) == np
    assert all(r["outcome"] == "exited" for r in result["ranks"])


def test_exit_and_trap_codes():
    assert mpiwasm.run(FIXTURES / "exit3.wat", np=2)["exit_code"] == 3
    trapped = mpiwasm.run(FIXTURES / "oob_trap.wat", np=1)
    assert trapped["exit_code"] == 134
    assert trapped["ranks"][0]["outcome"] == "trapped"


def test_inline_wat_and_scan():
    wasm = mpiwasm.wat_to_wasm('(module (memory (export "memory") 1) (func (export "_start")))')
    assert wasm[:4] == b"\0asm"
    summary = mpiwasm.scan_module(wasm)
    assert ("_start", "func") in summary["exports"]
    assert mpiwasm.run(wasm, np=3)["exit_code"] == 0


def test_rejections():
    with pytest.raises(mpiwasm.UnsupportedFeature):
        mpiwasm.run(FIXTURES / "shared_memory.wat", np=1)
    with pytest.raises(mpiwasm.MalformedModule):
        mpiwasm.run(b"\0asm\x01\0\0\0\x05\xff", np=1)
    with pytest.raises(ValueError):
        mpiwasm.run(FIXTURES / "hello.wat", np=0)


def test_cache_round_trip(tmp_path):
    first = mpiwasm.run(FIXTURES / "hello.wat", np=1, cache_dir=tmp_path)
    second = mpiwasm.run(FIXTURES / "hello.wat", np=1, cache_dir=tmp_path)
    assert not first["from_cache"]
    assert second["from_cache"]


def test_bench_rows():
    rows = mpiwasm.bench("pingpong", np=2, iters=3, sizes=[1, 1024])
    assert [r["msg_bytes"] for r in rows] == [1, 1024]
    assert all(r["usec_min"] <= r["usec_avg"] <= r["usec_max"] for r in rows)


def test_cli_usage_error():
    code, _, err = mpiwasm.cli(["hello.wasm"])
    assert code == 2
    assert err
