import json
import os
import pathlib
import subprocess

import pytest

SCHEMA_DIR = pathlib.Path(os.environ.get("LMDP_SCHEMA_DIR", pathlib.Path(__file__).resolve().parents[2] / "schema"))


@pytest.fixture(scope="session")
def schemas():
    return {p.name.removesuffix(".schema.json"): json.loads(p.read_text()) for p in SCHEMA_DIR.glob("*.schema.json")}


@pytest.fixture(scope="session")
def lmdp_exe():
    exe = os.environ.get("LMDP_EXE")
    if not exe:
        pytest.skip("LMDP_EXE not set")
    return exe


@pytest.fixture
def run_tool(lmdp_exe, tmp_path):
    def run(*args, expect=0):
        out = tmp_path / "out"
        proc = subprocess.run([lmdp_exe, *args, "--out", str(out)], capture_output=True, text=True)
        assert proc.returncode == expect, proc.stderr
        return out

    return run
