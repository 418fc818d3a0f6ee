import json
import os
import subprocess
import sys

import pytest

from seqloc.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, main, number
from seqloc.core import BINARY_12, dump_json, uniform
from seqloc.wirings import SequentialWiring


def run_cli(*args, env_dir=None):
    env = dict(os.environ)
    if env_dir:
        env["SEQLOC_CACHE_DIR"] = env_dir
    proc = subprocess.run([sys.executable, "-m", "seqloc", *args], capture_output=True, text=True, env=env)
    doc = json.loads(proc.stdout) if proc.stdout.strip() else None
    return proc.returncode, doc, proc.stdout


@pytest.fixture
def uniform_file(tmp_path):
    path = tmp_path / "uniform.json"
    dump_json(uniform(BINARY_12), path)
    return str(path)


def test_number_rendering():
    assert number(3) == {"exact": "3", "decimal": "3"}
    assert number(0.1) == {"exact": None, "decimal": "0.1"}
    with pytest.raises(TypeError):
        number(True)


def test_validate(uniform_file):
    code, doc, _ = run_cli("validate", uniform_file)
    assert code == EXIT_OK
    assert doc["status"] == "ok" and doc["result"]["valid"]
    assert doc["command"] == ["seqloc", "validate", uniform_file]


def test_member_toloc_of_uniform_has_model(uniform_file):
    code, doc, _ = run_cli("member", "--set", "toloc", uniform_file)
    assert code == EXIT_OK
    assert doc["result"] == {"member": True}
    assert doc["certificate"]["model"]


def test_member_postloc_and_bell(uniform_file):
    for which in ("postloc", "bell"):
        code, doc, _ = run_cli("member", "--set", which, uniform_file)
        assert code == EXIT_OK and doc["result"]["member"]


def test_maximize_postloc_sequential_chsh(cache_dir):
    code, doc, _ = run_cli("maximize", "--set", "postloc", "--functional", "builtin:eq39", env_dir=cache_dir)
    assert code == EXIT_OK
    assert doc["result"]["optimum"]["exact"] == "4"
    assert doc["result"]["violates_bound"]
    assert doc["certificate"]["maximizer"]["values"]


def test_demo_popescu():
    code, doc, _ = run_cli("demo", "popescu", "--d", "5")
    assert code == EXIT_OK
    assert doc["result"]["beta"]["decimal"].startswith("2.020305")
    assert doc["result"]["violates_chsh"]


def test_demo_popescu_export(tmp_path):
    path = tmp_path / "p.json"
    code, doc, _ = run_cli("demo", "popescu", "--d", "3", "--export", str(path))
    assert code == EXIT_OK
    assert json.loads(path.read_text())["representation"] == "float"
    code, doc, _ = run_cli("rationalize", str(path), "--denominator-bound", "1000000")
    assert code == EXIT_OK
    assert doc["result"]["correlations"]["representation"] == "rational"


def test_facets_summary_and_classify(cache_dir, tmp_path):
    out = tmp_path / "facets.json"
    code, doc, _ = run_cli("facets", "--scenario", "1,2", "--out", str(out), env_dir=cache_dir)
    assert code == EXIT_OK
    r = doc["result"]
    assert r["vertex_count"] == 256 and r["facet_count"] == 2408
    assert r["orbit_count"] == 8 and r["nonadaptive_orbit_count"] == 12
    assert all(r["builtins_present"].values())
    code, doc, _ = run_cli("classify", str(out), "--group", "nonadaptive")
    assert code == EXIT_OK
    assert len(doc["result"]["orbits"]) == 12


def test_wire(uniform_file, tmp_path):
    w = SequentialWiring("B", 2, 2, (2, 2), (2, 2), ((0, 1), (0, 0, 0, 0)), (0, 0, 1, 1, 0, 0, 1, 1))
    path = tmp_path / "w.json"
    path.write_text(json.dumps(w.to_json()))
    code, doc, _ = run_cli("wire", uniform_file, "--wiring", str(path))
    assert code == EXIT_OK
    assert doc["result"]["bell_local"]
    assert all(v["exact"] == "0" for v in doc["result"]["chsh"])


def test_output_is_byte_stable(uniform_file):
    first = run_cli("member", "--set", "toloc", uniform_file)[2]
    second = run_cli("member", "--set", "toloc", uniform_file)[2]
    assert first == second


def test_malformed_input_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, doc, _ = run_cli("validate", str(bad))
    assert code == EXIT_INPUT and doc["status"] == "error"
    code, _, _ = run_cli("facets", "--scenario", "2,2")
    assert code == EXIT_INPUT
    code, _, _ = run_cli("maximize", "--set", "postloc", "--functional", "builtin:nope")
    assert code == EXIT_INPUT
    code, _, _ = run_cli("demo", "popescu", "--d", "2")
    assert code == EXIT_INPUT


def test_float_tensor_rejected_by_membership(tmp_path):
    path = tmp_path / "f.json"
    dump_json(uniform(BINARY_12, "float"), path)
    code, doc, _ = run_cli("member", "--set", "toloc", str(path))
    assert code == EXIT_INPUT
    assert "ational" in doc["error"]


def test_rationalization_over_cap_exits_3(tmp_path):
    path = tmp_path / "p.json"
    code, _, _ = run_cli("demo", "popescu", "--d", "4", "--export", str(path))
    code, doc, _ = run_cli("rationalize", str(path), "--denominator-bound", "3")
    assert code == EXIT_NUMERIC
    assert doc["error"].startswith("RationalizationError")


def test_usage_error_returns_2(capsys):
    assert main(["member"]) == EXIT_INPUT


def test_timing_flag(uniform_file):
    code, doc, _ = run_cli("--timing", "validate", uniform_file)
    assert code == EXIT_OK and doc["wall_time"] >= 0
