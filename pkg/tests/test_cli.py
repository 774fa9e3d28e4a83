import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from onorm.certify import A3
from onorm.cli import cmd_dispatch, main
from onorm.hadamard import is_hadamard
from onorm.matrix import parse_matrix, write_matrix


@pytest.fixture
def a_file(tmp_path):
    path = tmp_path / "A.txt"
    write_matrix(path, A3)
    return path


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spherical(capsys):
    code, out, _ = run(["spherical", "--n", "3", "--ks", "1"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "1/2"
    code, out, _ = run(["spherical", "--n", "2", "--ks", "1,1"], capsys)
    assert out.splitlines()[0] == "1/2 * (2/pi)^1"
    assert float(out.splitlines()[1]) == pytest.approx(1 / np.pi, rel=1e-15)
    code, _, err = run(["spherical", "--n", "2", "--ks", "1,1,1"], capsys)
    assert code == 1 and err


def test_certify(a_file, tmp_path, capsys):
    out_json = tmp_path / "cert.json"
    code, out, _ = run(["certify", "--in", str(a_file), "--out", str(out_json)], capsys)
    assert code == 0
    assert "verdict: LocalMax" in out
    data = json.loads(out_json.read_text())
    assert data["result"]["verdict"] == "LocalMax"
    assert np.allclose(data["result"]["eigenvalues"], [1, 2, 2])


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["badcmd"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["optimize", "--n", "three"])
    assert exc.value.code == 2


def test_subprocess_exit_codes():
    r = subprocess.run([sys.executable, "-m", "onorm", "badcmd"], capture_output=True)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "onorm", "spherical", "--n", "3", "--ks", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("1/2\n")


def test_missing_file_is_failure(tmp_path, capsys):
    code, _, err = run(["certify", "--in", str(tmp_path / "nope.txt")], capsys)
    assert code == 1 and "nope" in err


def test_optimize(tmp_path, capsys):
    out = tmp_path / "opt.json"
    code, _, _ = run(["optimize", "--n", "3", "--restarts", "5", "--seed", "11", "--out", str(out)], capsys)
    assert code == 0
    data = json.loads(out.read_text())
    res = data["result"]
    assert res["objective"] == pytest.approx(5, abs=1e-6)
    assert res["seed"] == 11 and data["manifest"]["seed"] == 11
    assert res["certificate"]["verdict"] == "LocalMax"
    assert parse_matrix(res["matrix"]).n == 3
    assert data["manifest"]["generator"]


def test_optimize_from_start_file(tmp_path, capsys):
    start = tmp_path / "I.txt"
    write_matrix(start, np.eye(3))
    code, out, _ = run(["optimize", "--start", str(start), "--seed", "1"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["objective"] == pytest.approx(5, abs=1e-6)


def test_optimize_rejects_p2(capsys):
    code, _, err = run(["optimize", "--n", "3", "--p", "2", "--seed", "1"], capsys)
    assert code == 1 and "p" in err


def test_seed_recorded_when_omitted(tmp_path, capsys):
    out = tmp_path / "opt.json"
    run(["optimize", "--n", "2", "--restarts", "2", "--out", str(out)], capsys)
    data = json.loads(out.read_text())
    seed = data["manifest"]["seed"]
    assert isinstance(seed, int) and 0 <= seed < 2**64
    # re-running with the recorded seed reproduces the result
    out2 = tmp_path / "opt2.json"
    run(["optimize", "--n", "2", "--restarts", "2", "--seed", str(seed), "--out", str(out2)], capsys)
    assert json.loads(out2.read_text())["result"] == data["result"]


def test_manifest_rerun_is_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        out = tmp_path / f"m{i}.json"
        run(["moment", "--n", "3", "--k", "1", "--samples", "60000", "--seed", "5", "--out", str(out)], capsys)
        outs.append(json.loads(out.read_text()))
    assert outs[0]["result"] == outs[1]["result"]
    assert abs(outs[0]["result"]["mean"] - 4.5) <= 4 * outs[0]["result"]["std_error"]
    assert outs[0]["result"]["exact"] == 4.5
    params = outs[0]["manifest"]["parameters"]
    assert params["n"] == 3 and params["samples"] == 60000


@pytest.mark.parametrize("fmt", ["json", "csv", "text"])
def test_bounds_formats(fmt, capsys):
    code, out, _ = run(["bounds", "--n", "3-5", "--format", fmt, "--seed", "1"], capsys)
    assert code == 0
    if fmt == "json":
        reports = json.loads(out)["result"]["reports"]
        assert [r["n"] for r in reports] == [3, 4, 5]
    elif fmt == "csv":
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 3 and rows[1]["cauchy_schwarz"] == "8.0"
    else:
        assert "N = 4" in out


def test_bounds_empirical(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, _, _ = run(["bounds", "--n", "3,4", "--empirical", "--restarts", "5", "--seed", "2",
                      "--format", "csv", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert float(rows[0]["empirical_best"]) == pytest.approx(5, abs=1e-6)
    assert float(rows[1]["empirical_best"]) == pytest.approx(8, abs=1e-6)


def test_hadamard_and_detect(tmp_path, capsys):
    path = tmp_path / "h8.txt"
    code, _, _ = run(["hadamard", "--order", "8", "--out", str(path)], capsys)
    assert code == 0
    entries = parse_matrix(path.read_text()).entries
    assert entries.shape == (8, 8) and is_hadamard(entries)
    scaled = tmp_path / "h8n.txt"
    write_matrix(scaled, entries / np.sqrt(8))
    code, out, _ = run(["detect", "--in", str(scaled)], capsys)
    lines = out.splitlines()
    assert lines[0] == "true" and len(lines) == 9
    code, _, err = run(["hadamard", "--order", "12"], capsys)
    assert code == 2 and "power of two" in err


def test_detect_false(a_file, capsys):
    code, out, _ = run(["detect", "--in", str(a_file)], capsys)
    assert code == 0 and out.splitlines()[0] == "false"


def test_cmd_dispatch_alias(capsys):
    assert cmd_dispatch(["spherical", "--n", "3", "--ks", "2"]) == 0
    assert capsys.readouterr().out.startswith("1/3\n")
