import json
import subprocess
import sys

import numpy as np
import pytest

from hyperorbit.cli import main
from hyperorbit.constructor import reference_example


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def family_file(tmp_path):
    path = tmp_path / "family.json"
    path.write_text(json.dumps({"n": 2, "generators": [a.tolist() for a in reference_example()]}))
    return str(path)


def test_analyze_reference(family_file, capsys):
    code, out, _ = run(["analyze", family_file], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["schema_version"] == "1.0"
    assert rep["hypercyclic"] is True and rep["index"] == 1
    assert rep["partition"] == {"t_blocks": [2], "b_blocks": []}
    assert rep["verdict"]["status"] == "CertifiedDense"
    assert rep["input_digest"].startswith("sha256:")


def test_analyze_printed_reports_mismatch(tmp_path, capsys):
    path = tmp_path / "printed.json"
    path.write_text(json.dumps({"generators": [a.tolist() for a in reference_example("printed")]}))
    code, out, _ = run(["analyze", str(path)], capsys)
    rep = json.loads(out)
    bad = [c for c in rep["diagnostics"]["reference_checks"] if not c["consistent"]]
    assert code == 0 and bad and bad[0]["worst_entry"] == [1, 0]
    assert rep["verdict"]["status"] != "CertifiedDense"


def test_analyze_diagonal_pair(tmp_path, capsys):
    rng = np.random.default_rng(0)
    gens = [np.diag(rng.uniform(0.5, 2, 2)).tolist() for _ in range(2)]
    path = tmp_path / "d.json"
    path.write_text(json.dumps({"generators": gens}))
    code, out, _ = run(["analyze", str(path)], capsys)
    rep = json.loads(out)
    assert rep["hypercyclic"] is False and rep["verdict"]["obstruction"] == "CountBound"


def test_exit_codes(tmp_path, capsys):
    nc = tmp_path / "nc.json"
    nc.write_text(json.dumps({"generators": [[[0, 1], [0, 0]], [[0, 0], [1, 0]]]}))
    code, _, err = run(["analyze", str(nc)], capsys)
    assert code == 2 and "0 and 1" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["analyze", str(bad)], capsys)[0] == 3
    shape = tmp_path / "shape.json"
    shape.write_text(json.dumps({"n": 2, "generators": [[[1, 2, 3]]]}))
    assert run(["analyze", str(shape)], capsys)[0] == 3
    assert run(["analyze", str(tmp_path / "missing.json")], capsys)[0] == 3
    fam = tmp_path / "f.json"
    # three non-escaping generators: 401^3 exponent tuples exceed the work budget
    fam.write_text(json.dumps({"generators": [np.eye(2).tolist()] * 3}))
    assert run(["simulate", str(fam), "--v0", "1,0", "--max-exp", "400"], capsys)[0] == 4


def test_construct_then_analyze(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert run(["construct", "--t-blocks", "1", "--t-blocks", "1", "-o", str(out)], capsys)[0] == 0
    data = json.loads(out.read_text())
    assert len(data["generators"]) == 3 and data["recipe"]["partition"]["t_blocks"] == [1, 1]
    code, rep, _ = run(["analyze", str(out)], capsys)
    assert json.loads(rep)["hypercyclic"] is True


def test_density_command(tmp_path, capsys):
    vec = tmp_path / "h.json"
    s2, s3 = 2**0.5, 3**0.5
    vec.write_text(json.dumps({"n": 2, "nat_generators": [[1, 0], [0, 1], [-s2, -s3]], "lattice_generators": []}))
    pts = tmp_path / "pts.csv"
    code, out, _ = run(
        ["density", str(vec), "--coeff-bound", "60", "--box", "31.4", "--grid", "50", "--emit-points", str(pts)],
        capsys,
    )
    rep = json.loads(out)
    assert code == 0 and rep["verdict"]["status"] == "CertifiedDense"
    rows = pts.read_text().splitlines()
    assert rows[0] == "x1,x2" and len(rows) - 1 == rep["coverage"]["points_in_box"]


def test_density_reads_analysis_report(family_file, tmp_path, capsys):
    rep = tmp_path / "rep.json"
    run(["analyze", family_file, "-o", str(rep)], capsys)
    code, out, _ = run(["density", str(rep)], capsys)
    assert code == 0 and json.loads(out)["verdict"]["status"] == "CertifiedDense"


def test_simulate_command(family_file, tmp_path, capsys):
    pts = tmp_path / "o.csv"
    code, out, _ = run(["simulate", family_file, "--v0", "auto", "--max-exp", "30", "--emit-points", str(pts)], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["sample"]["count"] > 0
    assert len(pts.read_text().splitlines()) == rep["sample"]["count"] + 1
    assert run(["simulate", family_file, "--v0", "1,2,3"], capsys)[0] == 3


def test_log_command(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"matrix": [[0, -1], [1, 0]]}))
    code, out, _ = run(["log", "--matrix", str(m), "--partition", ";1", "--branch", "1"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["branch"] == [1]
    assert rep["logs"][0]["log"][1][0] == pytest.approx(2.5 * np.pi)
    assert run(["log", "--matrix", str(m), "--partition", "2;"], capsys)[0] == 2
    assert run(["log", "--matrix", str(m), "--partition", "x;"], capsys)[0] == 3


def test_example_command(capsys):
    code, out, _ = run(["example", "--variant", "printed"], capsys)
    fam = json.loads(out)
    assert code == 0 and fam["generators"][1] == [[-1.0, 0.0], [np.pi, -1.0]]
    code, out, _ = run(["example"], capsys)
    both = json.loads(out)
    assert both["printed_square_mismatch"] == pytest.approx(4 * np.pi)


def test_deterministic_bytes(family_file):
    cmd = [sys.executable, "-m", "hyperorbit.cli", "analyze", family_file, "--seed", "3"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b


def test_console_script_available():
    res = subprocess.run(["hyperorbit", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "hyperorbit" in res.stdout
