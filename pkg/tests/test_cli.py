import json
import math

import pytest

from gm2 import errors
from gm2.cli import main

SQUARE = {"vertices": [[1, -1], [1, 1], [-1, 1], [-1, -1]]}


def run(tmp_path, *argv, out="out"):
    d = tmp_path / out
    code = main(["--out", str(d), *argv])
    return code, d


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def test_exit_codes_distinct():
    classes = [c for c in vars(errors).values()
               if isinstance(c, type) and issubclass(c, errors.GM2Error) and c is not errors.GM2Error]
    codes = [c.exit_code for c in classes]
    assert len(codes) == len(set(codes))
    assert all(c not in (0, 1, 2) for c in codes)


def test_constant_solutions(tmp_path):
    code, d = run(tmp_path, "constant-solutions", "--C", "0.05")
    assert code == 0
    out = json.loads((d / "constant-solutions.json").read_text())
    assert out["kind"] == "two"
    assert out["r2"] < 1 < out["r1"]
    code, d = run(tmp_path, "constant-solutions", "--C", "0.2", out="o2")
    assert json.loads((d / "constant-solutions.json").read_text())["kind"] == "none"


def test_constant_solutions_domain_error(tmp_path, capsys):
    code, _ = run(tmp_path, "constant-solutions", "--C", "-1")
    assert code == errors.DomainError.exit_code
    assert "DomainError" in capsys.readouterr().err


def test_measure(tmp_path):
    code, d = run(tmp_path, "measure", "--polygon", write(tmp_path, "sq.json", SQUARE))
    assert code == 0
    out = json.loads((d / "measure.json").read_text())
    assert len(out["atoms"]) == 4
    assert out["total"] == pytest.approx(4 * 0.16519087103401667, rel=1e-14)
    header = (d / "measure.csv").read_text().splitlines()[0]
    assert header == "angle,weight"


def test_measure_parse_errors(tmp_path):
    code, _ = run(tmp_path, "measure", "--polygon", write(tmp_path, "bad.json", "{not json"))
    assert code == errors.ParseError.exit_code
    code, _ = run(tmp_path, "measure", "--polygon", str(tmp_path / "missing.json"))
    assert code == errors.IoError.exit_code
    code, _ = run(tmp_path, "measure", "--polygon",
                  write(tmp_path, "line.json", {"vertices": [[0, 0], [1, 0], [2, 0]]}))
    assert code == errors.DegenerateBody.exit_code


def test_density(tmp_path):
    sup = {"n": 16, "values": [1.0] * 16}
    code, d = run(tmp_path, "density", "--support", write(tmp_path, "h.json", sup))
    assert code == 0
    out = json.loads((d / "density.json").read_text())
    assert out["total"] == pytest.approx(math.exp(-0.5), rel=1e-14)


def test_theta_with_shoot(tmp_path):
    code, d = run(tmp_path, "theta", "--c", "0.5", "--h0", "0.3", "--shoot")
    assert code == 0
    out = json.loads((d / "theta.json").read_text())
    assert out["theta"] == pytest.approx(out["theta_shoot"], abs=1e-9)
    assert out["pair"]["h0"] == 0.3


def test_theta_invalid_pair(tmp_path):
    code, _ = run(tmp_path, "theta", "--c", "0.5", "--h0", "0.9")
    assert code == errors.InvalidPair.exit_code


def test_scan_theta(tmp_path):
    code, d = run(tmp_path, "scan-theta", "--c", "0.1", "0.6", "--n", "8", "--k-max", "3")
    assert code == 0
    out = json.loads((d / "scan-theta.json").read_text())
    assert [s["c"] for s in out["scans"]] == [0.1, 0.6]
    rows = (d / "theta_surface.csv").read_text().splitlines()
    assert rows[0] == "h0,r,theta,c"
    assert len(rows) == 17
    # the left end at c = 0.6 diverges and is written as an empty cell
    assert rows[9].split(",")[2] == ""


def test_phase_portrait(tmp_path):
    code, d = run(tmp_path, "phase-portrait", "--c", "0.3", "--h0", "0.1")
    assert code == 0
    out = json.loads((d / "phase-portrait.json").read_text())
    assert out["max_drift"] < 1e-10
    assert (d / "trajectory.csv").read_text().startswith("theta,h,hp,drift\n")


def test_search_periodic(tmp_path):
    code, d = run(tmp_path, "search-periodic", "--c", "0.3", "--n", "8", "--k-max", "4")
    assert code == 0
    out = json.loads((d / "search-periodic.json").read_text())
    assert out["found_nonconstant"] == []


def test_solve(tmp_path):
    f = write(tmp_path, "f.json", {"fourier_cos": [0.05, 0.015]})
    code, d = run(tmp_path, "solve", "--f", f, "--n", "64")
    assert code == 0
    out = json.loads((d / "solution.json").read_text())
    assert out["branch"] == "small" and out["gamma2"] < 0.5
    assert (d / "solution.csv").read_text().startswith("theta,h,density,f\n")


def test_solve_errors(tmp_path):
    f = write(tmp_path, "f.json", {"values": [0.08] * 32})
    code, _ = run(tmp_path, "solve", "--f", f)
    assert code == errors.L1TooLarge.exit_code
    f = write(tmp_path, "g.json", {"fourier_cos": {"1": 0.01}, "n": 32})
    code, _ = run(tmp_path, "solve", "--f", f)
    assert code == errors.ParseError.exit_code


def test_iso_check(tmp_path):
    code, d = run(tmp_path, "iso-check", "--random", "5", "--seed", "7",
                  "--body", write(tmp_path, "sq.json", SQUARE))
    assert code == 0
    out = json.loads((d / "iso-check.json").read_text())
    assert out["all_hold"] and len(out["reports"]) == 6
    code, _ = run(tmp_path, "iso-check", out="none")
    assert code == errors.ParseError.exit_code


def test_usage_error_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["theta", "--c", "0.5"])
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [
    ["scan-theta", "--c", "0.3", "--n", "8"],
    ["phase-portrait", "--c", "0.3", "--h0", "0.1"],
    ["iso-check", "--random", "4", "--seed", "3"],
])
def test_byte_identical_outputs(tmp_path, argv):
    _, a = run(tmp_path, *argv, out="a")
    _, b = run(tmp_path, *argv, out="b")
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()
