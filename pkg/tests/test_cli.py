import csv
import io
import json
import math
import subprocess
import sys

import pytest

from reflab.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_context(capsys):
    code, out, _ = call(capsys, "context", "--minpoly", "z^2-z-1")
    assert code == 0
    d = json.loads(out)
    assert d["classification"] == "PV"


def test_context_from_list(tmp_path, capsys):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"context": [-1, -1]}))
    code, out, _ = call(capsys, "context", "--problem", str(p))
    assert code == 0 and json.loads(out)["classification"] == "PV"


def test_mahler_poly(capsys):
    code, out, _ = call(capsys, "mahler", "--poly", "z^10+z^9-z^7-z^6-z^5-z^4-z^3+z+1")
    (r,) = rows(out)
    assert float(r["value"]) == pytest.approx(1.1762808182599191, abs=1e-12)
    assert r["method"] == "jensen_exact"


def test_mahler_filter(capsys):
    code, out, _ = call(capsys, "mahler", "--filter", "growth")
    assert float(rows(out)[0]["value"]) == pytest.approx((1 + math.sqrt(5)) / 2)


def test_sublevel(tmp_path, capsys):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"filter": "box", "task": {"L": 0.5, "v": [0.5, 1.0]}}))
    code, out, _ = call(capsys, "sublevel", "--problem", str(p))
    got = [float(r["measure"]) for r in rows(out)]
    assert got == pytest.approx([1 / 3, 1.0], abs=1e-9)


def test_fhat_grid(tmp_path, capsys):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"filter": "box", "task": {"y": [0.0, 0.5, 2.0]}}))
    code, out, _ = call(capsys, "fhat", "--problem", str(p))
    got = [float(r["abs"]) for r in rows(out)]
    assert got == pytest.approx([1.0, 2 / math.pi, 0.0], abs=1e-10)


def test_orbit(capsys):
    code, out, _ = call(capsys, "orbit", "--minpoly", "z^2-z-1", "--q", "1/3,0")
    d = json.loads(out)
    assert d["period"] == 8
    assert d["cycle_mean_log"] == pytest.approx(-0.75 * math.log(2), abs=1e-12)


def test_orbit_zero_on_cycle(capsys):
    code, out, _ = call(capsys, "orbit", "--minpoly", "z^2-z-1", "--q", "1/2,0")
    d = json.loads(out)
    assert code == 0 and d["cycle_mean_log"] is None and "zero_on_cycle" in d


def test_scaling(tmp_path, capsys):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"context": "z^2-z-1", "filter": "bernoulli", "task": {"q": ["1/3", 0], "k_max": 10}}))
    code, out, _ = call(capsys, "scaling", "--problem", str(p))
    r = rows(out)
    assert len(r) == 10
    assert float(r[9]["ratio"]) == pytest.approx(-0.9532626128639314, abs=1e-9)


def test_lattice(capsys):
    code, out, _ = call(capsys, "lattice", "--minpoly", "z^2-z-1", "--sigma", "0,1", "--L", "6")
    r = rows(out)
    assert len(r) == 11 and list(r[0]) == ["value", "l1", "l2"]


def test_multiscale_violation(tmp_path, capsys):
    p = tmp_path / "p.json"
    spec = {"lambda": {"minpoly": "z^2-z-1"}, "coeffs": [0.8090169943749475] * 2,
            "translations": [{"zlambda": [0, 0]}, {"zlambda": [1, 0]}]}
    p.write_text(json.dumps({"filter": spec, "task": {"sigma": [0, 1], "L": 10}}))
    code, _, err = call(capsys, "multiscale", "--problem", str(p))
    assert code == 4 and "TranslationOutsideXi" in err


def test_multiscale_holds(tmp_path, capsys):
    p = tmp_path / "p.json"
    spec = {"lambda": {"minpoly": "z^2-z-1"}, "coeffs": [0.8090169943749475] * 2,
            "translations": [{"zlambda": [0, 0]}, {"zlambda": [1, 2]}]}
    p.write_text(json.dumps({"filter": spec, "task": {"sigma": [0, 1], "L": 10}}))
    code, out, _ = call(capsys, "multiscale", "--problem", str(p))
    assert code == 0 and json.loads(out)["holds"] is True


def test_diffraction(capsys):
    code, out, _ = call(capsys, "diffraction", "--minpoly", "z^2-z-1", "--sigma", "0,1", "--L", "20")
    r = rows(out)
    assert float(r[0]["y"]) == 0.0 and float(r[0]["abs_S"]) == pytest.approx(float(r[0]["points"]))


def test_out_and_manifest(tmp_path, capsys):
    out = tmp_path / "ctx.json"
    code, _, _ = call(capsys, "context", "--minpoly", "z^3-z-1", "--out", str(out), "--seed", "5")
    assert code == 0
    man = json.loads((tmp_path / "ctx.json.manifest.json").read_text())
    assert man["command"] == "context" and man["seed"] == 5
    assert "--minpoly" in man["argv"]
    assert json.loads(out.read_text())["degree"] == 3


class TestErrors:
    def test_unknown_filter(self, capsys):
        code, _, err = call(capsys, "fhat", "--filter", "nope")
        assert code == 2 and "unknown filter" in err

    def test_bad_poly(self, capsys):
        code, _, _ = call(capsys, "context", "--minpoly", "z^2-2z+1")
        assert code == 2

    def test_missing_context(self, capsys):
        code, _, err = call(capsys, "orbit", "--q", "1/3,0")
        assert code == 2 and "context" in err

    def test_schema(self, tmp_path, capsys):
        p = tmp_path / "p.json"
        p.write_text(json.dumps({"context": "z^2-z-1", "colour": "red"}))
        code, _, _ = call(capsys, "context", "--problem", str(p))
        assert code == 2

    def test_unknown_task_field(self, tmp_path, capsys):
        p = tmp_path / "p.json"
        p.write_text(json.dumps({"filter": "box", "task": {"k_max": 3}}))
        code, _, err = call(capsys, "fhat", "--problem", str(p))
        assert code == 2 and "k_max" in err

    def test_unreadable(self, tmp_path, capsys):
        code, _, _ = call(capsys, "context", "--problem", str(tmp_path / "missing.json"))
        assert code == 2

    def test_numeric_failure_code(self, tmp_path, capsys):
        p = tmp_path / "p.json"
        p.write_text(json.dumps({"filter": "cantor", "task": {"alpha": 0.25, "k_max": 3}}))
        code, _, err = call(capsys, "scaling", "--problem", str(p))
        assert code == 3 and "ZeroHit" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "reflab", "context", "--minpoly", "z^2-z-1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["degree"] == 2
