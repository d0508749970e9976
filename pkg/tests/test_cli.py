import json

import pytest

from wintgen.cli import main

CYL = """
[immersion]
variables = ["u", "v", "s"]
components = ["u", "v", "u^2 - v^2", "2*u*v", "s"]
[domain]
min = [-1.0, -1.0, -1.0]
max = [1.0, 1.0, 1.0]
grid = [3, 3, 3]
"""
GRAPH = """
[immersion]
variables = ["u", "v", "w"]
components = ["u", "v", "w", "u^2+v^2", "u*v"]
[domain]
min = [-1.0, -1.0, -1.0]
max = [1.0, 1.0, 1.0]
grid = [3, 3, 3]
"""
SPHERE = """
[immersion]
variables = ["u", "v", "w"]
components = ["cos(u)*cos(v)*cos(w)", "cos(u)*cos(v)*sin(w)", "cos(u)*sin(v)", "sin(u)"]
[domain]
min = [-0.5, -0.5, -0.5]
max = [0.5, 0.5, 0.5]
grid = [2, 2, 2]
"""


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return _write


def _records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_check_ideal_cylinder(write, capsys):
    assert main(["check", "--config", write("c.toml", CYL)]) == 0
    recs = _records(capsys.readouterr().out)
    assert len(recs) == 28 and recs[-1]["type"] == "summary"
    assert recs[-1]["wintgen_ideal_on_grid"] is True
    assert set(recs[0]) >= {"point", "s", "s_perp", "H2", "deficit", "umbilic", "equality", "mu0", "rho", "residuals"}
    assert recs[-1]["config"]["immersion"]["variables"] == ["u", "v", "s"]


def test_check_graph_reports_deficit(write, capsys):
    assert main(["check", "--config", write("g.toml", GRAPH)]) == 0
    summary = _records(capsys.readouterr().out)[-1]
    assert summary["wintgen_ideal_on_grid"] is False and summary["min_deficit"] > 0


def test_check_skips_are_logged(write, capsys):
    text = CYL.replace('"s"]', '"sqrt(s)"]').replace('variables = ["u", "v", "sqrt(s)"]', 'variables = ["u", "v", "s"]')
    assert main(["check", "--config", write("k.toml", text)]) == 0
    recs = _records(capsys.readouterr().out)
    skips = [r for r in recs if r["type"] == "skip"]
    points = [r for r in recs if r["type"] == "point"]
    assert skips and all(r["reason"] for r in skips)
    assert len(points) == 27 - len(skips) == recs[-1]["evaluated"]


def test_check_out_and_csv(write, tmp_path):
    out = tmp_path / "r.jsonl"
    assert main(["check", "--config", write("c.toml", CYL), "--out", str(out), "--csv"]) == 0
    assert len(out.read_text().splitlines()) == 28
    assert (tmp_path / "r.csv").read_text().startswith("index,point,s,s_perp")


def test_config_error_exit(write, capsys):
    assert main(["check", "--config", write("b.toml", CYL + "[options]\ntol_exat = 1\n")]) == 2
    assert "tol_exat" in capsys.readouterr().err
    assert main(["check", "--config", "/nonexistent.toml"]) == 2


def test_moebius_report(tmp_path, capsys):
    cfg = tmp_path / "cone.toml"
    assert main(["construct", "cone", "--base", "veronese", "--out", str(cfg)]) == 0
    assert main(["moebius", "--config", str(cfg), "--point", "1.1,1.2,0.2"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["residuals"]["B_norm"] <= 1e-10
    assert abs(rec["canonical"]["mu"] - 6**-0.5) <= 1e-6
    assert set(rec["integrability"]) == {"codazzi_A", "ricci_C", "codazzi_B", "gauss", "ricci_normal", "ricci_contraction"}


def test_moebius_umbilic_exit(write, capsys):
    assert main(["moebius", "--config", write("s.toml", SPHERE), "--point", "0.1,0.2,0.3"]) == 1
    assert "UmbilicPoint" in capsys.readouterr().err
    assert main(["moebius", "--config", write("s.toml", SPHERE), "--point", "0.1,0.2"]) == 2


@pytest.mark.parametrize(
    "args, ideal",
    [
        (["cone", "--base", "veronese"], True),
        (["cylinder", "--base", "holomorphic:z^2", "--extra", "1"], True),
        (["cone", "--base", "clifford_torus"], False),
    ],
)
def test_construct_then_check(args, ideal, tmp_path, capsys):
    cfg = tmp_path / "x.toml"
    assert main(["construct", *args, "--out", str(cfg)]) == 0
    assert main(["check", "--config", str(cfg)]) == 0
    assert _records(capsys.readouterr().out)[-1]["wintgen_ideal_on_grid"] is ideal


def test_construct_from_config_base(write, tmp_path, capsys):
    base = write("base.toml", CYL.replace('variables = ["u", "v", "s"]', 'variables = ["u", "v"]')
                 .replace(', "s"]', "]").replace("[-1.0, -1.0, -1.0]", "[-1.0, -1.0]")
                 .replace("[1.0, 1.0, 1.0]", "[1.0, 1.0]").replace("[3, 3, 3]", "[3, 3]"))
    assert main(["construct", "cylinder", "--base", base]) == 0
    assert "[immersion]" in capsys.readouterr().out


def test_construct_errors(capsys):
    assert main(["construct", "cone", "--base", "holomorphic:z^2"]) == 1
    assert "NotOnSphere" in capsys.readouterr().err


def test_verify_suite(capsys):
    assert main(["verify", "--suite", "ddvv", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "normal-form oracle (16 = 16)" in out and "4/4 checks passed" in out
    assert main(["verify", "--suite", "bogus"]) == 2
    capsys.readouterr()
    assert main(["verify", "invariance"]) == 0
    assert "2/2 checks passed" in capsys.readouterr().out


def test_ellipse(tmp_path, capsys):
    from wintgen import constructions as C
    from wintgen.config import config_for_spec, dumps_config

    for name, circle in (("veronese", True), ("holomorphic:z^3", True), ("clifford_torus", False)):
        p = tmp_path / "e.toml"
        p.write_text(dumps_config(config_for_spec(C.catalog(name).spec)))
        assert main(["ellipse", "--config", str(p)]) == 0
        summary = _records(capsys.readouterr().out)[-1]
        assert summary["circle_away_from_degenerate"] is circle
        assert summary["agrees_with_equality"] is True
