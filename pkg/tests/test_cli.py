from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

import catalog
from nilcube import __version__
from nilcube.cli import main, parse_cocycle_table, format_cocycle_table
from nilcube.config import ConfigError, format_table_spec, parse_space
from nilcube.cubespace import structure_group
from nilcube.groups import make_heisenberg
from nilcube.host_kra import HostKraSpace, dk_space

HERE = Path(__file__).parent
FIX = HERE / "fixtures"
GOLDEN = HERE / "golden"
REGEN = os.environ.get("NILCUBE_REGEN_GOLDEN") == "1"


def run_cli(tmp_path, *argv) -> tuple[int, dict, str]:
    out = tmp_path / "report.json"
    code = main([*map(str, argv), "--out", str(out)])
    text = out.read_text()
    return code, json.loads(text), text


GOLDEN_CASES = {
    "check_dk_z3": ("check", "--spec", FIX / "dk_z3.ini"),
    "translations_dk_z3": ("translations", "--spec", FIX / "dk_z3.ini"),
    "translations_point": ("translations", "--spec", FIX / "point.ini", "--levels", "0-2"),
    "solve_coboundary": ("solve", "--spec", FIX / "dk_z3.ini", "--cocycle", FIX / "d1z3_coboundary.txt"),
    "solve_zero": ("solve", "--spec", FIX / "dk_z3.ini", "--cocycle", FIX / "d1z3_zero.txt"),
    "solve_obstruction": ("solve", "--spec", FIX / "dk_z2.ini", "--cocycle", FIX / "d1z2_bilinear.txt",
                          "--method", "linear"),
    "lift_extension": ("lift", "--spec", FIX / "extension.ini", "--map", "1,0"),
    "lift_extension_identity": ("lift", "--spec", FIX / "extension.ini"),
}


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_reports(name, tmp_path):
    # run from the repository root so the recorded paths are stable
    argv = [str(a.relative_to(HERE.parent)) if isinstance(a, Path) else a for a in GOLDEN_CASES[name]]
    cwd = os.getcwd()
    os.chdir(HERE.parent)
    try:
        code, report, text = run_cli(tmp_path, *argv)
    finally:
        os.chdir(cwd)
    path = GOLDEN / f"{name}.json"
    if REGEN:
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(text)
    assert text == path.read_text()
    assert code == report["exit_code"]


def test_golden_verdicts():
    def load(name):
        return json.loads((GOLDEN / f"{name}.json").read_text())

    assert load("check_dk_z3")["results"]["all_passed"]
    levels = load("translations_dk_z3")["results"]["levels"]
    assert [levels[k]["order"] for k in ("1", "2")] == [3, 1]
    point = load("translations_point")["results"]["levels"]
    assert all(v["order"] == 1 for v in point.values())
    solved = load("solve_coboundary")["results"]
    assert solved["linear"]["round_trip"] and solved["averaging"]["round_trip"]
    assert solved["cross_validation"] == {"difference_closed": True, "difference_constant": True}
    zero = load("solve_zero")["results"]
    assert len(set(zero["averaging"]["solution"].values())) == 1
    obstructed = load("solve_obstruction")
    assert obstructed["exit_code"] == 1 and obstructed["results"]["linear"]["certificate"]["verified"]
    lift = load("lift_extension")
    assert lift["exit_code"] == 1 and not lift["results"]["lifted"]
    assert load("lift_extension_identity")["results"]["lifted"]


def test_reports_are_byte_identical(tmp_path):
    args = ("translations", "--spec", FIX / "dk_z3z3.ini", "--levels", "1-2", "--seed", "7")
    first = run_cli(tmp_path, *args)[2]
    second = run_cli(tmp_path, *args)[2]
    assert first == second
    report = json.loads(first)
    assert report["seed"] == 7 and report["tool_version"] == __version__
    assert len(report["inputs_digest"]) == 64
    assert "timings" not in report
    assert [report["results"]["levels"][k]["order"] for k in ("1", "2")] == [9, 1]


def test_digest_depends_on_seed(tmp_path):
    a = run_cli(tmp_path, "check", "--spec", FIX / "dk_z3.ini", "--seed", "1")[1]
    b = run_cli(tmp_path, "check", "--spec", FIX / "dk_z3.ini", "--seed", "2")[1]
    assert a["inputs_digest"] != b["inputs_digest"]


def test_timings_flag(tmp_path):
    report = run_cli(tmp_path, "check", "--spec", FIX / "dk_z3.ini", "--timings")[1]
    assert report["timings"]["total_seconds"] >= 0


def test_stdout_and_console_script(capsys):
    assert main(["check", "--spec", str(FIX / "point.ini")]) == 0
    assert json.loads(capsys.readouterr().out)["exit_code"] == 0
    proc = subprocess.run([sys.executable, "-m", "nilcube.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout


def test_empty_file_is_a_parse_error(tmp_path):
    code, report, _ = run_cli(tmp_path, "check", "--spec", FIX / "empty.ini")
    assert code == 2
    assert report["error"]["line"] == 1 and report["error"]["column"] == 1


def test_bad_key_is_located(tmp_path):
    spec = tmp_path / "bad.ini"
    spec.write_text("[space]\nkind = dk\nmoduli = 3\ndegree = x\n")
    code, report, _ = run_cli(tmp_path, "check", "--spec", spec)
    assert code == 2 and report["error"]["line"] == 4 and report["error"]["column"] == 10
    with pytest.raises(ConfigError):
        parse_space("[space]\nkind = dk\nmoduli = 3\ndegree = 1\nmodulus = 3\n")
    with pytest.raises(ConfigError):
        parse_space("[space]\nkind = torus\n")


def test_usage_errors():
    assert main([]) == 2
    assert main(["check"]) == 2
    assert main(["check", "--spec", str(FIX / "dk_z3.ini"), "--seed", "-1"]) == 2


def test_missing_file(tmp_path):
    code, report, _ = run_cli(tmp_path, "check", "--spec", tmp_path / "nope.ini")
    assert code == 2 and report["error"]["kind"] == "FileNotFoundError"


def test_cap_exceeded_gives_partial_report(tmp_path, monkeypatch):
    monkeypatch.setenv("NILCUBE_MAX_POINTS", "5")
    code, report, _ = run_cli(tmp_path, "translations", "--spec", FIX / "dk_z3z3.ini", "--levels", "1-2")
    assert code == 3
    assert report["results"]["levels"]["1"]["complete"] is False


def test_corrupted_table_fails_check(tmp_path):
    from test_cubespace import square_orbit

    X = dk_space(catalog.Z3, 1, max_dim=2)
    spec = tmp_path / "corrupt.ini"
    spec.write_text(format_table_spec(X, 2, degree=1, remove={2: square_orbit((0, 1, 1, 2))}))
    code, report, _ = run_cli(tmp_path, "check", "--spec", spec)
    checks = report["results"]["checks"]
    assert code == 1
    assert not checks["glueing"]["passed"] and checks["glueing"]["witness"]
    assert not checks["completion_2"]["passed"] and checks["completion_2"]["witness"]


def test_cocycle_axiom_failure_is_rejected(tmp_path):
    table = (FIX / "d1z3_zero.txt").read_text().replace("0,1,2,0 0", "0,1,2,0 1/7")
    assert "1/7" in table
    path = tmp_path / "bad.txt"
    path.write_text(table)
    code, report, _ = run_cli(tmp_path, "solve", "--spec", FIX / "dk_z3.ini", "--cocycle", path)
    assert code == 1
    res = report["results"]
    assert res["accepted"] is False and res["cocycle_check"]["witness"]["axiom"]


def test_cocycle_table_errors():
    X = dk_space(catalog.Z3, 1, max_dim=2)
    with pytest.raises(ConfigError):
        parse_cocycle_table("", X)
    with pytest.raises(ConfigError) as info:
        parse_cocycle_table("0,1 0\n0,1,2 0\n", X)
    assert info.value.line == 2
    with pytest.raises(ConfigError):
        parse_cocycle_table("0,5 0\n", X)
    with pytest.raises(ConfigError):
        parse_cocycle_table("0,1 0\n@ torus=1\n", X)


def test_cocycle_table_round_trip():
    X = dk_space(catalog.Z3, 1, max_dim=2)
    text = (FIX / "d1z3_coboundary.txt").read_text()
    rho = parse_cocycle_table(text, X)
    assert format_cocycle_table(rho) == text


def test_heisenberg_translations_list_left_multiplications(tmp_path):
    code, report, _ = run_cli(tmp_path, "translations", "--spec", FIX / "heisenberg3.ini", "--levels", "1")
    level = report["results"]["levels"]["1"]
    assert code == 0 and level["order"] >= 27
    assert len(level["left_multiplications"]) == 27 and level["left_multiplications_contained"]


def test_heisenberg_lift(tmp_path):
    H = HostKraSpace(make_heisenberg(3), max_dim=3)
    sg = structure_group(H, 2)
    fm = sg.factor
    G = H.group
    g = G.encode(0, 1, 0)
    phi_bar = [fm(G.mul(g, int(fm.fibers[y][0]))) for y in range(9)]
    code, report, _ = run_cli(tmp_path, "lift", "--spec", FIX / "heisenberg3.ini",
                              "--map", ",".join(map(str, phi_bar)))
    res = report["results"]
    assert code == 0 and res["lifted"]
    lift = res["lift"]
    assert [fm(lift[x]) for x in range(27)] == [phi_bar[fm(x)] for x in range(27)]
