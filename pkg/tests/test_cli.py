import json
import subprocess
import sys
from pathlib import Path

import pytest

from telegrav.cli import main

DATA = Path(__file__).parent / "data"


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_presets_listing(capsys):
    code, out, _ = run(["presets"], capsys)
    assert code == 0
    assert out.split() == ["flrw", "minkowski", "rindler", "schwarzschild", "schwarzschild_isotropic", "random"]


def test_minkowski_all_checks_pass(capsys):
    code, out, _ = run(["run", "--preset", "minkowski", "--checks", "all", "--points", "30", "--format", "json"], capsys)
    assert code == 0
    report = json.loads(out)
    assert set(report) >= {"scenario", "seed", "conventions", "checks", "energy"}
    assert set(report["conventions"]) == {"delta_signs", "orientation", "index_dictionary"}
    gated = [c for c in report["checks"] if c["name"] != "teleparallel_torsion_nonzero"]
    assert all(c["pass"] for c in gated) and max(c["max_abs"] for c in gated) <= 1e-12


def test_failing_check_gives_exit_one(capsys):
    code, out, _ = run(["run", "--preset", "flrw", "--checks", "field-eq", "--points", "10", "--tol", "field_equation=0"], capsys)
    assert code == 1
    assert "FAIL  field_equation" in out


@pytest.mark.parametrize(
    "args",
    [
        ["run", "--preset", "nope"],
        ["run", "--manifest", str(DATA / "missing.toml")],
    ],
)
def test_scenario_errors_give_exit_two(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 2 and "error" in err


@pytest.mark.parametrize(
    "args",
    [
        ["run", "--preset", "flrw", "--checks", "bogus"],
        ["run", "--preset", "flrw", "--tol", "bogus=1"],
        ["run", "--preset", "flrw", "--tol", "field_equation"],
        ["run", "--preset", "flrw", "--radii", "1,2"],
        ["run"],
    ],
)
def test_bad_arguments_exit_two(args, capsys):
    with pytest.raises(SystemExit) as info:
        main(args)
    assert info.value.code == 2


def test_manifest_run_and_outputs(tmp_path, capsys):
    args = ["run", "--manifest", str(DATA / "schwarzschild.toml"), "--checks", "field-eq,nice-formula", "--points", "20", "--format", "both", "--out", str(tmp_path)]
    code, out, _ = run(args, capsys)
    assert code == 0
    assert (tmp_path / "report.txt").read_text() == out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["scenario"] == "schwarzschild-manifest"
    assert [c["name"] for c in report["checks"]] == sorted(c["name"] for c in report["checks"])


def test_json_is_byte_identical_across_runs(tmp_path):
    outs = []
    for i in range(2):
        d = tmp_path / str(i)
        cmd = [sys.executable, "-m", "telegrav", "run", "--preset", "rindler", "--checks", "all", "--points", "20", "--seed", "3", "--format", "json", "--out", str(d)]
        proc = subprocess.run(cmd, capture_output=True, check=False)
        assert proc.returncode == 0, proc.stderr.decode()
        outs.append((d / "report.json").read_bytes())
    assert outs[0] == outs[1]


def test_seed_changes_sample(capsys):
    a = run(["run", "--preset", "random", "--checks", "cartan", "--points", "10", "--seed", "1", "--format", "json"], capsys)[1]
    b = run(["run", "--preset", "random", "--checks", "cartan", "--points", "10", "--seed", "2", "--format", "json"], capsys)[1]
    assert json.loads(a)["checks"] != json.loads(b)["checks"]
