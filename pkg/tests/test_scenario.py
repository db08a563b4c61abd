from pathlib import Path

import numpy as np
import pytest

from telegrav.scenario import PRESETS, ManifestError, load_manifest, parse_manifest, preset, sample_points

DATA = Path(__file__).parent / "data"

GOOD = """
[chart]
coords = ["t", "x", "y", "z"]
domain = { t = [-1, 1], x = [-1, 1], y = [-1, 1], z = [-1, 1] }

[tetrad]
g0.dt = "1"
g1.dx = "1"
g2.dy = "1"
g3.dz = "1"
"""


def test_minkowski_preset_is_identity():
    s = preset("minkowski")
    assert s.tetrad == [["1" if a == m else 0 for m in range(4)] for a in range(4)]


def test_schwarzschild_preset_matches_manifest():
    s = preset("schwarzschild")
    m = load_manifest(DATA / "schwarzschild.toml")
    assert m.name == "schwarzschild-manifest"
    assert m.tetrad == s.tetrad and m.params == s.params and m.kind == "spherical"
    assert m.foliation["lapse"] == "sqrt(1-2*M/r)"


def test_unknown_preset():
    with pytest.raises(ManifestError):
        preset("kerr")


def test_minimal_manifest_defaults():
    s = parse_manifest(GOOD)
    assert s.kind == "cartesian" and s.params == {} and s.flags == {}
    assert s.tetrad[3][3] == "1" and s.tetrad[0][1] == 0


def test_malformed_expression_position():
    text = GOOD.replace('g0.dt = "1"', 'g0.dt = "2*"')
    with pytest.raises(ManifestError) as info:
        parse_manifest(text)
    assert len(info.value.problems) == 1
    assert "g0.dt" in info.value.problems[0] and "position 2" in info.value.problems[0]


def test_problems_are_listed_exhaustively():
    text = """
[chart]
coords = ["t", "x", "y"]
domain = { t = [1, -1] }
exclude = ["x"]
kind = "polar"

[params]
M = "heavy"

[tetrad]
g0.dt = "sin("
g5.dx = "1"
g1.dq = "1"

[flags]
fast = true

[energy]
radii = [3, 2, 1, 0]

[extras]
"""
    with pytest.raises(ManifestError) as info:
        parse_manifest(text)
    msgs = "\n".join(info.value.problems)
    for needle in ("unknown section [extras]", "coords must be a list of 4", "[params] M", "kind must be", "g0.dt", "'g5'", "g1.dq", "unknown flag", "radii"):
        assert needle in msgs, needle
    assert len(info.value.problems) >= 9


def test_toml_syntax_error_has_line_and_column():
    with pytest.raises(ManifestError) as info:
        parse_manifest("[chart\ncoords = 1")
    assert "line 1" in str(info.value)


def test_missing_file():
    with pytest.raises(ManifestError):
        load_manifest(DATA / "does-not-exist.toml")


def test_foliation_time_must_lead():
    with pytest.raises(ManifestError):
        parse_manifest(GOOD + '\n[foliation]\ntime = "x"\n')


@pytest.mark.parametrize("name", sorted(PRESETS) + ["random"])
def test_sampling_respects_domain_and_exclusions(name):
    s = preset(name)
    pts = sample_points(s, 50, 9)
    assert pts.shape == (50, 4)
    assert np.all(s.in_domain(pts)) and not np.any(s.exclusion_mask(pts))


def test_sampling_rejects_excluded_points():
    s = preset("schwarzschild_isotropic")
    pts = sample_points(s, 200, 3)
    assert np.min(np.linalg.norm(pts[:, 1:], axis=1)) >= 2.0


def test_sampling_is_deterministic():
    s = preset("flrw")
    assert np.array_equal(sample_points(s, 20, 5), sample_points(s, 20, 5))
    assert not np.array_equal(sample_points(s, 20, 5), sample_points(s, 20, 6))


def test_impossible_sampling_reports():
    text = GOOD + '\n'
    s = parse_manifest(text.replace('domain = {', 'exclude = ["x > -2"]\ndomain = {'))
    with pytest.raises(ManifestError):
        sample_points(s, 10, 0)
