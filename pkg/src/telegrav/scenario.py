"""Scenarios: a chart, parameters and a cotetrad given by expression strings.

Scenarios come from built-in presets or from a manifest file. The manifest is
TOML with these sections::

    [chart]
    coords = ["t", "r", "theta", "phi"]      # order fixes the orientation
    domain = { t = [-1, 1], r = [2.5, 20], theta = [0.2, 2.94], phi = [0, 6.28] }
    exclude = ["r < 2.5*M"]                   # points where any holds are rejected
    kind = "spherical"                        # or "cartesian" (inferred if absent)

    [params]
    M = 1.0

    [tetrad]                                  # absent entries are 0
    g0.dt = "sqrt(1-2*M/r)"
    g1.dr = "1/sqrt(1-2*M/r)"

    [foliation]                               # optional
    lapse = "sqrt(1-2*M/r)"
    time = "t"                                # must be the first coordinate

    [flags]
    asymptotically_cartesian = false
    flat = false
    vacuum = true

    [energy]                                  # optional
    radii = [10, 20, 40, 80]
    time = 0.0
    center = [0, 0, 0]
    background = { M = 0.0 }                  # subtract the series of this reference
    mass_parameter = "M"

All problems found in a manifest are collected and reported together.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import qmc

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .expr import ExpressionError, ScalarField, evaluate_many, parse_expression
from .tetrad import Cotetrad

__all__ = [
    "Scenario",
    "ManifestError",
    "PRESETS",
    "preset",
    "load_manifest",
    "parse_manifest",
    "random_tetrad",
    "sample_points",
]

log = logging.getLogger(__name__)

_COMPARISON = re.compile(r"(<=|>=|<|>)")


class ManifestError(ValueError):
    """A manifest could not be used; ``problems`` lists every issue found."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.problems))


@dataclass
class Scenario:
    name: str
    coords: tuple
    domain: dict
    tetrad: list  # 4 x 4 table of expression strings or numbers
    params: dict = field(default_factory=dict)
    exclude: list = field(default_factory=list)
    kind: str = "cartesian"
    foliation: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    energy: dict = field(default_factory=dict)

    def cotetrad(self, params: Mapping[str, float] | None = None) -> Cotetrad:
        p = dict(self.params)
        p.update(params or {})
        return Cotetrad.from_expressions(self.tetrad, self.coords, p)

    def exclusion_mask(self, points: np.ndarray) -> np.ndarray:
        """True where a point lies in an excluded region."""
        mask = np.zeros(points.shape[0], dtype=bool)
        env = {c: points[:, i] for i, c in enumerate(self.coords)}
        env.update(self.params)
        for text in self.exclude:
            lhs, op, rhs = _split_predicate(text, self.coords, list(self.params))
            a, b = (np.broadcast_to(v, mask.shape) for v in evaluate_many([lhs, rhs], env, check=False))
            with np.errstate(invalid="ignore"):
                hit = {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
            mask |= hit | ~np.isfinite(a) | ~np.isfinite(b)
        return mask

    def in_domain(self, points: np.ndarray, names: Sequence[str] | None = None) -> np.ndarray:
        ok = np.ones(points.shape[0], dtype=bool)
        for i, c in enumerate(self.coords):
            if names is not None and c not in names:
                continue
            lo, hi = self.domain[c]
            ok &= (points[:, i] >= lo - 1e-12) & (points[:, i] <= hi + 1e-12)
        return ok


def _split_predicate(text: str, coords, params):
    parts = _COMPARISON.split(text)
    if len(parts) != 3:
        raise ExpressionError(f"exclusion {text!r} must have exactly one comparison (<, <=, >, >=)")
    lhs, op, rhs = parts
    return parse_expression(lhs.strip(), coords, params), op, parse_expression(rhs.strip(), coords, params)


# -- presets ---------------------------------------------------------------------------------


def _diag(entries: Sequence[str]) -> list:
    return [[entries[a] if a == m else 0 for m in range(4)] for a in range(4)]


_RHO = "sqrt(x^2+y^2+z^2)"
_PI = math.pi

PRESETS: dict[str, dict] = {
    "minkowski": dict(
        coords=("t", "x", "y", "z"),
        domain={"t": (-1, 1), "x": (-1, 1), "y": (-1, 1), "z": (-1, 1)},
        tetrad=_diag(["1", "1", "1", "1"]),
        flags={"flat": True, "vacuum": True, "asymptotically_cartesian": True},
        energy={"radii": [0.25, 0.5, 0.75, 1.0]},
    ),
    "rindler": dict(
        coords=("t", "x", "y", "z"),
        domain={"t": (-1, 1), "x": (0, 1), "y": (-1, 1), "z": (-1, 1)},
        params={"a": 1.0},
        tetrad=_diag(["1 + a*x", "1", "1", "1"]),
        flags={"flat": True, "vacuum": True, "expect_torsion": True},
        energy={"radii": [0.1, 0.2, 0.3, 0.4], "center": [0.5, 0.0, 0.0]},
    ),
    "schwarzschild": dict(
        coords=("t", "r", "theta", "phi"),
        domain={"t": (-1, 1), "r": (2.5, 20), "theta": (0.2, _PI - 0.2), "phi": (0, 2 * _PI)},
        params={"M": 1.0},
        exclude=["r < 2.5*M"],
        kind="spherical",
        tetrad=_diag(["sqrt(1-2*M/r)", "1/sqrt(1-2*M/r)", "r", "r*sin(theta)"]),
        flags={"vacuum": True},
        energy={"radii": [100, 200, 400, 800, 1600], "background": {"M": 0.0}, "mass_parameter": "M"},
    ),
    "schwarzschild_isotropic": dict(
        coords=("t", "x", "y", "z"),
        domain={"t": (-1, 1), "x": (-10, 10), "y": (-10, 10), "z": (-10, 10)},
        params={"M": 1.0},
        exclude=[f"{_RHO} < 2*M"],
        tetrad=_diag([f"(1-M/(2*{_RHO}))/(1+M/(2*{_RHO}))"] + [f"(1+M/(2*{_RHO}))^2"] * 3),
        flags={"vacuum": True, "asymptotically_cartesian": True},
        energy={"radii": [100, 200, 400, 800, 1600], "mass_parameter": "M"},
    ),
    "flrw": dict(
        coords=("t", "x", "y", "z"),
        domain={"t": (0.5, 2), "x": (-1, 1), "y": (-1, 1), "z": (-1, 1)},
        tetrad=_diag(["1", "t^(2/3)", "t^(2/3)", "t^(2/3)"]),
        energy={"radii": [0.25, 0.5, 0.75, 1.0], "time": 1.0},
    ),
}


def preset(name: str, seed: int = 42) -> Scenario:
    """Built-in scenario by name; ``random`` builds a seeded perturbed tetrad."""
    if name == "random":
        return Scenario(
            name=f"random-{seed}",
            coords=("t", "x", "y", "z"),
            domain={c: (-1.0, 1.0) for c in ("t", "x", "y", "z")},
            tetrad=random_tetrad(seed),
            energy={"radii": [0.25, 0.5, 0.75, 1.0]},
        )
    if name not in PRESETS:
        raise ManifestError([f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}, random"])
    spec = PRESETS[name]
    return Scenario(
        name=name,
        coords=tuple(spec["coords"]),
        domain={k: tuple(float(x) for x in v) for k, v in spec["domain"].items()},
        tetrad=[list(r) for r in spec["tetrad"]],
        params=dict(spec.get("params", {})),
        exclude=list(spec.get("exclude", [])),
        kind=spec.get("kind", "cartesian"),
        flags=dict(spec.get("flags", {})),
        energy=dict(spec.get("energy", {})),
    )


def random_tetrad(seed: int, eps: float = 0.1, n_terms: int = 3) -> list:
    """``g^a = dx^a + eps p^a`` with polynomial-times-trigonometric components."""
    rng = np.random.default_rng(seed)
    coords = ("t", "x", "y", "z")
    table = []
    for a in range(4):
        row = []
        for m in range(4):
            terms = []
            for _ in range(n_terms):
                c = rng.uniform(-1, 1)
                i, j, k = rng.integers(0, 4, 3)
                fn = ("sin", "cos")[rng.integers(0, 2)]
                w = rng.uniform(0.5, 1.5)
                terms.append(f"({c:.6f})*{coords[i]}*{fn}({w:.6f}*{coords[j]}+{coords[k]})")
            base = "1" if a == m else "0"
            row.append(f"{base} + {eps!r}*(" + " + ".join(terms) + ")")
        table.append(row)
    return table


# -- manifests -------------------------------------------------------------------------------


def load_manifest(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError([f"cannot read manifest {path}: {exc}"]) from exc
    return parse_manifest(text, name=path.stem)


def parse_manifest(text: str, name: str = "manifest") -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ManifestError([f"parse error: {exc}"]) from exc
    problems: list[str] = []
    known = {"chart", "params", "tetrad", "foliation", "flags", "energy", "scenario"}
    for sec in data:
        if sec not in known:
            problems.append(f"unknown section [{sec}]")
    chart = data.get("chart", {})
    coords = chart.get("coords")
    if not isinstance(coords, list) or len(coords) != 4 or not all(isinstance(c, str) for c in coords):
        problems.append("[chart] coords must be a list of 4 names")
        coords = ["t", "x", "y", "z"]
    elif len(set(coords)) != 4:
        problems.append("[chart] coords must be distinct")
    coords = tuple(coords)

    params = {}
    for k, v in data.get("params", {}).items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            problems.append(f"[params] {k} must be a number")
        elif k in coords:
            problems.append(f"[params] {k} clashes with a coordinate name")
        else:
            params[k] = float(v)

    domain = {}
    raw_domain = chart.get("domain", {})
    for c in coords:
        box = raw_domain.get(c)
        if not (isinstance(box, list) and len(box) == 2 and all(isinstance(x, (int, float)) for x in box)):
            problems.append(f"[chart] domain for {c} must be [min, max]")
            continue
        if not box[0] < box[1]:
            problems.append(f"[chart] domain for {c} is empty ({box[0]} >= {box[1]})")
        domain[c] = (float(box[0]), float(box[1]))
    for c in raw_domain:
        if c not in coords:
            problems.append(f"[chart] domain names unknown coordinate {c!r}")

    exclude = chart.get("exclude", [])
    if not isinstance(exclude, list):
        problems.append("[chart] exclude must be a list of strings")
        exclude = []
    for text_ in exclude:
        try:
            _split_predicate(str(text_), coords, list(params))
        except ExpressionError as exc:
            problems.append(f"[chart] exclude {text_!r}: {exc}")

    kind = chart.get("kind")
    if kind is None:
        kind = "spherical" if coords[1:] == ("r", "theta", "phi") else "cartesian"
    if kind not in ("spherical", "cartesian"):
        problems.append(f"[chart] kind must be 'spherical' or 'cartesian', got {kind!r}")

    tetrad = [[0] * 4 for _ in range(4)]
    raw_tetrad = data.get("tetrad", {})
    if not raw_tetrad:
        problems.append("[tetrad] section is missing or empty")
    for key, entries in raw_tetrad.items():
        m = re.fullmatch(r"g([0-3])", key)
        if not m or not isinstance(entries, dict):
            problems.append(f"[tetrad] unexpected key {key!r} (use g0.dt = \"...\")")
            continue
        a = int(m.group(1))
        for dkey, expr in entries.items():
            if not dkey.startswith("d") or dkey[1:] not in coords:
                problems.append(f"[tetrad] {key}.{dkey}: unknown differential (coords are {', '.join(coords)})")
                continue
            mu = coords.index(dkey[1:])
            if isinstance(expr, bool) or not isinstance(expr, (str, int, float)):
                problems.append(f"[tetrad] {key}.{dkey} must be a quoted expression")
                continue
            if isinstance(expr, str):
                try:
                    parse_expression(expr, coords, list(params))
                except ExpressionError as exc:
                    problems.append(f"[tetrad] {key}.{dkey}: {exc}")
                    continue
            tetrad[a][mu] = expr

    foliation = dict(data.get("foliation", {}))
    if foliation:
        if "lapse" in foliation:
            try:
                parse_expression(str(foliation["lapse"]), coords, list(params))
            except ExpressionError as exc:
                problems.append(f"[foliation] lapse: {exc}")
        if foliation.get("time", coords[0]) != coords[0]:
            problems.append(f"[foliation] time must be the first coordinate {coords[0]!r}")
        for k in foliation:
            if k not in ("lapse", "time"):
                problems.append(f"[foliation] unknown key {k!r}")

    flags = dict(data.get("flags", {}))
    for k, v in flags.items():
        if k not in ("asymptotically_cartesian", "flat", "vacuum", "expect_torsion"):
            problems.append(f"[flags] unknown flag {k!r}")
        elif not isinstance(v, bool):
            problems.append(f"[flags] {k} must be true or false")

    energy = dict(data.get("energy", {}))
    radii = energy.get("radii")
    if radii is not None:
        if not (isinstance(radii, list) and len(radii) >= 4 and all(isinstance(r, (int, float)) and r > 0 for r in radii)):
            problems.append("[energy] radii must be a list of at least 4 positive numbers")
        elif any(b <= a for a, b in zip(radii, radii[1:])):
            problems.append("[energy] radii must be increasing")
    for k in energy:
        if k not in ("radii", "time", "center", "background", "mass_parameter"):
            problems.append(f"[energy] unknown key {k!r}")
    if "mass_parameter" in energy and energy["mass_parameter"] not in params:
        problems.append(f"[energy] mass_parameter {energy['mass_parameter']!r} is not a parameter")

    if problems:
        raise ManifestError(problems)
    return Scenario(
        name=str(data.get("scenario", {}).get("name", name)),
        coords=coords,
        domain=domain,
        tetrad=tetrad,
        params=params,
        exclude=[str(e) for e in exclude],
        kind=kind,
        foliation=foliation,
        flags=flags,
        energy=energy,
    )


# -- sampling ---------------------------------------------------------------------------------


def sample_points(s: Scenario, n: int, seed: int, det_tol: float = 1e-12, max_rounds: int = 20) -> np.ndarray:
    """``n`` points from a scrambled Halton sequence inside the domain box.

    Points in excluded regions, where a frame component is not finite, or
    where the frame is nearly degenerate are rejected (and counted in the log).
    """
    lo = np.array([s.domain[c][0] for c in s.coords])
    hi = np.array([s.domain[c][1] for c in s.coords])
    engine = qmc.Halton(d=4, scramble=True, seed=seed)
    c = s.cotetrad()
    fields = [(a, m, x) for a in range(4) for m in range(4) for x in [c.frame[a][m]] if isinstance(x, ScalarField)]
    kept: list[np.ndarray] = []
    rejected = 0
    total = 0
    for _ in range(max_rounds):
        need = n - sum(len(k) for k in kept)
        if need <= 0:
            break
        cand = qmc.scale(engine.random(max(2 * need, 16)), lo, hi)
        ok = ~s.exclusion_mask(cand)
        env = {name: cand[:, i] for i, name in enumerate(s.coords)}
        env.update(c.params)
        frame = np.zeros((cand.shape[0], 4, 4))
        for a in range(4):
            for m in range(4):
                x = c.frame[a][m]
                if not isinstance(x, ScalarField):
                    frame[:, a, m] = float(x)
        if fields:
            with np.errstate(all="ignore"):
                vals = evaluate_many([f for _, _, f in fields], env, check=False)
            for (a, m, _), v in zip(fields, vals):
                frame[:, a, m] = v
        finite = np.all(np.isfinite(frame), axis=(1, 2))
        ok &= finite
        det = np.zeros(cand.shape[0])
        det[finite] = np.linalg.det(frame[finite])
        ok &= np.abs(det) > det_tol
        total += cand.shape[0]
        rejected += int(np.count_nonzero(~ok))
        kept.append(cand[ok][:need])
    pts = np.vstack(kept) if kept else np.zeros((0, 4))
    if rejected:
        log.info("sampling %s: rejected %d of %d candidate points", s.name, rejected, total)
    if pts.shape[0] < n:
        raise ManifestError([f"could only find {pts.shape[0]} valid sample points of {n} requested"])
    return pts
