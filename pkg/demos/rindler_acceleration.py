"""An accelerated frame in flat spacetime.

The Rindler cotetrad has no curvature, yet its teleparallel torsion is
large. The field equation still holds, with a vanishing source.

    python demos/rindler_acceleration.py
"""

from telegrav.gravfield import FieldTheory, field_equation_residual
from telegrav.scenario import preset, sample_points
from telegrav.tetrad import GeometrySet


def main():
    s = preset("rindler")
    pts = sample_points(s, 50, seed=0)
    n = len(pts)
    geo = GeometrySet(s.cotetrad().sample(pts, 2))
    ft = FieldTheory(geo)
    R = geo.curvature.forms
    curvature = max(R[a][b].max_abs(npoints=n) for a in range(4) for b in range(4))
    print(f"tetrad rows: {s.tetrad}")
    print(f"Levi-Civita curvature   max {curvature:.3e}")
    print(f"torsion dg^0            max {geo.dg[0].max_abs(npoints=n):.3f}")
    print(f"source T_d              max {max(f.max_abs(npoints=n) for f in ft.T):.3e}")
    print(f"field equation residual max {max(f.max_abs(npoints=n) for f in field_equation_residual(geo)):.3e}")
    # the superpotential survives even though the source vanishes
    print(f"superpotential *S_d     max {max(f.max_abs(npoints=n) for f in ft.star_S):.3f}")


if __name__ == "__main__":
    main()
