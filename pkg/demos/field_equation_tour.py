"""Walk through the tetrad field equation on the Schwarzschild exterior.

Samples the cotetrad at a few points, then prints the size of each
identity residual next to the size of the terms that cancel in it.

    python demos/field_equation_tour.py
"""

from telegrav.forms import exterior_derivative
from telegrav.gravfield import FieldTheory, conservation_residual, field_equation_residual, ricci_operator_residual
from telegrav.scenario import preset, sample_points
from telegrav.tetrad import GeometrySet


def biggest(forms, n):
    return max(f.max_abs(npoints=n) for f in forms)


def main():
    s = preset("schwarzschild")
    pts = sample_points(s, 20, seed=3)
    n = len(pts)
    geo = GeometrySet(s.cotetrad().sample(pts, 3))
    ft = FieldTheory(geo)

    print(f"scenario {s.name}, {n} points, coordinates {s.coords}")
    print(f"teleparallel torsion dg^a      max {biggest(geo.dg, n):.3e}")
    print(f"Cartan torsion residual        max {biggest(geo.torsion, n):.3e}")
    print(f"superpotential term d*S_d      max {biggest([exterior_derivative(x) for x in ft.star_S], n):.3e}")
    print(f"field equation residual        max {biggest(field_equation_residual(geo), n):.3e}")
    print(f"vacuum source T_d              max {biggest(ft.T, n):.3e}")
    print(f"Ricci operator residual        max {biggest(ricci_operator_residual(geo, ft), n):.3e}")
    nice = [a - b for a, b in zip(ft.bold_t_nice, ft.bold_t_variational)]
    print(f"nice formula vs variational    max {biggest(nice, n):.3e}")
    cons = conservation_residual(geo, ft, "nice") + conservation_residual(geo, ft, "variational")
    print(f"conservation, both routes      max {biggest(cons, n):.3e}")


if __name__ == "__main__":
    main()
