"""Energy of the Schwarzschild exterior from surface integrals.

Integrates the superpotential and the boundary term over spheres in
isotropic coordinates, extrapolates in 1/r and compares with the mass.

    python demos/schwarzschild_energy.py
"""

import math

from telegrav.energy import ADM_NORMALIZATION, energy_series, extrapolate_to_infinity, textbook_adm_energy, SphereSpec
from telegrav.scenario import preset


def main():
    s = preset("schwarzschild_isotropic")
    M = s.params["M"]
    radii = [50.0, 100.0, 200.0, 400.0]
    c = s.cotetrad()
    ser = energy_series(c, radii, s.kind)
    print(f"{'r':>8} {'P0':>14} {'E':>14} {'E_prime':>14}")
    for i, r in enumerate(radii):
        print(f"{r:8.1f} {ser['P'][i, 0]:14.8f} {ser['E'][i]:14.8f} {ser['E_prime'][i]:14.8f}")
    P0 = extrapolate_to_infinity(radii, ser["P"][:, 0]).value
    Ep = extrapolate_to_infinity(radii, ser["E_prime"]).value
    tb = extrapolate_to_infinity(radii, textbook_adm_energy(c, [SphereSpec(r) for r in radii])).value
    print(f"P0 at infinity        {P0:.8f}  (8 pi M = {8 * math.pi * M:.8f})")
    print(f"mass from E'          {ADM_NORMALIZATION * Ep:.8f}")
    print(f"textbook ADM mass     {tb:.8f}")
    print(f"M                     {M}")


if __name__ == "__main__":
    main()
