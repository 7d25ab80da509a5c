"""
Transmission zeros and resonant fluxes
======================================

Zeros at integer and half-integer flux follow sin(Na k) = -+ sin(Nb k).  Both
the (Na - Nb) k and the (Na + Nb) k solution families matter; a dense scan of
the linear solve finds nothing else.  Resonant fluxes come from cosine
conditions where one arm is commensurate or a single link, and from a
numerical search otherwise.
"""
import math

from abring import RingSpec, find_resonant_flux, find_zeros, scan_zeros, solve_linear
from abring.analysis import difference_family_zeros

for na, nb in [(3, 1), (4, 1), (5, 2)]:
    for flux in (0.0, math.pi):
        listed = find_zeros(na, nb, flux)
        scanned = scan_zeros(na, nb, flux)
        diff = difference_family_zeros(na, nb, flux)
        print(f"({na},{nb}) flux={flux:.3f}: zeros {[round(k, 6) for k in listed]}"
              f"  (difference family alone: {len(diff)}, dense scan: {len(scanned)})")

print("equal arms at flux pi:", find_zeros(3, 3, math.pi))

for na, nb, k in [(2, 1, math.pi / 2), (1, 4, math.pi / 4), (2, 5, math.pi / 2), (3, 5, 1.0)]:
    res = find_resonant_flux(na, nb, k)
    checks = [solve_linear(RingSpec(na, nb, f), k).T for f in res.fluxes]
    print(f"({na},{nb}) k={k:.4f}: {res.method:>16} fluxes {[round(f, 6) for f in res.fluxes]}"
          f"  T = {[round(T, 12) for T in checks]}")
