"""
Photon cage
===========

When sin(Na k) = sin(Nb k) = 0 the standing waves of both arms vanish at the
connection nodes.  For generic flux the ring then reflects everything.  At
the single flux where exp(i flux) = cos(Na k) cos(Nb k) the two standing
waves combine into a bound state that never touches the leads: a photon
placed there stays forever.  At that same flux the scattering wave passes
with T = sin^2 k.
"""
import math

from abring import NotCageConditionError, RingSpec, cage_experiment, solve_linear

k = math.pi / 2
for na, nb in [(2, 2), (2, 4), (4, 4)]:
    trap = 0.0 if math.cos(na * k) * math.cos(nb * k) > 0 else math.pi
    leak = cage_experiment(RingSpec(na, nb, trap), k)
    noisy = cage_experiment(RingSpec(na, nb, trap), k, noise=0.01, seed=0)
    print(f"({na},{nb}) trapping flux {trap:.3f}: leakage {leak:.1e}, with 1% noise {noisy:.1e}")
    for flux in (trap, trap + 0.5):
        sol = solve_linear(RingSpec(na, nb, flux), k)
        print(f"    scattering at flux {flux:.3f}: T = {sol.T:.3f} ({sol.method.value})")

try:
    cage_experiment(RingSpec(2, 4, 0.5), k)
except NotCageConditionError as exc:
    print("flux 0.5:", exc)
