"""
On-resonance input, k = pi/2
============================

At the resonator frequency the outcome depends only on the parities of the
two arm lengths.  One even arm gives T = 1/(cos^2 flux + 1); two odd arms give
asymmetric Fano profiles; two even arms block everything except at the one
flux where the ring hosts a bound state, which then lets the wave through.
"""
import math

import numpy as np

from abring import RingSpec, solve_linear, transmission_k_half_pi

fluxes = np.linspace(-math.pi, math.pi, 9)
print("flux/pi  " + "  ".join(f"{f / math.pi:+.2f}" for f in fluxes))
for na, nb in [(2, 1), (2, 3), (1, 3), (1, 5), (3, 3), (2, 4), (2, 2)]:
    Ts = [solve_linear(RingSpec(na, nb, f), math.pi / 2).T for f in fluxes]
    case = transmission_k_half_pi(RingSpec(na, nb, 0.3)).case
    print(f"({na},{nb}) {case:>12}  " + "  ".join(f"{T:5.3f}" for T in Ts))

# the Fano law carries a signed amplitude: t = A exp(i phi_t) with A < 0 on one side
for f in (-1.0, 1.0):
    law = transmission_k_half_pi(RingSpec(1, 3, f))
    print(f"(1,3) flux={f:+.1f}: t = {solve_linear(RingSpec(1, 3, f), math.pi / 2).t:.6f}, law t = {law.t:.6f}")
