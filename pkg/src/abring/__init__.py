"""Quantum transport through a two-arm ring of coupled resonators threaded by synthetic flux."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .model import RingSpec, Gauge, LatticeSystem, build_lattice, build_ring, loop_flux, spectrum  # noqa: E402
from .scattering import (  # noqa: E402
    Method,
    ScatteringSolution,
    solve_linear,
    solve_batch,
    solve_closed_form,
    transmission_closed_form,
    transmission_n_alpha_one,
    transmission_k_half_pi,
)
from .analysis import (  # noqa: E402
    ALL_K,
    GridSpec,
    SweepGrid,
    sweep,
    find_zeros,
    scan_zeros,
    find_resonant_flux,
    symmetry_audit,
)
from .dynamics import (  # noqa: E402
    WavePacketSpec,
    EvolutionTrace,
    build_gaussian,
    evolve,
    measure_transmission,
    cage_state,
    cage_experiment,
)
