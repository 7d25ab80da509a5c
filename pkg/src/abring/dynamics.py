"""Time-domain transport: Gaussian packets launched through the ring lattice.

Evolution uses the exact propagator ``exp(-iHt)`` from a single Hermitian
eigendecomposition, which is cheap at the lattice sizes used here (a few
hundred to a few thousand sites).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AccuracyBudgetExceededError,
    DomainError,
    NotCageConditionError,
    ReflectionContaminationError,
    TailOverflowError,
)
from .model import Gauge, LatticeSystem, RingSpec, build_lattice
from .scattering import EPS_BAND, EPS_SIN, _check_band, solve_linear

__all__ = [
    "WavePacketSpec",
    "EvolutionTrace",
    "Propagator",
    "propagate",
    "gaussian_profile",
    "build_gaussian",
    "evolve",
    "snapshots",
    "snapshots_to_csv",
    "default_lead_len",
    "TransmissionRun",
    "measure_transmission",
    "cage_state",
    "cage_experiment",
]

NORM_BUDGET = 1e-9
TAIL_TOL = 1e-8
CONTAMINATION_TOL = 1e-6
EDGE_SITES = 10
# clearance past the ring, in units of 1/w, before the output lead is read;
# the Gaussian tail left behind is about erfc(CLEARANCE) / 2
CLEARANCE = 4.0


@dataclass(frozen=True)
class WavePacketSpec:
    """Gaussian packet ``exp(-w^2 (j - center)^2 / 2 + i k j)`` in the input lead.

    ``center`` is a site index of the input lead counted from its outer end;
    ``None`` lets :func:`measure_transmission` place the packet.
    """

    k: float
    center: Optional[float] = None
    width_w: float = 0.05

    def __post_init__(self):
        if not (math.isfinite(self.width_w) and self.width_w > 0):
            raise DomainError(f"width_w must be positive, got {self.width_w!r}")
        if self.sigma_k > 0.1:
            warnings.warn(
                f"momentum spread {self.sigma_k:.3g} > 0.1; packet transmission will deviate from the plane-wave value",
                stacklevel=2,
            )

    @property
    def sigma_k(self) -> float:
        return self.width_w / math.sqrt(2)

    @property
    def tail(self) -> int:
        """Half-extent in sites beyond which amplitudes are negligible."""
        return math.ceil(6 / self.width_w)


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    times: np.ndarray
    p_in: np.ndarray
    p_ring: np.ndarray
    p_out: np.ndarray

    @property
    def norm(self) -> np.ndarray:
        return self.p_in + self.p_ring + self.p_out

    def to_csv(self) -> str:
        lines = ["time,p_in,p_ring,p_out,norm"]
        for row in zip(self.times, self.p_in, self.p_ring, self.p_out, self.norm):
            lines.append(",".join(f"{v:.12g}" for v in row))
        return "\n".join(lines) + "\n"


class Propagator:
    """Exact ``exp(-iHt)`` for a fixed Hermitian matrix."""

    def __init__(self, matrix):
        H = np.asarray(getattr(matrix, "matrix", matrix))
        self.energies, self.vectors = np.linalg.eigh(H)

    def states(self, state, times) -> np.ndarray:
        """Array of shape ``(len(times), n)`` with ``psi(t)`` in each row."""
        coeffs = self.vectors.conj().T @ np.asarray(state, complex)
        phases = np.exp(-1j * np.outer(np.asarray(times, float), self.energies))
        return (phases * coeffs) @ self.vectors.T


def propagate(matrix, state, times) -> np.ndarray:
    return Propagator(matrix).states(state, times)


def gaussian_profile(positions, packet: WavePacketSpec, center: Optional[float] = None) -> np.ndarray:
    """Normalised packet amplitudes on the given site positions."""
    j = np.asarray(positions, float)
    c = packet.center if center is None else center
    if c is None:
        raise DomainError("packet center is not set")
    amp = np.exp(-(packet.width_w**2) * (j - c) ** 2 / 2 + 1j * packet.k * j)
    return amp / np.linalg.norm(amp)


def build_gaussian(system: LatticeSystem, packet: WavePacketSpec, center: Optional[float] = None) -> np.ndarray:
    """State vector with the packet on the input lead and zeros elsewhere.

    Raises :class:`TailOverflowError` if the amplitude at either end of the
    input lead reaches 1e-8.
    """
    L = system.lead_len
    amp = gaussian_profile(np.arange(L), packet, center)
    if max(abs(amp[0]), abs(amp[-1])) >= TAIL_TOL:
        raise TailOverflowError(
            f"packet leaks out of the {L}-site input lead (end amplitudes {abs(amp[0]):.2e}, {abs(amp[-1]):.2e})"
        )
    psi = np.zeros(system.size, complex)
    psi[system.input_rows] = amp
    return psi


def _sample_times(t_final: float, sample_dt: float) -> np.ndarray:
    if not t_final > 0:
        raise DomainError("t_final must be positive")
    if not sample_dt > 0:
        raise DomainError("sample_dt must be positive")
    n = max(1, math.ceil(t_final / sample_dt - 1e-12))
    return np.linspace(0.0, t_final, n + 1)


def _populations(system: LatticeSystem, states: np.ndarray):
    dens = np.abs(states) ** 2
    return (
        dens[:, system.input_rows].sum(axis=1),
        dens[:, system.ring_rows].sum(axis=1),
        dens[:, system.output_rows].sum(axis=1),
    )


def _edge_population(system: LatticeSystem, states: np.ndarray) -> np.ndarray:
    L = system.lead_len
    e = min(EDGE_SITES, L)
    dens = np.abs(states) ** 2
    return dens[:, :e].sum(axis=1) + dens[:, system.size - e:].sum(axis=1)


def _evolve(system, state, times, propagator=None, budget=NORM_BUDGET, chunk=256):
    prop = propagator or Propagator(system.matrix)
    parts, edges = [], []
    for i in range(0, len(times), chunk):
        states = prop.states(state, times[i:i + chunk])
        parts.append(_populations(system, states))
        edges.append(_edge_population(system, states))
    p_in, p_ring, p_out = (np.concatenate(x) for x in zip(*parts))
    trace = EvolutionTrace(np.asarray(times, float), p_in, p_ring, p_out)
    norm0 = float(np.vdot(state, state).real)
    drift = float(np.max(np.abs(trace.norm - norm0)))
    if drift > budget:
        raise AccuracyBudgetExceededError(f"norm drift {drift:.3e} exceeds budget {budget:.1e}")
    return trace, np.concatenate(edges)


def evolve(system: LatticeSystem, state, t_final: float, sample_dt: float, budget: float = NORM_BUDGET) -> EvolutionTrace:
    """Propagate ``state`` under the lattice Hamiltonian, sampling populations every ``sample_dt``."""
    trace, _ = _evolve(system, state, _sample_times(t_final, sample_dt), budget=budget)
    return trace


def snapshots(system: LatticeSystem, state, times: Sequence[float]) -> np.ndarray:
    """Per-site densities ``|psi_j(t)|^2``, one row per requested time."""
    return np.abs(Propagator(system.matrix).states(state, times)) ** 2


def snapshots_to_csv(times, densities) -> str:
    lines = ["time,site,density"]
    for t, row in zip(times, densities):
        lines.extend(f"{t:.12g},{j},{d:.12g}" for j, d in enumerate(row))
    return "\n".join(lines) + "\n"


# -- dynamical transmission ----------------------------------------------------

def default_lead_len(spec: RingSpec, packet: WavePacketSpec) -> int:
    # room for the packet tails on both sides of its start plus the separated
    # reflected/transmitted packets at the measurement time
    return 2 * packet.tail + spec.ring_size + 50


def _default_center(packet: WavePacketSpec) -> int:
    return packet.tail + 25


@dataclass(frozen=True, eq=False)
class TransmissionRun:
    T_dyn: float
    T_analytic: float
    t_stop: float
    lead_len: int
    center: float
    trace: EvolutionTrace

    def plateau_variation(self, fraction: float = 0.1) -> float:
        """Spread of ``p_out`` over the last ``fraction`` of the recorded times."""
        times = self.trace.times
        mask = times >= times[-1] - fraction * (times[-1] - times[0])
        tail = self.trace.p_out[mask]
        return float(tail.max() - tail.min())


def measure_transmission(
    spec: RingSpec,
    packet: WavePacketSpec,
    lead_len: Optional[int] = None,
    gauge: Gauge = Gauge.SINGLE_LINK,
    sample_dt: float = 0.5,
    budget: float = NORM_BUDGET,
) -> TransmissionRun:
    """Send a packet through the ring and read the output-lead population.

    The measurement time is ``t* = (d_out + 4/w) / (2 J sin k)`` with
    ``d_out`` the path length from the packet centre to the output node along
    the shorter arm, so the packet has cleared the ring by about ``4/w``
    sites.  Raises :class:`ReflectionContaminationError` if more than 1e-6 of
    the population reaches the outer ten sites of either lead before ``t*``.
    """
    k = packet.k
    _check_band(k, EPS_BAND)
    if not 0 < k < math.pi:
        raise DomainError("packet must move towards the ring: need 0 < k < pi")
    L = default_lead_len(spec, packet) if lead_len is None else int(lead_len)
    center = _default_center(packet) if packet.center is None else packet.center
    system = build_lattice(spec, gauge, L)
    psi0 = build_gaussian(system, packet, center)

    velocity = 2 * spec.coupling * math.sin(k)
    d_out = (L - center) + min(spec.n_alpha, spec.n_beta)
    t_stop = (d_out + CLEARANCE / packet.width_w) / velocity
    trace, edge = _evolve(system, psi0, _sample_times(t_stop, sample_dt), budget=budget)
    if edge.max() > CONTAMINATION_TOL:
        raise ReflectionContaminationError(
            f"lead-end population {edge.max():.2e} before t* = {t_stop:.4g}; increase lead_len"
        )
    return TransmissionRun(
        T_dyn=float(trace.p_out[-1]),
        T_analytic=solve_linear(spec, k).T,
        t_stop=t_stop,
        lead_len=L,
        center=float(center),
        trace=trace,
    )


# -- photon cage -------------------------------------------------------------------

def _arm_standing_wave(system: LatticeSystem, arm: str, k: float) -> np.ndarray:
    """``sin(kj)`` on the arm interior, dressed with the gauge phases of its links."""
    u = np.zeros(system.size, complex)
    links = sorted((l for l in system.ring_links if l.arm == arm), key=lambda l: l.j)
    accumulated = 0.0
    for link in links[:-1]:
        accumulated += float(np.angle(-link.amplitude))
        u[link.row_to] = math.sin(k * link.j) * np.exp(-1j * accumulated)
    return u


def cage_state(system: LatticeSystem, k: float, eps_sin: float = EPS_SIN, tol: float = 1e-9) -> np.ndarray:
    """Normalised ring bound state built from the two arm standing waves.

    Exists only when ``sin(Na k) = sin(Nb k) = 0`` and the flux makes the two
    standing waves cancel at both connection nodes, i.e.
    ``exp(i flux) = cos(Na k) cos(Nb k)``.  Otherwise
    :class:`NotCageConditionError` is raised.
    """
    spec = system.spec
    if abs(math.sin(k)) <= EPS_BAND:
        raise NotCageConditionError("band edge")
    if abs(math.sin(spec.n_alpha * k)) > eps_sin or abs(math.sin(spec.n_beta * k)) > eps_sin:
        raise NotCageConditionError("cage needs sin(Na k) = sin(Nb k) = 0")
    energy = -2 * spec.coupling * math.cos(k)
    H = system.matrix
    basis = np.stack([_arm_standing_wave(system, "alpha", k), _arm_standing_wave(system, "beta", k)], axis=1)
    nodes = [system.row(("alpha", 0)), system.row(("alpha", spec.n_alpha))]
    M = (H @ basis - energy * basis)[nodes]
    _, sv, vh = np.linalg.svd(M)
    if sv[-1] > tol * spec.coupling * max(1.0, sv[0]):
        raise NotCageConditionError(
            f"no ring bound state at flux {spec.flux:.6g}: the arm standing waves do not cancel at the "
            "connection nodes (needs exp(i flux) = cos(Na k) cos(Nb k))"
        )
    psi = basis @ vh[-1].conj()
    return psi / np.linalg.norm(psi)


def cage_experiment(
    spec: RingSpec,
    k: float,
    t_final: Optional[float] = None,
    lead_len: int = 20,
    gauge: Gauge = Gauge.SINGLE_LINK,
    sample_dt: float = 1.0,
    noise: float = 0.0,
    seed: Optional[int] = None,
) -> float:
    """Maximum lead population over ``[0, t_final]`` for a photon started in the cage state.

    ``noise`` adds a random ring-supported perturbation of that relative norm
    before renormalising.  ``t_final`` defaults to ``200 / J``.
    """
    system = build_lattice(spec, gauge, lead_len)
    psi = cage_state(system, k)
    if noise:
        rng = np.random.default_rng(seed)
        xi = np.zeros(system.size, complex)
        n_ring = spec.ring_size
        xi[system.ring_rows] = rng.normal(size=n_ring) + 1j * rng.normal(size=n_ring)
        psi = psi + noise * xi / np.linalg.norm(xi)
        psi /= np.linalg.norm(psi)
    t_final = 200.0 / spec.coupling if t_final is None else t_final
    trace = evolve(system, psi, t_final, sample_dt)
    return float(np.max(trace.p_in + trace.p_out))
