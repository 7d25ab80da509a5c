"""Tight-binding lattice of a two-arm ring interferometer with attached leads.

Site layout (matrix rows, in order)::

    input lead   ("in", 0) ... ("in", L-1)          # ("in", L-1) touches node 0
    node 0       ("alpha", 0) == ("beta", 0)
    upper arm    ("alpha", 1) ... ("alpha", Na-1)
    end node     ("alpha", Na) == ("beta", Nb)
    lower arm    ("beta", 1) ... ("beta", Nb-1)
    output lead  ("out", 0) ... ("out", L-1)        # ("out", 0) touches the end node

Hopping amplitudes follow the convention ``H[i, j] = -J exp(i theta)`` for the
operator ``a_i^dagger a_j``.  All energies live in the frame rotating at the
resonator frequency, so the diagonal is zero.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, Tuple

import numpy as np

from .errors import DomainError

__all__ = [
    "RingSpec",
    "Gauge",
    "RingLink",
    "LatticeSystem",
    "build_lattice",
    "build_ring",
    "loop_flux",
    "spectrum",
    "lattice_to_dict",
    "lattice_to_json",
]


@dataclass(frozen=True)
class RingSpec:
    """Geometry and flux of the interferometer.

    ``n_alpha`` and ``n_beta`` count links, so the upper arm embeds
    ``n_alpha - 1`` resonators between the two connection nodes.  ``flux`` is
    the total loop phase in radians and is kept unreduced.
    """

    n_alpha: int
    n_beta: int
    flux: float = 0.0
    coupling: float = 1.0
    omega_c: float = 0.0

    def __post_init__(self):
        for name in ("n_alpha", "n_beta"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise DomainError(f"{name} must be an integer >= 1, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not math.isfinite(self.flux):
            raise DomainError(f"flux must be finite, got {self.flux!r}")
        if not (math.isfinite(self.coupling) and self.coupling > 0):
            raise DomainError(f"coupling must be positive, got {self.coupling!r}")
        object.__setattr__(self, "flux", float(self.flux))
        object.__setattr__(self, "coupling", float(self.coupling))
        object.__setattr__(self, "omega_c", float(self.omega_c))

    @property
    def ring_size(self) -> int:
        return self.n_alpha + self.n_beta

    def with_flux(self, flux: float) -> "RingSpec":
        return RingSpec(self.n_alpha, self.n_beta, flux, self.coupling, self.omega_c)

    def swapped(self) -> "RingSpec":
        """Same ring turned over: arms exchanged, flux reversed."""
        return RingSpec(self.n_beta, self.n_alpha, -self.flux, self.coupling, self.omega_c)

    def to_dict(self) -> dict:
        return {
            "n_alpha": self.n_alpha,
            "n_beta": self.n_beta,
            "flux": self.flux,
            "coupling": self.coupling,
            "omega_c": self.omega_c,
        }


class Gauge(str, enum.Enum):
    """Distribution of the loop phase over the ring links.

    ``UNIFORM`` puts ``+phi`` on every upper-arm hop ``j-1 -> j`` and ``-phi``
    on every lower-arm hop, ``phi = flux / (n_alpha + n_beta)``.
    ``SINGLE_LINK`` puts ``exp(-i flux)`` on the last lower-arm link only.
    """

    UNIFORM = "uniform"
    SINGLE_LINK = "single_link"


@dataclass(frozen=True)
class RingLink:
    """One ring link ``j-1 -> j`` of an arm; ``amplitude`` is ``H[row_from, row_to]``."""

    arm: str
    j: int
    row_from: int
    row_to: int
    amplitude: complex


@dataclass(frozen=True, eq=False)
class LatticeSystem:
    spec: RingSpec
    gauge: Gauge
    lead_len: int
    matrix: np.ndarray
    index_map: Dict[Tuple[str, int], int]
    ring_links: Tuple[RingLink, ...] = field(repr=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def row(self, label: Hashable) -> int:
        return self.index_map[tuple(label)]

    @property
    def input_rows(self) -> slice:
        return slice(0, self.lead_len)

    @property
    def ring_rows(self) -> slice:
        return slice(self.lead_len, self.lead_len + self.spec.ring_size)

    @property
    def output_rows(self) -> slice:
        return slice(self.lead_len + self.spec.ring_size, self.size)

    def degree(self, row: int) -> int:
        return int(np.count_nonzero(np.abs(self.matrix[row]) > 0))


def _link_phases(spec: RingSpec, gauge: Gauge):
    """Phase theta of ``H[j-1, j] = -J exp(i theta)`` for every link of each arm."""
    na, nb, flux = spec.n_alpha, spec.n_beta, spec.flux
    if gauge is Gauge.UNIFORM:
        phi = flux / (na + nb)
        upper = [phi] * na
        lower = [-phi] * nb
    elif gauge is Gauge.SINGLE_LINK:
        upper = [0.0] * na
        lower = [0.0] * (nb - 1) + [-flux]
    else:  # pragma: no cover
        raise DomainError(f"unknown gauge {gauge!r}")
    return upper, lower


def _assemble(spec: RingSpec, gauge: Gauge, lead_len: int) -> LatticeSystem:
    gauge = Gauge(gauge)
    na, nb, J = spec.n_alpha, spec.n_beta, spec.coupling
    L = lead_len
    n = 2 * L + na + nb

    index: Dict[Tuple[str, int], int] = {}
    for j in range(L):
        index[("in", j)] = j
    node0, end = L, L + na
    index[("alpha", 0)] = index[("beta", 0)] = node0
    index[("alpha", na)] = index[("beta", nb)] = end
    for j in range(1, na):
        index[("alpha", j)] = L + j
    for j in range(1, nb):
        index[("beta", j)] = L + na + j
    for j in range(L):
        index[("out", j)] = L + na + nb + j

    H = np.zeros((n, n), dtype=complex)
    for j in range(L - 1):
        H[j, j + 1] = H[j + 1, j] = -J
        H[index[("out", j)], index[("out", j + 1)]] = -J
        H[index[("out", j + 1)], index[("out", j)]] = -J
    if L:
        H[L - 1, node0] = H[node0, L - 1] = -J
        H[end, index[("out", 0)]] = H[index[("out", 0)], end] = -J

    links = []
    upper, lower = _link_phases(spec, gauge)
    for arm, count, phases in (("alpha", na, upper), ("beta", nb, lower)):
        for j in range(1, count + 1):
            a, b = index[(arm, j - 1)], index[(arm, j)]
            amp = -J * np.exp(1j * phases[j - 1])
            # parallel links (na == nb == 1) accumulate into one entry
            H[a, b] += amp
            H[b, a] += np.conj(amp)
            links.append(RingLink(arm, j, a, b, complex(amp)))

    H.flags.writeable = False
    return LatticeSystem(spec, gauge, L, H, index, tuple(links))


def build_lattice(spec: RingSpec, gauge: Gauge = Gauge.SINGLE_LINK, lead_len: int = 1) -> LatticeSystem:
    """Assemble the Hermitian hopping matrix of ring plus two finite leads."""
    if int(lead_len) != lead_len or lead_len < 1:
        raise DomainError(f"lead_len must be a positive integer, got {lead_len!r}")
    if not math.isfinite(spec.flux):
        raise DomainError("flux must be finite")
    return _assemble(spec, gauge, int(lead_len))


def build_ring(spec: RingSpec, gauge: Gauge = Gauge.SINGLE_LINK) -> LatticeSystem:
    """The isolated ring, without leads."""
    return _assemble(spec, gauge, 0)


def loop_flux(system: LatticeSystem) -> float:
    """Directed phase sum around the ring, reduced to (-pi, pi].

    The ring is traversed along the upper arm from node 0 to the end node and
    back along the lower arm; a hop ``a -> b`` contributes ``arg(-H[a, b])``.
    Links are taken from ``system.ring_links`` so parallel links are not lost
    to the summed matrix entry.
    """
    z = 1.0 + 0j
    for link in system.ring_links:
        u = -link.amplitude / abs(link.amplitude)
        z *= u if link.arm == "alpha" else np.conj(u)
    angle = float(np.angle(z))
    if angle <= -math.pi + 1e-12:
        angle += 2 * math.pi
    return angle


def spectrum(system_or_matrix) -> np.ndarray:
    """Ascending real eigenvalues of the lattice Hamiltonian."""
    H = getattr(system_or_matrix, "matrix", system_or_matrix)
    return np.linalg.eigvalsh(np.asarray(H))


def _label_str(label) -> str:
    return f"{label[0]}:{label[1]}"


def lattice_to_dict(system: LatticeSystem) -> dict:
    H = system.matrix
    rows, cols = np.nonzero(H)
    triplets = [[int(r), int(c), float(H[r, c].real), float(H[r, c].imag)] for r, c in zip(rows, cols)]
    return {
        "sites": system.size,
        "lead_len": system.lead_len,
        "gauge": system.gauge.value,
        "spec": system.spec.to_dict(),
        "triplets": triplets,
        "index_map": {_label_str(k): v for k, v in sorted(system.index_map.items(), key=lambda kv: (kv[1], kv[0]))},
    }


def lattice_to_json(system: LatticeSystem, **kwargs) -> str:
    return json.dumps(lattice_to_dict(system), **kwargs)
