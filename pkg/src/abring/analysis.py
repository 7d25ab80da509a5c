"""Sweeps over (k, flux), transmission zeros, resonant fluxes and symmetry audits."""
from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from .errors import BranchMismatchError, EmptyGridError, NoSolutionError, UnsupportedFluxError
from .model import RingSpec
from .scattering import (
    EPS_BAND,
    EPS_SIN,
    _closed_form,
    _check_band,
    cage_kind,
    solve_batch,
    solve_linear,
)

__all__ = [
    "ALL_K",
    "GridSpec",
    "SweepGrid",
    "sweep",
    "find_zeros",
    "difference_family_zeros",
    "scan_zeros",
    "Resonances",
    "find_resonant_flux",
    "SymmetryReport",
    "symmetry_audit",
    "zero_flux_claim_scan",
    "write_atomic",
]

ALL_K = "all"
ZERO_T = 1e-18
RESONANT_T = 1 - 1e-9


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ABRING_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    num: int

    def values(self) -> np.ndarray:
        if self.num < 1:
            raise EmptyGridError("grid has no points")
        return np.linspace(self.start, self.stop, int(self.num))

    def to_dict(self) -> dict:
        return {"start": self.start, "stop": self.stop, "num": self.num}


DEFAULT_K_GRID = GridSpec(0.01, math.pi - 0.01, 401)
DEFAULT_FLUX_GRID = GridSpec(-math.pi, math.pi, 401)


def _grid_values(grid) -> np.ndarray:
    if isinstance(grid, GridSpec):
        return grid.values()
    values = np.asarray(grid, dtype=float).ravel()
    if values.size == 0:
        raise EmptyGridError("grid has no points")
    return values


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass(frozen=True, eq=False)
class SweepGrid:
    """``T[i, j]`` and ``R[i, j]`` at ``k_values[i]`` and ``flux_values[j]``."""

    spec: RingSpec
    k_values: np.ndarray
    flux_values: np.ndarray
    T: np.ndarray
    R: np.ndarray
    k_grid: Optional[dict] = None
    flux_grid: Optional[dict] = None

    def column(self, flux: float) -> np.ndarray:
        j = int(np.argmin(np.abs(self.flux_values - flux)))
        return self.T[:, j]

    def to_csv(self) -> str:
        lines = ["k,flux,T,R"]
        for i, k in enumerate(self.k_values):
            for j, f in enumerate(self.flux_values):
                lines.append(",".join(_fmt(v) for v in (k, f, self.T[i, j], self.R[i, j])))
        return "\n".join(lines) + "\n"

    def sidecar(self) -> dict:
        spec = self.spec.to_dict()
        spec.pop("flux")
        return {
            "spec": spec,
            "k_grid": self.k_grid or {"values": len(self.k_values)},
            "flux_grid": self.flux_grid or {"values": len(self.flux_values)},
            "tool_version": __version__,
        }

    def write(self, path) -> None:
        """CSV at ``path`` plus a JSON sidecar at ``path + '.json'``."""
        write_atomic(path, self.to_csv())
        write_atomic(os.fspath(path) + ".json", json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n")


def sweep(spec: RingSpec, k_grid=DEFAULT_K_GRID, flux_grid=DEFAULT_FLUX_GRID) -> SweepGrid:
    """Tabulate T from the closed forms and R from the matching equations.

    The flux stored in ``spec`` is ignored.  ``R`` comes from the independent
    linear route, so ``T + R = 1`` is a genuine cross-check.
    """
    ks = _grid_values(k_grid)
    fluxes = _grid_values(flux_grid)
    _check_band(ks, EPS_BAND)

    def row(k):
        t, _ = _closed_form(spec.n_alpha, spec.n_beta, fluxes, k)
        r, _ = solve_batch(spec.n_alpha, spec.n_beta, fluxes, k)
        return np.abs(t) ** 2, np.abs(r) ** 2

    workers = min(_threads(), len(ks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(row, ks))
    else:
        rows = [row(k) for k in ks]
    T = np.array([r[0] for r in rows])
    R = np.array([r[1] for r in rows])
    return SweepGrid(
        spec, ks, fluxes, T, R,
        k_grid=k_grid.to_dict() if isinstance(k_grid, GridSpec) else None,
        flux_grid=flux_grid.to_dict() if isinstance(flux_grid, GridSpec) else None,
    )


# -- transmission zeros ---------------------------------------------------------

def _flux_class(flux: float) -> int:
    """0 for integer flux quanta, 1 for half-integer ones."""
    reduced = math.remainder(flux, 2 * math.pi)
    if abs(reduced) <= 1e-9:
        return 0
    if abs(abs(reduced) - math.pi) <= 1e-9:
        return 1
    raise UnsupportedFluxError(f"zeros are only tabulated at flux 0 or pi (mod 2 pi), got {flux!r}")


def _multiples(step: float, offset: float, eps_band: float) -> List[float]:
    """All ``k = offset + m * step`` in (0, pi) with |sin k| > eps_band."""
    out = []
    m = 0
    while True:
        k = offset + m * step
        if k >= math.pi:
            break
        if k > 0 and abs(math.sin(k)) > eps_band:
            out.append(k)
        m += 1
    return out


def difference_family_zeros(n_alpha: int, n_beta: int, flux: float, eps_band: float = EPS_BAND) -> List[float]:
    """Candidates ``k = (2m+1) pi / |Na - Nb|`` (flux 0) or ``2 m pi / |Na - Nb|`` (flux pi)."""
    half = _flux_class(flux)
    d = abs(n_alpha - n_beta)
    if d == 0:
        return []
    if half:
        return _multiples(2 * math.pi / d, 0.0, eps_band)
    return _multiples(2 * math.pi / d, math.pi / d, eps_band)


def _sum_family(n_alpha, n_beta, half, eps_band):
    s = n_alpha + n_beta
    if half:
        return _multiples(2 * math.pi / s, math.pi / s, eps_band)
    return _multiples(2 * math.pi / s, 0.0, eps_band)


def find_zeros(n_alpha: int, n_beta: int, flux: float, eps_band: float = EPS_BAND) -> Union[List[float], str]:
    """Wave vectors in (0, pi) where the transmission vanishes exactly.

    At flux 0 the zeros solve ``sin(Na k) = -sin(Nb k)``, at flux pi
    ``sin(Na k) = sin(Nb k)``.  Both the ``(Na - Nb) k`` and ``(Na + Nb) k``
    families of solutions are enumerated, then each candidate is kept only if
    the linear solve confirms ``T < 1e-18``.  Equal arms at half-integer flux
    block every k and return :data:`ALL_K`.
    """
    half = _flux_class(flux)
    if n_alpha == n_beta and half:
        return ALL_K
    candidates = difference_family_zeros(n_alpha, n_beta, flux, eps_band) + _sum_family(n_alpha, n_beta, half, eps_band)
    zeros = []
    for k in sorted(candidates):
        if zeros and abs(k - zeros[-1]) < 1e-12:
            continue
        sol = solve_linear(RingSpec(n_alpha, n_beta, math.pi * half), k)
        if sol.T < ZERO_T:
            zeros.append(k)
    return zeros


def _oracle_T(n_alpha, n_beta, flux, k):
    _, t = solve_batch(n_alpha, n_beta, flux, k)
    return np.abs(t) ** 2


def scan_zeros(n_alpha: int, n_beta: int, flux: float, num: int = 2000, threshold: float = 1e-12) -> List[float]:
    """Zeros located by a dense k-scan of the linear route and local refinement."""
    ks = np.linspace(0.0, math.pi, num + 2)[1:-1]
    T = _oracle_T(n_alpha, n_beta, flux, ks)
    found = []
    for i in range(len(ks)):
        left = T[i - 1] if i > 0 else np.inf
        right = T[i + 1] if i + 1 < len(ks) else np.inf
        if not (T[i] <= left and T[i] <= right):
            continue
        lo = ks[i - 1] if i > 0 else ks[i] / 2
        hi = ks[i + 1] if i + 1 < len(ks) else (ks[i] + math.pi) / 2
        res = minimize_scalar(
            lambda k: float(_oracle_T(n_alpha, n_beta, flux, k)),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-12},
        )
        best_k, best_T = (res.x, res.fun) if res.fun < T[i] else (ks[i], T[i])
        if best_T < threshold and not any(abs(best_k - f) < 1e-6 for f in found):
            found.append(float(best_k))
    return sorted(found)


# -- resonant flux -------------------------------------------------------------

@dataclass(frozen=True)
class Resonances:
    fluxes: List[float]
    method: str
    k: float = 0.0
    transmissions: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"k": self.k, "method": self.method, "fluxes": list(self.fluxes), "T": list(self.transmissions)}


def _from_cosine(c: float, where: str) -> List[float]:
    if abs(c) > 1 + 1e-12:
        raise NoSolutionError(f"resonance needs cos(flux) = {c:.6g}, out of range ({where})")
    phi = math.acos(min(1.0, max(-1.0, c)))
    return [phi] if phi in (0.0, math.pi) else [-phi, phi]


def _numeric_resonances(n_alpha, n_beta, k, num=4001):
    fluxes = np.linspace(-math.pi, math.pi, num)
    T = _oracle_T(n_alpha, n_beta, fluxes, k)
    found = []
    for i in range(1, num - 1):
        if T[i] >= T[i - 1] and T[i] >= T[i + 1] and T[i] > 0.99:
            res = minimize_scalar(
                lambda f: -float(_oracle_T(n_alpha, n_beta, f, k)),
                bounds=(fluxes[i - 1], fluxes[i + 1]), method="bounded", options={"xatol": 1e-12},
            )
            found.append(float(res.x))
    return found


def find_resonant_flux(n_alpha: int, n_beta: int, k: float, fallback: bool = True) -> Resonances:
    """Fluxes in (-pi, pi] giving full transmission at wave vector ``k``.

    Closed-form cosine conditions are used when ``sin(Na k)`` or ``sin(Nb k)``
    vanishes or when one arm is a single link; otherwise a dense flux scan is
    refined numerically (``method == "numeric"``), or
    :class:`BranchMismatchError` is raised when ``fallback`` is false.
    Every returned flux is confirmed by the linear solve.
    """
    _check_band(k, EPS_BAND)
    s = math.sin(k)
    zero_a = abs(math.sin(n_alpha * k)) <= EPS_SIN
    zero_b = abs(math.sin(n_beta * k)) <= EPS_SIN
    if zero_a and zero_b:
        # only the trapping flux transmits, with T = sin^2 k
        trap = 0.0 if math.cos(n_alpha * k) * math.cos(n_beta * k) > 0 else math.pi
        if s * s < RESONANT_T:
            raise NoSolutionError("cage wave vector: at most sin^2 k is transmitted")
        fluxes, method = [trap], "trapping"
    elif zero_a:
        c = -math.copysign(1.0, math.cos(n_alpha * k)) * math.sin((n_beta - 1) * k) / s
        fluxes, method = _from_cosine(c, "sin(Na k) = 0"), "sin_zero_alpha"
    elif zero_b:
        c = -math.copysign(1.0, math.cos(n_beta * k)) * math.sin((n_alpha - 1) * k) / s
        fluxes, method = _from_cosine(c, "sin(Nb k) = 0"), "sin_zero_beta"
    elif n_alpha == 1 or n_beta == 1:
        other = n_beta if n_alpha == 1 else n_alpha
        c = -math.sin(other * k) / (2 * s)
        fluxes, method = _from_cosine(c, "single-link arm"), "single_link_arm"
    elif fallback:
        fluxes, method = _numeric_resonances(n_alpha, n_beta, k), "numeric"
    else:
        raise BranchMismatchError(f"k = {k!r} fits no closed-form resonance condition")

    Ts = [solve_linear(RingSpec(n_alpha, n_beta, f), k).T for f in fluxes]
    keep = [(f, T) for f, T in zip(fluxes, Ts) if T > RESONANT_T]
    if method != "numeric" and len(keep) != len(fluxes):
        raise NoSolutionError(f"closed-form resonance not confirmed by linear solve: T = {Ts}")
    return Resonances([f for f, _ in keep], method, float(k), [T for _, T in keep])


# -- audits -----------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryReport:
    spec: RingSpec
    seed: int
    sample_count: int
    unitarity: float
    flux_period: float
    flux_reversal: float
    k_reversal: float
    half_flux_max_T: Optional[float]
    tolerance: float = 1e-10

    @property
    def passed(self) -> bool:
        ok = max(self.unitarity, self.flux_period, self.flux_reversal, self.k_reversal) < self.tolerance
        if self.half_flux_max_T is not None:
            ok = ok and self.half_flux_max_T < ZERO_T
        return ok

    def to_dict(self) -> dict:
        spec = self.spec.to_dict()
        spec.pop("flux")
        return {
            "spec": spec,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "max_deviation": {
                "unitarity": self.unitarity,
                "flux_period": self.flux_period,
                "flux_reversal": self.flux_reversal,
                "k_reversal": self.k_reversal,
            },
            "equal_arms_half_flux_max_T": self.half_flux_max_T,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def symmetry_audit(spec: RingSpec, sample_count: int = 1000, seed: int = 0) -> SymmetryReport:
    """Randomised check of unitarity and the flux/k symmetries of T."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    na, nb = spec.n_alpha, spec.n_beta
    flux = rng.uniform(-math.pi, math.pi, sample_count)
    k = rng.uniform(0.01, math.pi - 0.01, sample_count)

    r, t = solve_batch(na, nb, flux, k)
    T = np.abs(t) ** 2
    T_period = np.abs(solve_batch(na, nb, flux + 2 * math.pi, k)[1]) ** 2
    T_rev = np.abs(solve_batch(na, nb, -flux, k)[1]) ** 2
    T_krev = np.abs(solve_batch(na, nb, flux, -k)[1]) ** 2
    half = None
    if na == nb:
        half = float(np.max(np.abs(solve_batch(na, nb, math.pi, k)[1]) ** 2))
    return SymmetryReport(
        spec, seed, sample_count,
        unitarity=float(np.max(np.abs(np.abs(r) ** 2 + T - 1))),
        flux_period=float(np.max(np.abs(T - T_period))),
        flux_reversal=float(np.max(np.abs(T - T_rev))),
        k_reversal=float(np.max(np.abs(T - T_krev))),
        half_flux_max_T=half,
    )


def zero_flux_claim_scan(n_alpha: int, n_beta: int, k_num: int = 400, flux_num: int = 400,
                         exclusion: float = 1e-3) -> dict:
    """Look for exact zeros at fluxes away from 0 and pi.

    Scans a (k, flux) grid augmented with every cage wave vector
    ``m pi / gcd(Na, Nb)``.  Zeros found there are listed as counterexamples
    to the rule that interference zeros need flux 0 or pi.
    """
    g = math.gcd(n_alpha, n_beta)
    cage_ks = [m * math.pi / g for m in range(1, g)]
    ks = np.concatenate([np.linspace(0.01, math.pi - 0.01, k_num), cage_ks])
    fluxes = np.linspace(-math.pi, math.pi, flux_num)
    fluxes = fluxes[(np.abs(fluxes) > exclusion) & (math.pi - np.abs(fluxes) > exclusion)]
    K, F = np.meshgrid(ks, fluxes, indexing="ij")
    T = _oracle_T(n_alpha, n_beta, F, K)
    counter = []
    for i in np.nonzero(np.min(T, axis=1) < ZERO_T)[0]:
        j = int(np.argmin(T[i]))
        kind = cage_kind(n_alpha, n_beta, F[i, j], K[i, j])
        counter.append({"k": float(K[i, j]), "flux": float(F[i, j]), "T": float(T[i, j]),
                        "cage": bool(kind)})
    return {
        "n_alpha": n_alpha,
        "n_beta": n_beta,
        "min_T_off_special_flux": float(np.min(T[: k_num])),
        "counterexamples": counter,
    }
