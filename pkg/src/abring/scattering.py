"""Exact plane-wave scattering through the ring.

Two independent routes are provided:

* :func:`solve_linear` solves the six matching equations for
  ``(r, t, X_alpha, Y_alpha, X_beta, Y_beta)`` directly;
* :func:`transmission_closed_form` evaluates the closed-form expressions,
  picking the regularised branch whenever ``sin(N k)`` vanishes for an arm.

Arm wave functions are ``psi_j = X exp(ikj) + Y exp(-ikj)``; the input lead
carries ``exp(ikj) + r exp(-ikj)`` and the output lead ``t exp(ikj)``.

Cage points (``sin(Na k) = sin(Nb k) = 0``) are special.  For a generic flux
the incoming wave is fully reflected.  At the single *trapping* flux
``exp(i flux) = cos(Na k) cos(Nb k)`` a bound state sits inside the ring at the
same energy; the matching equations are then singular but consistent, and the
scattering state has ``t = cos(Na k) i sin k exp(-ik)``, so ``T = sin^2 k``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BandEdgeError, DomainError
from .model import RingSpec

__all__ = [
    "EPS_BAND",
    "EPS_SIN",
    "Method",
    "ScatteringSolution",
    "HalfPiTransmission",
    "boundary_system",
    "boundary_residual",
    "cage_kind",
    "solve_linear",
    "solve_batch",
    "transmission_closed_form",
    "closed_form_method",
    "solve_closed_form",
    "transmission_n_alpha_one",
    "solve_n_alpha_one",
    "transmission_k_half_pi",
]

EPS_BAND = 1e-9
EPS_SIN = 1e-9

NOT_CAGE, CAGE, TRAPPING = 0, 1, 2


class Method(str, enum.Enum):
    LINEAR_SYSTEM = "LinearSystem"
    CLOSED_FORM_GENERAL = "ClosedFormGeneral"
    CLOSED_FORM_SIN_ZERO_ALPHA = "ClosedFormSinZeroAlpha"
    CLOSED_FORM_SIN_ZERO_BETA = "ClosedFormSinZeroBeta"
    CLOSED_FORM_N_ALPHA_ONE = "ClosedFormNAlphaOne"
    CAGE = "Cage"
    CAGE_TRAPPING = "CageTrapping"


# integer codes used by the vectorised closed form
_METHOD_CODES = (
    Method.CLOSED_FORM_GENERAL,
    Method.CLOSED_FORM_SIN_ZERO_ALPHA,
    Method.CLOSED_FORM_SIN_ZERO_BETA,
    Method.CAGE,
    Method.CAGE_TRAPPING,
)


@dataclass(frozen=True)
class ScatteringSolution:
    spec: RingSpec
    k: float
    r: complex
    t: complex
    x_alpha: complex
    y_alpha: complex
    x_beta: complex
    y_beta: complex
    method: Method

    @property
    def energy(self) -> float:
        return -2.0 * self.spec.coupling * math.cos(self.k)

    @property
    def T(self) -> float:
        return abs(self.t) ** 2

    @property
    def R(self) -> float:
        return abs(self.r) ** 2

    @property
    def unknowns(self) -> np.ndarray:
        return np.array([self.r, self.t, self.x_alpha, self.y_alpha, self.x_beta, self.y_beta])

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "flux": self.spec.flux,
            "n_alpha": self.spec.n_alpha,
            "n_beta": self.spec.n_beta,
            "re_t": float(self.t.real),
            "im_t": float(self.t.imag),
            "re_r": float(self.r.real),
            "im_r": float(self.r.imag),
            "T": self.T,
            "R": self.R,
            "method": self.method.value,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _check_band(k, eps_band=EPS_BAND):
    if np.any(np.abs(np.sin(k)) <= eps_band):
        raise BandEdgeError(f"band edge: |sin k| <= {eps_band:g} (k = {k})")


def boundary_system(n_alpha: int, n_beta: int, flux, k):
    """Matching equations ``A @ (r, t, Xa, Ya, Xb, Yb) = b``.

    ``flux`` and ``k`` broadcast; ``A`` has shape ``(..., 6, 6)``.
    """
    flux, k = np.broadcast_arrays(np.asarray(flux, float), np.asarray(k, float))
    e = lambda n: np.exp(1j * k * n)  # noqa: E731
    ep = np.exp(1j * flux)
    zero = np.zeros(k.shape, complex)
    one = np.ones(k.shape, complex)
    na, nb = n_alpha, n_beta
    rows = [
        [-one, zero, one, one, zero, zero],
        [-one, zero, zero, zero, one, one],
        [zero, -one, e(na), e(-na), zero, zero],
        [zero, -ep, zero, zero, e(nb), e(-nb)],
        [-e(-1), zero, e(1), e(-1), e(1), e(-1)],
        [zero, -e(-1), e(na - 1), e(1 - na), e(nb - 1) / ep, e(1 - nb) / ep],
    ]
    A = np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)
    b = np.stack([one, one, zero, zero, e(1), zero], axis=-1)
    return A, b


def boundary_residual(sol: ScatteringSolution) -> float:
    A, b = boundary_system(sol.spec.n_alpha, sol.spec.n_beta, sol.spec.flux, sol.k)
    return float(np.max(np.abs(A @ sol.unknowns - b)))


def cage_kind(n_alpha: int, n_beta: int, flux, k, eps_sin: float = EPS_SIN):
    """Classify points as ``NOT_CAGE`` (0), ``CAGE`` (1) or ``TRAPPING`` (2)."""
    flux, k = np.broadcast_arrays(np.asarray(flux, float), np.asarray(k, float))
    both = (np.abs(np.sin(n_alpha * k)) <= eps_sin) & (np.abs(np.sin(n_beta * k)) <= eps_sin)
    sign = np.sign(np.cos(n_alpha * k)) * np.sign(np.cos(n_beta * k))
    trap = both & (np.abs(np.exp(1j * flux) - sign) <= eps_sin)
    kind = np.where(trap, TRAPPING, np.where(both, CAGE, NOT_CAGE))
    return kind if kind.ndim else int(kind)


def _trapping_rt(n_alpha, k):
    u = 1j * np.sin(k) * np.exp(-1j * k)
    return u - 1.0, np.sign(np.cos(n_alpha * k)) * u


def _amplitudes_given(A, b, r=None, t=None):
    """Least-squares arm amplitudes (and r when not supplied) for fixed t."""
    known = [(0, r), (1, t)]
    rhs = b.copy()
    free = list(range(6))
    for col, val in known:
        if val is not None:
            rhs = rhs - A[:, col] * val
            free.remove(col)
    x, *_ = np.linalg.lstsq(A[:, free], rhs, rcond=None)
    out = np.zeros(6, complex)
    out[free] = x
    for col, val in known:
        if val is not None:
            out[col] = val
    return out


def _solution(spec, k, x, method) -> ScatteringSolution:
    x = [complex(v) for v in x]
    return ScatteringSolution(spec, float(k), x[0], x[1], x[2], x[3], x[4], x[5], method)


def solve_linear(spec: RingSpec, k: float, eps_band: float = EPS_BAND, eps_sin: float = EPS_SIN) -> ScatteringSolution:
    """Solve the six matching equations at wave vector ``k``.

    Raises :class:`BandEdgeError` when ``|sin k| <= eps_band``.
    """
    _check_band(k, eps_band)
    A, b = boundary_system(spec.n_alpha, spec.n_beta, spec.flux, k)
    kind = cage_kind(spec.n_alpha, spec.n_beta, spec.flux, k, eps_sin)
    if kind == CAGE:
        x = _amplitudes_given(A, b, r=-1.0, t=0.0)
        return _solution(spec, k, x, Method.CAGE)
    if kind == TRAPPING:
        # singular but consistent: the null vector is the ring bound state
        x, *_ = np.linalg.lstsq(A, b, rcond=1e-10)
        return _solution(spec, k, x, Method.CAGE_TRAPPING)
    return _solution(spec, k, np.linalg.solve(A, b), Method.LINEAR_SYSTEM)


def solve_batch(n_alpha: int, n_beta: int, flux, k, eps_band: float = EPS_BAND, eps_sin: float = EPS_SIN):
    """Vectorised :func:`solve_linear`; returns ``(r, t)`` arrays.

    Cage and trapping points use their exact values instead of a solve.
    """
    flux, k = np.broadcast_arrays(np.asarray(flux, float), np.asarray(k, float))
    _check_band(k, eps_band)
    kind = np.atleast_1d(cage_kind(n_alpha, n_beta, flux, k, eps_sin))
    fl, kk = np.atleast_1d(flux).ravel(), np.atleast_1d(k).ravel()
    kind = kind.ravel()
    r = np.full(kk.shape, -1.0 + 0j)
    t = np.zeros(kk.shape, complex)
    regular = kind == NOT_CAGE
    if regular.any():
        A, b = boundary_system(n_alpha, n_beta, fl[regular], kk[regular])
        x = np.linalg.solve(A, b[..., None])[..., 0]
        r[regular], t[regular] = x[:, 0], x[:, 1]
    trap = kind == TRAPPING
    if trap.any():
        r[trap], t[trap] = _trapping_rt(n_alpha, kk[trap])
    return r.reshape(k.shape), t.reshape(k.shape)


# -- closed forms -------------------------------------------------------------

def _t_sin_zero(n_zero, n_other, flux, k):
    """Branch where ``sin(n_zero k) = 0`` (upper arm of length ``n_zero``)."""
    s = np.sin(k)
    so = np.sin(n_other * k)
    return 1j * so * s / (np.cos(flux) * s + np.exp(1j * n_zero * k) * (np.sin((n_other - 1) * k) + 1j * so * s))


def _t_general(n_alpha, n_beta, flux, k):
    s2 = np.sin(k) ** 2
    a = 1.0 / np.sin(n_alpha * k)
    b = 1.0 / np.sin(n_beta * k)
    ep = np.exp(1j * flux)
    num = 2j * (a + b / ep) * s2
    tail = np.sin((n_alpha - 1) * k) * a + np.sin((n_beta - 1) * k) * b - np.exp(-1j * k)
    den = (a + b * ep) * (a + b / ep) * s2 - tail**2
    return num / den


def _closed_form(n_alpha, n_beta, flux, k, eps_sin=EPS_SIN):
    flux, k = np.broadcast_arrays(np.asarray(flux, float), np.asarray(k, float))
    zero_a = np.abs(np.sin(n_alpha * k)) <= eps_sin
    zero_b = np.abs(np.sin(n_beta * k)) <= eps_sin
    kind = np.asarray(cage_kind(n_alpha, n_beta, flux, k, eps_sin))
    code = np.select(
        [kind == CAGE, kind == TRAPPING, zero_a, zero_b],
        [3, 4, 1, 2],
        default=0,
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.select(
            [code == 0, code == 1, code == 2, code == 4],
            [
                _t_general(n_alpha, n_beta, flux, k),
                _t_sin_zero(n_alpha, n_beta, flux, k),
                np.exp(-1j * flux) * _t_sin_zero(n_beta, n_alpha, flux, k),
                _trapping_rt(n_alpha, k)[1],
            ],
            default=0.0 + 0j,
        )
    return t, code


def transmission_closed_form(spec: RingSpec, k, eps_band: float = EPS_BAND, eps_sin: float = EPS_SIN):
    """Closed-form transmission coefficient ``t``; ``k`` may be an array.

    Branches on ``|sin(N k)| <= eps_sin``: both arms -> cage (or trapping
    flux), upper only -> sin-zero form, lower only -> same form with the arms
    exchanged and a factor ``exp(-i flux)``, otherwise the general expression.
    """
    _check_band(k, eps_band)
    t, _ = _closed_form(spec.n_alpha, spec.n_beta, spec.flux, k, eps_sin)
    return complex(t) if np.ndim(t) == 0 else t


def closed_form_method(spec: RingSpec, k: float, eps_sin: float = EPS_SIN) -> Method:
    _, code = _closed_form(spec.n_alpha, spec.n_beta, spec.flux, k, eps_sin)
    return _METHOD_CODES[int(code)]


def solve_closed_form(spec: RingSpec, k: float, eps_band: float = EPS_BAND, eps_sin: float = EPS_SIN) -> ScatteringSolution:
    """Closed-form ``t`` with ``r`` and arm amplitudes recovered from the matching equations."""
    t = transmission_closed_form(spec, k, eps_band, eps_sin)
    method = closed_form_method(spec, k, eps_sin)
    A, b = boundary_system(spec.n_alpha, spec.n_beta, spec.flux, k)
    if method is Method.CAGE:
        x = _amplitudes_given(A, b, r=-1.0, t=0.0)
    elif method is Method.CAGE_TRAPPING:
        r, _ = _trapping_rt(spec.n_alpha, k)
        x = _amplitudes_given(A, b, r=complex(r), t=t)
    else:
        x = _amplitudes_given(A, b, t=t)
    return _solution(spec, k, x, method)


def transmission_n_alpha_one(spec: RingSpec, k, eps_band: float = EPS_BAND):
    """Closed form for a single direct link in the upper arm (``n_alpha == 1``)."""
    if spec.n_alpha != 1:
        raise DomainError("n_alpha must be 1 for this closed form")
    _check_band(k, eps_band)
    nb, flux = spec.n_beta, spec.flux
    s = np.sin(k)
    q = np.sin(nb * k) / s
    t = 2j * (q + np.exp(-1j * flux)) * s / ((q + 2 * np.cos(flux)) + 2j * np.exp(-1j * nb * k) * s)
    return complex(t) if np.ndim(t) == 0 else t


def solve_n_alpha_one(spec: RingSpec, k: float, eps_band: float = EPS_BAND) -> ScatteringSolution:
    t = transmission_n_alpha_one(spec, k, eps_band)
    A, b = boundary_system(spec.n_alpha, spec.n_beta, spec.flux, k)
    return _solution(spec, k, _amplitudes_given(A, b, t=t), Method.CLOSED_FORM_N_ALPHA_ONE)


# -- on-resonance input, k = pi/2 --------------------------------------------

@dataclass(frozen=True)
class HalfPiTransmission:
    T: float
    t_phase: Optional[float]
    case: str

    @property
    def t(self) -> Optional[complex]:
        if self.t_phase is None:
            return None if self.T else 0j
        return math.sqrt(self.T) * complex(math.cos(self.t_phase), math.sin(self.t_phase))


def transmission_k_half_pi(spec: RingSpec) -> HalfPiTransmission:
    """Parity laws for the on-resonance input ``k = pi/2``."""
    na, nb, flux = spec.n_alpha, spec.n_beta, spec.flux
    ea, eb = na % 2 == 0, nb % 2 == 0
    if ea and eb:
        # cos(N pi/2) = (-1)^(N/2) for even N
        ca, cb = (-1) ** (na // 2), (-1) ** (nb // 2)
        if abs(np.exp(1j * flux) - ca * cb) <= EPS_SIN:
            return HalfPiTransmission(1.0, 0.0 if ca > 0 else math.pi, "trapping")
        return HalfPiTransmission(0.0, None, "both_even")
    if ea or eb:
        T = 1.0 / (math.cos(flux) ** 2 + 1.0)
        k = math.pi / 2
        if ea:
            t = _t_sin_zero(na, nb, flux, k)
        else:
            t = np.exp(-1j * flux) * _t_sin_zero(nb, na, flux, k)
        return HalfPiTransmission(T, float(np.angle(t)), "one_even")
    sa = 1 if (na % 4) == 1 else -1
    sb = 1 if (nb % 4) == 1 else -1
    half = flux / 2
    if ((na + nb) // 2) % 2 == 1:
        amp = 4 * math.cos(half) / (4 * math.cos(half) ** 2 + 1)
        phase = (math.pi / 2 if sa > 0 else -math.pi / 2) - half
        case = "both_odd_cos"
    else:
        amp = 4 * math.sin(half) / (4 * math.sin(half) ** 2 + 1)
        phase = (math.pi if sa > 0 else 0.0) - half
        case = "both_odd_sin"
    # amp is signed; fold its sign into the phase
    t = amp * complex(math.cos(phase), math.sin(phase))
    return HalfPiTransmission(amp * amp, float(np.angle(t)) if amp else None, case)
