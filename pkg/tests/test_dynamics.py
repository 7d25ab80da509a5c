import math
import warnings

import numpy as np
import pytest

from abring import (
    Gauge,
    NotCageConditionError,
    ReflectionContaminationError,
    RingSpec,
    TailOverflowError,
    WavePacketSpec,
    build_gaussian,
    build_lattice,
    cage_experiment,
    cage_state,
    evolve,
    measure_transmission,
    solve_linear,
)
from abring.scattering import solve_batch
from abring.dynamics import EvolutionTrace, Propagator, propagate, snapshots, snapshots_to_csv

HALF = math.pi / 2


def chain(n, J=1.0):
    return -J * (np.eye(n, k=1) + np.eye(n, k=-1)).astype(complex)


# -- packets -----------------------------------------------------------------

def test_gaussian_is_normalised_and_confined():
    system = build_lattice(RingSpec(3, 1), lead_len=300)
    psi = build_gaussian(system, WavePacketSpec(1.0, center=150))
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-14)
    assert np.all(psi[system.ring_rows] == 0) and np.all(psi[system.output_rows] == 0)
    assert np.argmax(np.abs(psi)) == 150


def test_gaussian_delta_limit():
    system = build_lattice(RingSpec(1, 1), lead_len=21)
    with pytest.warns(UserWarning):
        packet = WavePacketSpec(0.7, center=10, width_w=40.0)
    psi = build_gaussian(system, packet)
    assert abs(psi[10]) == pytest.approx(1.0, abs=1e-14)


def test_tail_overflow():
    system = build_lattice(RingSpec(2, 1), lead_len=100)
    with pytest.raises(TailOverflowError):
        build_gaussian(system, WavePacketSpec(1.0, center=50, width_w=0.05))


def test_packet_spec_validation():
    with pytest.raises(Exception):
        WavePacketSpec(1.0, width_w=0.0)
    p = WavePacketSpec(1.0, width_w=0.05)
    assert p.sigma_k == pytest.approx(0.05 / math.sqrt(2))
    assert p.tail == 120


@pytest.mark.parametrize("k", [math.pi / 3, HALF, 2.5])
def test_group_velocity(k):
    n, c, t = 900, 250, 150.0
    H = chain(n)
    sites = np.arange(n)
    psi0 = np.exp(-(0.05**2) * (sites - c) ** 2 / 2 + 1j * k * sites)
    psi0 /= np.linalg.norm(psi0)
    psi = propagate(H, psi0, [0.0, t])
    x = (np.abs(psi) ** 2) @ sites
    assert (x[1] - x[0]) / t == pytest.approx(2 * math.sin(k), rel=0.01)


# -- evolution -------------------------------------------------------------------

def test_zero_time_is_identity():
    system = build_lattice(RingSpec(2, 3, 0.4), lead_len=5)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=system.size) + 1j * rng.normal(size=system.size)
    psi /= np.linalg.norm(psi)
    assert np.allclose(Propagator(system.matrix).states(psi, [0.0])[0], psi, atol=1e-13)


def test_isolated_site_is_static():
    H = np.zeros((3, 3), complex)
    H[1, 2] = H[2, 1] = -1.0
    out = propagate(H, np.array([1, 0, 0], complex), np.linspace(0, 10, 11))
    assert np.allclose(np.abs(out[:, 0]) ** 2, 1.0, atol=1e-14)


def test_dimer_rabi():
    out = propagate(chain(2), np.array([1, 0], complex), [HALF, 1.0])
    assert abs(out[0, 1]) ** 2 == pytest.approx(1.0, abs=1e-9)
    assert abs(out[1, 1]) ** 2 == pytest.approx(math.sin(1.0) ** 2, abs=1e-9)


def test_trace_partition_and_norm():
    system = build_lattice(RingSpec(3, 2, 0.5), lead_len=80)
    with pytest.warns(UserWarning, match="momentum spread"):
        packet = WavePacketSpec(1.2, center=40, width_w=0.3)
    psi = build_gaussian(system, packet)
    trace = evolve(system, psi, 60.0, 0.5)
    assert np.max(np.abs(trace.norm - 1)) < 1e-9
    assert np.array_equal(trace.norm, trace.p_in + trace.p_ring + trace.p_out)
    assert np.all(np.diff(trace.times) > 0)
    lines = trace.to_csv().splitlines()
    assert lines[0] == "time,p_in,p_ring,p_out,norm" and len(lines) == len(trace.times) + 1


def test_snapshots_csv():
    system = build_lattice(RingSpec(1, 2), lead_len=3)
    psi = np.zeros(system.size, complex)
    psi[0] = 1
    dens = snapshots(system, psi, [0.0, 1.0])
    assert dens.shape == (2, system.size)
    assert np.allclose(dens.sum(axis=1), 1.0)
    text = snapshots_to_csv([0.0, 1.0], dens)
    assert text.startswith("time,site,density\n") and text.count("\n") == 2 * system.size + 1


def test_bad_times_rejected():
    system = build_lattice(RingSpec(1, 1), lead_len=2)
    psi = np.zeros(system.size, complex)
    psi[0] = 1
    with pytest.raises(Exception):
        evolve(system, psi, 0.0, 0.1)
    with pytest.raises(Exception):
        evolve(system, psi, 1.0, -0.1)


# -- dynamical transmission ---------------------------------------------------

@pytest.mark.parametrize("flux,k,T", [(0.0, math.pi / 3, 3 / 7), (HALF, HALF, 8 / 9)])
def test_dynamic_golden_values(flux, k, T):
    run = measure_transmission(RingSpec(3, 1, flux), WavePacketSpec(k))
    assert run.T_dyn == pytest.approx(T, abs=0.02)
    assert run.T_analytic == pytest.approx(T, abs=1e-12)
    assert run.plateau_variation() < 0.005


def momentum_average(spec, k, w):
    """Plane-wave T averaged over the packet's momentum density exp(-(q-k)^2 / w^2)."""
    q = np.linspace(k - 8 * w, k + 8 * w, 4001)
    _, t = solve_batch(spec.n_alpha, spec.n_beta, spec.flux, q)
    weight = np.exp(-((q - k) ** 2) / w**2)
    return float(np.sum(weight * np.abs(t) ** 2) / np.sum(weight))


@pytest.mark.parametrize("flux", [0.0, 0.7, -1.0])
def test_cage_blocks_packet(flux):
    assert measure_transmission(RingSpec(2, 4, flux), WavePacketSpec(HALF)).T_dyn < 0.01


@pytest.mark.parametrize(
    "spec,k",
    [(RingSpec(3, 1, 0.0), math.pi / 3), (RingSpec(3, 1, HALF), HALF), (RingSpec(4, 3, 0.9), 1.1),
     (RingSpec(2, 4, 1.0), HALF), (RingSpec(2, 4, 2.0), HALF)],
)
def test_packet_sees_momentum_averaged_transmission(spec, k):
    # near the trapping flux T(q) peaks sharply next to the cage point, so the
    # finite packet picks up far more than the plane-wave zero
    run = measure_transmission(spec, WavePacketSpec(k))
    assert run.T_dyn == pytest.approx(momentum_average(spec, k, 0.05), abs=1e-5)


def test_trapping_flux_transmits_packet():
    # the lattice bound state needs flux pi here and the scattering state then passes
    assert measure_transmission(RingSpec(2, 4, math.pi), WavePacketSpec(HALF)).T_dyn > 0.99


def test_dynamic_flux_reversal():
    packet = WavePacketSpec(1.1)
    a = measure_transmission(RingSpec(4, 3, 0.9), packet).T_dyn
    b = measure_transmission(RingSpec(4, 3, -0.9), packet).T_dyn
    assert a == pytest.approx(b, abs=1e-6)


def test_dynamic_gauge_invariance():
    spec, packet = RingSpec(3, 4, 1.3), WavePacketSpec(1.9, width_w=0.1)
    a = measure_transmission(spec, packet, gauge=Gauge.UNIFORM).trace
    b = measure_transmission(spec, packet, gauge=Gauge.SINGLE_LINK).trace
    for name in ("p_in", "p_ring", "p_out"):
        assert np.max(np.abs(getattr(a, name) - getattr(b, name))) < 1e-9


def test_reflection_contamination():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        packet = WavePacketSpec(0.4, center=20, width_w=0.5)
    with pytest.raises(ReflectionContaminationError):
        measure_transmission(RingSpec(2, 1), packet, lead_len=40)


def curvature(spec, k, h=1e-4):
    T = [solve_linear(spec, k + d).T for d in (-h, 0.0, h)]
    return (T[0] - 2 * T[1] + T[2]) / h**2


def test_random_suite():
    rng = np.random.default_rng(11)
    packet_w = 0.05
    sigma2 = packet_w**2 / 2
    done, seen, excluded = [], set(), 0
    while len(done) < 20:
        na, nb = (int(v) for v in rng.integers(1, 6, 2))
        flux = float(rng.choice([0.0, HALF, -HALF, math.pi]))
        k = float(rng.choice([math.pi / 3, HALF, 2 * math.pi / 3]))
        if (na, nb, flux, k) in seen:
            continue
        seen.add((na, nb, flux, k))
        spec = RingSpec(na, nb, flux)
        # second-order packet averaging shifts T by about T'' sigma_k^2 / 2
        if 0.5 * abs(curvature(spec, k)) * sigma2 >= 0.01:
            excluded += 1
            continue
        run = measure_transmission(spec, WavePacketSpec(k, width_w=packet_w))
        done.append(abs(run.T_dyn - run.T_analytic))
    assert max(done) <= 0.02


# -- cage ------------------------------------------------------------------------

@pytest.mark.parametrize("na,nb,flux", [(2, 2, 0.0), (2, 4, math.pi), (4, 4, 0.0), (4, 2, math.pi)])
def test_cage_holds(na, nb, flux):
    assert cage_experiment(RingSpec(na, nb, flux), HALF) < 1e-10


@pytest.mark.parametrize("gauge", [Gauge.UNIFORM, Gauge.SINGLE_LINK])
def test_cage_state_is_eigenvector(gauge):
    system = build_lattice(RingSpec(3, 6, math.pi), gauge, lead_len=4)
    psi = cage_state(system, math.pi / 3)
    E = -2 * math.cos(math.pi / 3)
    assert np.linalg.norm(system.matrix @ psi - E * psi) < 1e-12
    assert np.all(psi[system.input_rows] == 0) and np.all(psi[system.output_rows] == 0)


def test_cage_needs_trapping_flux():
    with pytest.raises(NotCageConditionError):
        cage_experiment(RingSpec(2, 2, 0.5), HALF)
    with pytest.raises(NotCageConditionError):
        cage_experiment(RingSpec(2, 3, 0.0), HALF)


def test_cage_noise_bound():
    noise = 0.01
    leak = cage_experiment(RingSpec(2, 4, math.pi), HALF, noise=noise, seed=1)
    # the part orthogonal to the cage state has weight at most (noise / (1 - noise))^2
    assert 1e-12 < leak <= (noise / (1 - noise)) ** 2
    assert leak == cage_experiment(RingSpec(2, 4, math.pi), HALF, noise=noise, seed=1)
