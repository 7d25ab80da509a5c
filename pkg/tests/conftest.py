import math

import numpy as np
import pytest

from abring import RingSpec, build_ring

# lines recorded by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES = []


def green_transmission(spec: RingSpec, k: float) -> complex:
    """Transmission amplitude from the ring Green's function with lead self-energies.

    Independent of the plane-wave matching system: uses only the ring matrix
    and the semi-infinite chain self-energy ``-J exp(ik)`` on both nodes.
    """
    H = build_ring(spec).matrix
    J = spec.coupling
    n = H.shape[0]
    a, b = 0, spec.n_alpha
    sigma = np.zeros((n, n), complex)
    sigma[a, a] = sigma[b, b] = -J * np.exp(1j * k)
    G = np.linalg.inv(-2 * J * math.cos(k) * np.eye(n) - H - sigma)
    return 2j * J * math.sin(k) * G[b, a]


@pytest.fixture(scope="session")
def green():
    return green_transmission


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
