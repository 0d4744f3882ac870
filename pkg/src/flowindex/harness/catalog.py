"""Built-in scenarios and the seeded random scenario generator."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from ..bvp1d.boundary import GeneratorBoundary, PhaseBoundary, SplitBoundary, periodic
from ..bvp1d.flow import Scenario
from ..bvp1d.potentials import AffinePotential, TrigPotential
from ..bvp1d.system import FirstOrderSystem

SIGMA_1 = np.array([[-1j]])
SIGMA_J = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)
J1_RATE = 4.0


def rotating_phase() -> Scenario:
    """``-i d/dt`` with ``x(1) = exp(i theta_s) x(0)``, ``theta_s = pi + 2 pi s``."""
    system = FirstOrderSystem(SIGMA_1, AffinePotential([[0.0]], [[0.0]]))
    return Scenario(system, PhaseBoundary(np.pi, 3 * np.pi), 7.0, label="R1")


def potential_shift() -> Scenario:
    """``-i d/dt + 2 pi s`` with periodic boundary condition."""
    system = FirstOrderSystem(SIGMA_1, AffinePotential([[0.0]], [[2 * np.pi]]))
    return Scenario(system, periodic(1), 7.0, label="P1")


def jacobi(rate: float = J1_RATE) -> Scenario:
    """``[[0,-1],[1,0]] d/dt + s c I`` with the first component vanishing at both ends.

    The eigenvalues are ``s c + k pi``, so the flow over ``[0, 1]`` counts the
    branches ``k pi`` with ``-c < k pi < 0``, plus one for an arrival at zero.
    """
    system = FirstOrderSystem(SIGMA_J, AffinePotential(np.zeros((2, 2)), rate * np.eye(2)))
    return Scenario(system, SplitBoundary(2, [0]), 6.0, label="J1")


def constant() -> Scenario:
    """``-i d/dt + 1`` with the fixed phase ``pi / 2``; nothing moves."""
    system = FirstOrderSystem(SIGMA_1, AffinePotential([[1.0]], [[1.0]]))
    return Scenario(system, PhaseBoundary(np.pi / 2, np.pi / 2), 7.0, label="Z1")


def doubled_loop() -> Scenario:
    """``-i d/dt`` with the phase running twice around the circle, ``pi -> 5 pi``."""
    system = FirstOrderSystem(SIGMA_1, AffinePotential([[0.0]], [[0.0]]))
    return Scenario(system, PhaseBoundary(np.pi, 5 * np.pi), 7.0, label="L1")


CATALOG = {
    "R1": rotating_phase,
    "P1": potential_shift,
    "J1": jacobi,
    "Z1": constant,
    "L1": doubled_loop,
}

# integer identities each catalog entry must satisfy: (spectral flow, Maslov index)
EXPECTED = {
    "R1": (1, -1),
    "P1": (1, -1),
    "J1": (1, -1),
    "Z1": (0, 0),
    "L1": (2, -2),
}


def catalog_scenario(name: str) -> Scenario:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(CATALOG)}") from None


def _random_hermitian(rng, m, scale):
    a = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return scale * 0.5 * (a + a.conj().T) / np.sqrt(2 * m)


def random_scenario(seed: int, m: int = 2, window: float = 4.0, s_samples: int = 64,
                    sample_hint: int = 8) -> Scenario:
    """Random boundary value family drawn from ``numpy.random.default_rng(seed)``.

    * ``sigma = i V diag(d) V^H`` with ``|d|`` in ``[0.7, 1.5]`` and random signs;
    * ``B`` a trigonometric polynomial in ``t`` with up to three harmonics of
      decaying size, affine in ``s``;
    * boundary generators ``U0 exp(i s H)`` with Haar-random ``U0`` and
      ``|H|`` of order ``pi``.
    """
    rng = np.random.default_rng(seed)
    V = unitary_group.rvs(m, random_state=rng) if m > 1 else np.eye(1)
    d = rng.uniform(0.7, 1.5, size=m) * rng.choice([-1.0, 1.0], size=m)
    sigma = 1j * (V * d) @ V.conj().T
    harmonics = []
    for k in range(1, int(rng.integers(0, 4)) + 1):
        amp = 0.5 / k ** 2
        harmonics.append({
            "k": k,
            "cos": _random_hermitian(rng, m, amp),
            "sin": _random_hermitian(rng, m, amp),
            "s_cos": _random_hermitian(rng, m, amp),
        })
    potential = TrigPotential(_random_hermitian(rng, m, 1.0), _random_hermitian(rng, m, 2.0), harmonics)
    U0 = unitary_group.rvs(m, random_state=rng) if m > 1 else np.exp(2j * np.pi * rng.uniform(size=(1, 1)))
    H = _random_hermitian(rng, m, np.pi)
    system = FirstOrderSystem(sigma, potential)
    boundary = GeneratorBoundary(sigma, U0, H)
    return Scenario(system, boundary, window, s_samples=s_samples, seed=int(seed), sample_hint=sample_hint,
                    label=f"random-{m}-{seed}")
