"""Spectral flow and Maslov index of boundary value problem families.

For a scenario ``A_s = sigma d/dt + B(s, .)`` with boundary Lagrangians
``L_s``, the spectral flow of ``s -> A_s`` (eigenvalues in a window
``[-Lambda, Lambda]``) is compared with the Maslov index of the pair
``(L_s, C_s)``, where ``C_s`` is the Cauchy data of ``A_s x = 0``:

    SF{A_s} = -Mas{L_s, C_s}.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..maslov import DegenerateCrossingError, LagrangianPath, SymplecticFamily, maslov_index, maslov_via_crossings
from ..specflow import NonConvergenceError, partition_flow
from ..sympcore import gap_distance
from ..tolerances import TOL, zero_band
from .boundary import BoundaryPath
from .potentials import shifted
from .spectrum import SpectrumSolver, WindowEdgeError, eigenvalue_condition, eigenvalues_in_window
from .system import FirstOrderSystem, boundary_symplectic, cauchy_data, ucp_certificate


@dataclass
class Scenario:
    """A family of boundary value problems together with numerical settings."""

    system: FirstOrderSystem
    boundary: BoundaryPath
    window: float
    s_samples: int = 256
    seed: int | None = None
    label: str = ""
    sample_hint: int = 16
    source: dict | None = field(default=None, repr=False)
    step: float | None = None

    def __post_init__(self):
        if self.window <= 0:
            raise ValueError("window must be positive")
        if self.boundary.m != self.system.m:
            raise ValueError(f"boundary is for m={self.boundary.m}, system has m={self.system.m}")
        self._solver = None

    @property
    def solver(self) -> SpectrumSolver:
        """Eigenvalue solver shared by every computation on this scenario."""
        if self._solver is None:
            self._solver = SpectrumSolver(self.system, self.boundary, self.window)
        return self._solver

    def cauchy(self, s: float):
        """Cauchy data at ``s``; Runge-Kutta with initial step ``step`` when one is set."""
        if self.step is None:
            return cauchy_data(self.system, s, 0.0)
        return cauchy_data(self.system, s, 0.0, method="rk4", step=self.step)

    def cauchy_path(self) -> LagrangianPath:
        return LagrangianPath(self.cauchy)

    def family(self) -> SymplecticFamily:
        return SymplecticFamily.constant(boundary_symplectic(self.system.sigma))


def _band(x):
    return zero_band(max(1.0, float(np.abs(x).max()) if len(x) else 1.0))


def spectral_flow(scenario: Scenario, check_ucp: bool = True):
    """Spectral flow by the partition algorithm on windowed eigenvalues; ``(total, record)``."""
    if check_ucp:
        cert = ucp_certificate(scenario.system, np.linspace(0, 1, 5))
        if not cert["holds"]:
            raise ValueError(f"unique continuation fails: {cert}")
    comp = partition_flow(
        scenario.solver, _band, cap=scenario.window, sample_hint=scenario.sample_hint
    )
    return comp.total, comp


def _distinct_gap(x):
    x = np.sort(np.asarray(x, dtype=float))
    if x.size < 2:
        return np.inf
    d = np.diff(x)
    d = d[d > 1e-9]
    return float(d.min()) if d.size else np.inf


@dataclass
class TrackingRecord:
    grid: list[float]
    total: int
    ambiguous: list[tuple[float, float]] = field(default_factory=list)


def _match_interval(xa, xb, cap, band):
    """Signed crossing count over one interval, or ``None`` if the matching is not trusted."""
    if len(xa) and len(xb):
        cost = np.abs(xa[:, None] - xb[None, :])
        ia, ib = linear_sum_assignment(cost)
    else:
        ia = ib = np.zeros(0, dtype=int)
    change = float(cost[ia, ib].max()) if ia.size else 0.0
    sep = min(_distinct_gap(xa), _distinct_gap(xb))
    if not sep > 3 * change:
        return None
    edge_tol = max(3 * change, 1e-3 * cap) if cap is not None else 0.0
    for x, used in ((xa, ia), (xb, ib)):
        rest = np.setdiff1d(np.arange(len(x)), used)
        if rest.size and (cap is None or np.any(cap - np.abs(x[rest]) > edge_tol)):
            return None
    neg_a = xa[ia] < -band(xa)
    neg_b = xb[ib] < -band(xb)
    return int(np.count_nonzero(neg_a)) - int(np.count_nonzero(neg_b))


def track_flow(spectrum: Callable[[float], np.ndarray], cap: float | None = None,
               n0: int = 64, max_depth: int = 20, band=_band) -> TrackingRecord:
    """Spectral flow by following eigenvalue curves.

    Consecutive spectra are matched by minimal total displacement.  An
    interval is accepted once the largest displacement is below a third of
    the smallest gap between distinct eigenvalues and every unmatched
    eigenvalue sits at the window edge; otherwise it is bisected.  Each
    matched pair contributes ``[a < 0] - [b < 0]`` (zero counts as
    non-negative).
    """
    grid = np.linspace(0.0, 1.0, n0 + 1)
    stack = [(float(grid[i]), float(grid[i + 1]), 0) for i in range(n0)][::-1]
    total, accepted, ambiguous = 0, [0.0], []
    while stack:
        a, b, depth = stack.pop()
        xa, xb = np.asarray(spectrum(a)), np.asarray(spectrum(b))
        term = _match_interval(xa, xb, cap, band)
        if term is None and depth >= max_depth:
            if len(xa) == len(xb):
                # every eigenvalue is matched, so the count does not depend on the matching
                term = int(np.count_nonzero(xa < -band(xa))) - int(np.count_nonzero(xb < -band(xb)))
                ambiguous.append((a, b))
            else:
                raise NonConvergenceError(
                    f"eigenvalue tracking ambiguous on [{a:.6g}, {b:.6g}]", interval=(a, b)
                )
        if term is None:
            m = 0.5 * (a + b)
            stack.append((m, b, depth + 1))
            stack.append((a, m, depth + 1))
            continue
        total += term
        accepted.append(b)
    return TrackingRecord(accepted, total, ambiguous)


def sf_oracle(scenario: Scenario, n0: int | None = None) -> int:
    """Spectral flow of the scenario by eigenvalue tracking.

    The initial grid defaults to ``4 * sample_hint`` intervals, which lands on
    the points already sampled by :func:`spectral_flow`.
    """
    n0 = n0 or 4 * scenario.sample_hint
    return track_flow(scenario.solver, cap=scenario.window, n0=n0).total


def maslov_side(scenario: Scenario):
    """``Mas{L_s, C_s}`` by the unitary reduction; ``(index, record)``."""
    return maslov_index(scenario.boundary, scenario.cauchy_path(), scenario.family(),
                        sample_hint=scenario.sample_hint)


def cauchy_gap_profile(scenario: Scenario, n: int | None = None):
    """Gaps between Cauchy data at consecutive points of a uniform ``s`` grid.

    Returns ``(s_midpoints, increments)``.
    """
    n = n or scenario.s_samples
    ss = np.linspace(0.0, 1.0, n + 1)
    frames = [scenario.cauchy(float(s)) for s in ss]
    inc = np.array([gap_distance(f, g) for f, g in zip(frames[:-1], frames[1:])])
    return 0.5 * (ss[1:] + ss[:-1]), inc


def verify_gsff(scenario: Scenario, crossings: bool = False, timings: bool = False,
                gap_samples: int | None = None):
    """Both sides of ``SF{A_s} = -Mas{L_s, C_s}`` plus supporting data, as a report."""
    from ..harness.report import FlowReport

    clock = {}
    t0 = time.perf_counter()
    sf, comp = spectral_flow(scenario)
    clock["sf_partition"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    oracle = sf_oracle(scenario)
    clock["sf_oracle"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    mas, _ = maslov_side(scenario)
    clock["maslov_partition"] = time.perf_counter() - t0
    mas_cross, records = None, []
    if crossings:
        t0 = time.perf_counter()
        try:
            mas_cross, recs = maslov_via_crossings(scenario.boundary, scenario.cauchy_path(),
                                                   scenario.family(), return_records=True)
            records = [r.to_dict() for r in recs]
        except DegenerateCrossingError as exc:
            records = [{"error": str(exc)}]
        clock["maslov_crossings"] = time.perf_counter() - t0
    else:
        records = [
            {"s_lo": lo, "s_hi": hi, "term": term}
            for lo, hi, term in zip(comp.partition[:-1], comp.partition[1:], comp.segment_terms)
            if term
        ]
    t0 = time.perf_counter()
    _, inc = cauchy_gap_profile(scenario, gap_samples)
    clock["cauchy_profile"] = time.perf_counter() - t0
    return FlowReport(
        label=scenario.label,
        sf_partition=sf,
        sf_oracle=oracle,
        maslov_partition=mas,
        maslov_crossings=mas_cross,
        gsff_lhs=sf,
        gsff_rhs=-mas,
        equal=sf == -mas,
        crossings=records,
        cauchy_gap_profile={"samples": len(inc), "max_increment": float(inc.max()) if inc.size else 0.0},
        timings=clock if timings else None,
        tolerances=TOL.as_dict(),
        seed=scenario.seed,
    )


def _shift_window(system, s0, frame, eps):
    """A window ``Lambda >= 2 eps`` that no eigenvalue ``lambda + a``, ``0 <= a <= eps``, touches."""
    base = max(2.0 * eps, 1.0)
    vals = eigenvalues_in_window(system, s0, frame, (-3.0 * base - eps, 3.0 * base))
    for Lam in base * (1.0 + np.arange(33) / 16.0):
        margin = 1e-3 * Lam
        hit = ((vals > Lam - eps - margin) & (vals < Lam + margin)) | \
              ((vals > -Lam - eps - margin) & (vals < -Lam + margin))
        if not hit.any():
            return float(Lam)
    raise WindowEdgeError(f"no eigenvalue-free window edge found for eps={eps}")


def perturbation_flow(system: FirstOrderSystem, s0: float, boundary_frame, eps: float,
                      window: float | None = None):
    """``(SF{A + a : a in [0, eps]}, sum_{a in (0, eps]} dim ker(A + a))``.

    The left side runs the partition algorithm on the shifted problems
    ``sigma d/dt + B + a``; the right side collects the eigenvalues of
    ``A`` in ``[-eps, 0)``, i.e. the shifts ``a`` at which ``A + a`` has a
    kernel.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    Lam = window or _shift_window(system, s0, boundary_frame, eps)

    def spectrum(u):
        shifted_sys = FirstOrderSystem(system.sigma, shifted(system.potential, u * eps),
                                       system.smoothness_hint)
        return eigenvalues_in_window(shifted_sys, s0, boundary_frame, Lam)

    comp = partition_flow(spectrum, _band, cap=Lam, sample_hint=4)
    vals = eigenvalues_in_window(system, s0, boundary_frame, (-1.5 * eps, 0.5 * eps))
    if np.any(np.abs(vals + eps) < 1e-8 * max(1.0, eps)):
        raise WindowEdgeError("-eps is an eigenvalue; choose another eps")
    band = _band(vals) if vals.size else 0.0
    kernels = vals[(vals >= -eps) & (vals < -band)]
    for x in kernels:
        if eigenvalue_condition(system, s0, boundary_frame, float(x)) > 1e-6:
            raise NonConvergenceError(f"root {x} does not satisfy the shooting condition")
    return comp.total, int(kernels.size)
