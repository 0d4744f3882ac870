"""Eigenvalues of ``A_s`` with a Lagrangian boundary condition, by shooting.

``mu`` is an eigenvalue iff the Cauchy data ``C(mu) = graph T(mu)`` meets the
boundary Lagrangian ``L``.  With generators ``U(mu)`` of ``C(mu)`` and ``V``
of ``L``, that happens iff ``W(mu) = U(mu) V^{-1}`` has eigenvalue 1, and the
multiplicity is the dimension of the intersection.

The eigenvalue arguments of ``W(mu)`` move monotonically in ``mu``.  So the
integer

    count(mu) = (Phi(mu) - sum_j psi_j(mu)) / 2 pi,

with ``Phi`` a continuous argument of ``det W`` and ``psi_j in [0, 2 pi)`` the
eigenvalue arguments, jumps by the multiplicity at each eigenvalue and is
constant elsewhere.  Roots are bracketed with it and polished by Illinois
iteration on the real function ``prod_j sin(phi_j / 2)``, which is
``det(W - I) / ((2i)^m exp(i Phi / 2))``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from ..specflow import NonConvergenceError, WindowCollisionError
from ..sympcore import SubspaceFrame, lagrangian_to_unitary
from .system import FirstOrderSystem, _magnus, _magnus_factors, boundary_symplectic, magnus_steps, transfer_matrices

SCAN_TOL = 1e-8
ROOT_TOL = 1e-10
CLUSTER = 1e-9
TWO_PI = 2 * np.pi


class WindowEdgeError(WindowCollisionError):
    """An eigenvalue sits on the edge of the search window; widen the window."""


def eigenvalue_condition(system: FirstOrderSystem, s: float, boundary_frame: SubspaceFrame,
                         lam: float) -> float:
    """Smallest singular value of ``[L | C(lam)]`` with orthonormal frames; zero at eigenvalues."""
    T = transfer_matrices(system, s, [lam], tol=1e-10)[0]
    qc, _ = np.linalg.qr(np.vstack([np.eye(system.m), T]))
    qb, _ = np.linalg.qr(boundary_frame.frame)
    return float(np.linalg.svd(np.hstack([qb, qc]), compute_uv=False)[-1])


class _PhaseMap:
    """``mu -> W(mu)`` at fixed ``s``, batched over ``mu``."""

    def __init__(self, system, s, frame, mu_max, tol=SCAN_TOL):
        space = boundary_symplectic(system.sigma)
        self.m = system.m
        self.system, self.s = system, s
        self.split_inv = np.linalg.inv(np.hstack([space.basis_plus, space.basis_minus]))
        V = lagrangian_to_unitary(space, frame, tol=1e-8).U
        self.V_inv = np.linalg.inv(V)
        self.n = magnus_steps(system, s, mu_max, tol)
        self.factors = _magnus_factors(system, s, self.n)

    def __call__(self, mus):
        mus = np.atleast_1d(np.asarray(mus, dtype=float))
        T = _magnus(self.system, self.s, mus, self.n, self.factors)
        m = self.m
        coeff = self.split_inv[:, :m] + self.split_inv[:, m:] @ T
        a, b = coeff[:, :m], coeff[:, m:]
        W = b @ np.linalg.inv(a) @ self.V_inv
        ev = np.linalg.eigvals(W) if m > 1 else W[:, :, 0]
        return ev, np.prod(ev, axis=-1)


def _count(ev, phi):
    psi = np.mod(np.angle(ev), TWO_PI)
    return np.rint((phi - psi.sum(axis=-1)) / TWO_PI).astype(int)


def _real_char(ev, phi):
    m = ev.shape[-1]
    val = np.prod(ev - 1.0, axis=-1) / ((2j) ** m * np.exp(0.5j * phi))
    return val.real


def _lift(phi_ref, det_ref, det):
    return phi_ref + np.angle(det / det_ref)


def _scan(pm, lo, hi, step, max_points=200000):
    mus = np.linspace(lo, hi, max(2, int(np.ceil((hi - lo) / step))) + 1)
    ev, det = pm(mus)
    while True:
        d = np.angle(det[1:] / det[:-1])
        bad = np.nonzero(np.abs(d) > np.pi / 2)[0]
        if bad.size == 0:
            break
        if len(mus) > max_points:
            raise NonConvergenceError("argument of det W changes too fast; window too large")
        mids = 0.5 * (mus[bad] + mus[bad + 1])
        ev_m, det_m = pm(mids)
        mus = np.insert(mus, bad + 1, mids)
        ev = np.insert(ev, bad + 1, ev_m, axis=0)
        det = np.insert(det, bad + 1, det_m)
    phi = np.concatenate([[np.angle(det[0])], np.angle(det[0]) + np.cumsum(np.angle(det[1:] / det[:-1]))])
    return mus, ev, det, phi


def _isolate(pm, brackets):
    """Split brackets until each holds one root or is narrower than the cluster width.

    A bracket is ``(a, b, det_a, phi_a, roots, count_a, direction)``.
    """
    done = []
    while brackets:
        split = []
        for br in brackets:
            (done if br[4] == 1 or br[1] - br[0] < CLUSTER else split).append(br)
        if not split:
            break
        mids = np.array([0.5 * (br[0] + br[1]) for br in split])
        ev, det = pm(mids)
        brackets = []
        for (a, b, det_a, phi_a, cnt, c_a, dirn), mid, e, d in zip(split, mids, ev, det):
            phi_m = _lift(phi_a, det_a, d)
            c_m = int(_count(e[None], np.array([phi_m]))[0])
            left = dirn * (c_m - c_a)
            if left < 0 or left > cnt:
                raise NonConvergenceError("inconsistent eigenvalue count while bisecting")
            if left:
                brackets.append((a, mid, det_a, phi_a, left, c_a, dirn))
            if cnt - left:
                brackets.append((mid, b, d, phi_m, cnt - left, c_m, dirn))
    return done


def _polish(pm, brackets):
    """Illinois iteration on the real characteristic function, all brackets at once."""
    k = len(brackets)
    a = np.array([br[0] for br in brackets])
    b = np.array([br[1] for br in brackets])
    det_ref = np.array([br[2] for br in brackets])
    phi_ref = np.array([br[3] for br in brackets])
    ev_a, det_a = pm(a)
    ev_b, det_b = pm(b)
    Ra = _real_char(ev_a, _lift(phi_ref, det_ref, det_a))
    Rb = _real_char(ev_b, _lift(phi_ref, det_ref, det_b))
    root = 0.5 * (a + b)
    active = np.ones(k, bool)
    exact_a = Ra == 0
    exact_b = Rb == 0
    root[exact_a] = a[exact_a]
    root[exact_b] = b[exact_b]
    active &= ~(exact_a | exact_b)
    same = active & (np.sign(Ra) == np.sign(Rb))
    if same.any():
        # no sign change: bracket end sits on the root to rounding; take the smaller |R|
        root[same] = np.where(np.abs(Ra[same]) < np.abs(Rb[same]), a[same], b[same])
        active &= ~same
    for _ in range(200):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        denom = Rb[idx] - Ra[idx]
        c = b[idx] - Rb[idx] * (b[idx] - a[idx]) / denom
        lo, hi = np.minimum(a[idx], b[idx]), np.maximum(a[idx], b[idx])
        outside = ~np.isfinite(c) | (c <= lo) | (c >= hi)
        c = np.where(outside, 0.5 * (a[idx] + b[idx]), c)
        ev_c, det_c = pm(c)
        Rc = _real_char(ev_c, _lift(phi_ref[idx], det_ref[idx], det_c))
        flip = np.sign(Rc) != np.sign(Rb[idx])
        new_a = np.where(flip, b[idx], a[idx])
        new_Ra = np.where(flip, Rb[idx], 0.5 * Ra[idx])
        a[idx], Ra[idx] = new_a, new_Ra
        b[idx], Rb[idx] = c, Rc
        width = np.abs(b[idx] - a[idx])
        fin = (width < ROOT_TOL) | (Rc == 0)
        root[idx[fin]] = c[fin]
        active[idx[fin]] = False
    else:
        raise NonConvergenceError("root polishing did not converge")
    return root


def _roots(pm, lo, hi, step):
    """Roots of the phase map in ``[lo, hi]`` as ``(values, multiplicities)``."""
    mus, ev, det, phi = _scan(pm, lo, hi, step)
    scale = max(abs(lo), abs(hi), 1.0)
    for end in (0, -1):
        if np.abs(np.angle(ev[end])).min() < 1e-9 * scale:
            raise WindowEdgeError(f"eigenvalue at the window edge {mus[end]:.10g} (s={pm.s})")
    C = _count(ev, phi)
    direction = 1 if phi[-1] >= phi[0] else -1
    steps = direction * np.diff(C)
    if np.any(steps < 0):
        raise NonConvergenceError(f"eigenvalue arguments not monotone at s={pm.s}")
    brackets = [
        (mus[i], mus[i + 1], det[i], phi[i], int(steps[i]), int(C[i]), direction)
        for i in np.nonzero(steps)[0]
    ]
    return _solve_brackets(pm, brackets)


def _solve_brackets(pm, brackets):
    isolated = _isolate(pm, brackets)
    singles = [br for br in isolated if br[4] == 1]
    vals = list(_polish(pm, singles)) if singles else []
    mults = [1] * len(vals)
    for br in isolated:
        if br[4] > 1:
            vals.append(0.5 * (br[0] + br[1]))
            mults.append(br[4])
    order = np.argsort(vals)
    return np.asarray(vals, dtype=float)[order], np.asarray(mults, dtype=int)[order]


def _bracket_at(pm, a, b):
    """Bracket ``(a, b, ...)`` on ``pm`` with its root count, for a short interval."""
    ev, det = pm(np.array([a, b]))
    phi_a = float(np.angle(det[0]))
    phi_b = _lift(phi_a, det[0], det[1])
    ca, cb = _count(ev, np.array([phi_a, phi_b]))
    direction = 1 if phi_b >= phi_a else -1
    return (a, b, det[0], phi_a, int(direction * (cb - ca)), int(ca), direction)


def _refine(pm, roots, mults, lo, hi):
    """Re-locate approximate roots on a more accurate phase map."""
    out_v, out_m = [], []
    for i, (r, k) in enumerate(zip(roots, mults)):
        left = roots[i - 1] if i > 0 else lo
        right = roots[i + 1] if i + 1 < len(roots) else hi
        cap = 0.45 * min(r - left, right - r)
        delta = 1e-4 * max(1.0, abs(r))
        for _ in range(6):
            d = min(delta, cap)
            br = _bracket_at(pm, r - d, r + d)
            if br[4] == k:
                break
            if d == cap:
                raise NonConvergenceError(f"could not re-bracket eigenvalue near {r:.10g} (s={pm.s})")
            delta *= 8
        else:
            raise NonConvergenceError(f"could not re-bracket eigenvalue near {r:.10g} (s={pm.s})")
        v, m = _solve_brackets(pm, [br])
        out_v.extend(v)
        out_m.extend(m)
    return np.asarray(out_v, dtype=float), np.asarray(out_m, dtype=int)


def eigenvalues_in_window(system: FirstOrderSystem, s: float, boundary_frame: SubspaceFrame,
                          Lambda, tol: float = SCAN_TOL, grid_frac: float = 1e-2,
                          coarse_tol: float = 1e-5):
    """Eigenvalues in ``[-Lambda, Lambda]`` (or in ``[lo, hi]`` when a pair is given).

    Returns a sorted array in which each eigenvalue is repeated by its
    multiplicity.  The scan runs on a transfer-matrix approximation accurate
    to ``coarse_tol``; roots are then re-bracketed and polished with one
    accurate to ``tol``.  Raises :class:`WindowEdgeError` for an eigenvalue
    within ``1e-9`` of the window edge.
    """
    if np.isscalar(Lambda):
        if Lambda <= 0:
            raise ValueError("window half-width must be positive")
        lo, hi = -float(Lambda), float(Lambda)
    else:
        lo, hi = (float(v) for v in Lambda)
        if not hi > lo:
            raise ValueError("empty window")
    scale = max(abs(lo), abs(hi))
    coarse = _PhaseMap(system, s, boundary_frame, scale, max(tol, coarse_tol))
    roots, mults = _roots(coarse, lo, hi, grid_frac * scale)
    if roots.size:
        fine = _PhaseMap(system, s, boundary_frame, scale, tol)
        if fine.n != coarse.n:
            edge = 1e-6 * max(1.0, scale)
            if roots[0] - lo < edge or hi - roots[-1] < edge:
                raise WindowEdgeError(f"eigenvalue near the window edge at s={s}")
            roots, mults = _refine(fine, roots, mults, lo, hi)
    if roots.size and (roots[0] - lo < 1e-9 or hi - roots[-1] < 1e-9):
        raise WindowEdgeError(f"eigenvalue within 1e-9 of the window edge at s={s}")
    return np.repeat(roots, mults)


def intersection_multiplicity(pm: _PhaseMap, mu: float, band: float = 1e-6) -> int:
    """Number of eigenvalues of ``W(mu)`` within ``band`` of 1 (argument)."""
    ev, _ = pm([mu])
    return int(np.count_nonzero(np.abs(np.angle(ev[0])) < band))


class SpectrumSolver:
    """Windowed eigenvalues of one scenario, cached by ``s``."""

    def __init__(self, system: FirstOrderSystem, boundary, Lambda: float, tol: float = SCAN_TOL):
        self.system, self.boundary, self.Lambda, self.tol = system, boundary, float(Lambda), tol
        self._cache: dict[float, np.ndarray] = {}

    def __call__(self, s: float) -> np.ndarray:
        key = float(s)
        if key not in self._cache:
            self._cache[key] = eigenvalues_in_window(
                self.system, key, self.boundary(key), self.Lambda, self.tol
            )
        return self._cache[key]

    @property
    def evaluations(self) -> int:
        return len(self._cache)


def phase_eigenvalues(theta: float, integral_b: float, kappa: float, Lambda: float):
    """Closed-form eigenvalues for ``m = 1``, ``sigma = i kappa``, ``x(1) = e^{i theta} x(0)``.

    ``lambda_k = int_0^1 b dt - kappa (theta + 2 pi k)``, restricted to ``[-Lambda, Lambda]``.
    """
    c = integral_b - kappa * theta
    step = -kappa * TWO_PI
    kmax = int(np.ceil((Lambda + abs(c)) / abs(step))) + 1
    vals = c + step * np.arange(-kmax, kmax + 1)
    return np.sort(vals[np.abs(vals) <= Lambda])


def fd_eigenvalues(b1, b2, Lambda: float, N: int = 2000, richardson: bool = True):
    """Staggered-grid eigenvalues for ``sigma = [[0, -1], [1, 0]]``, ``B = diag(b1, b2)``.

    Boundary condition: first component zero at both ends.  ``u`` lives on
    the interior nodes and ``v`` on the half nodes; interleaving them makes
    the discrete operator a symmetric tridiagonal matrix.  With
    ``richardson`` the second-order results for ``N`` and ``2N`` are
    combined.
    """
    def solve(n):
        h = 1.0 / n
        half = (np.arange(n) + 0.5) * h
        nodes = np.arange(1, n) * h
        diag = np.empty(2 * n - 1)
        diag[0::2] = b2(half)
        diag[1::2] = b1(nodes)
        off = np.empty(2 * n - 2)
        off[0::2] = 1.0 / h
        off[1::2] = -1.0 / h
        pad = 1.0 + 0.1 * Lambda
        return sla.eigh_tridiagonal(diag, off, eigvals_only=True, select="v",
                                    select_range=(-Lambda - pad, Lambda + pad))

    coarse = solve(N)
    if not richardson:
        return coarse[np.abs(coarse) <= Lambda]
    fine = solve(2 * N)
    nearest = coarse[np.abs(fine[:, None] - coarse[None, :]).argmin(axis=1)]
    ext = (4 * fine - nearest) / 3
    return ext[np.abs(ext) <= Lambda]
