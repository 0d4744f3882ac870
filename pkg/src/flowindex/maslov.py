"""Maslov index of a pair of Lagrangian paths.

Three independent routes are provided:

* :func:`maslov_index` reduces the pair to the unitary path ``U_s V_s^{-1}``
  (``U_s``, ``V_s`` the generators of the two Lagrangians) and returns minus
  its spectral flow through 1;
* :func:`maslov_via_crossings` sums signatures of crossing forms;
* :func:`winding_oracle` counts the winding of ``det(U_s^{-1} V_0)`` for a
  loop against a fixed Lagrangian.

All of them accept an ``s``-dependent inner product and symplectic form
through :class:`SymplecticFamily`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .specflow import (
    UNITARY,
    NonConvergenceError,
    OperatorPath,
    locate_zeros,
    richardson_derivative,
    sf_partition,
)
from .sympcore import (
    SubspaceFrame,
    SymplecticSpace,
    intersection,
    lagrangian_to_unitary,
    orthonormal_frame,
    same_span,
    unitary_to_lagrangian,
)
from .tolerances import zero_band

__all__ = [
    "SymplecticFamily",
    "LagrangianPath",
    "CrossingRecordMas",
    "DegenerateCrossingError",
    "maslov_index",
    "crossing_form_Q",
    "crossing_form_Gamma",
    "maslov_via_crossings",
    "winding_oracle",
    "generator_path",
    "GeodesicLagrangianPath",
    "unitary_power",
]


class DegenerateCrossingError(ValueError):
    """A crossing whose form is singular; the partition method still applies."""


@dataclass(frozen=True, eq=False)
class SymplecticFamily:
    """Inner products ``gram_of(s)`` and symplectic operators ``J_of(s)`` on ``C^dim``."""

    dim: int
    gram_of: Callable[[float], np.ndarray]
    J_of: Callable[[float], np.ndarray]
    _fixed: SymplecticSpace | None = None

    @classmethod
    def constant(cls, space: SymplecticSpace) -> "SymplecticFamily":
        return cls(space.dim, lambda s: space.gram, lambda s: space.J, space)

    @classmethod
    def from_form(cls, omega: np.ndarray, gram_of: Callable[[float], np.ndarray]):
        """Family with a fixed form ``omega(x, y) = y^H Omega x`` and varying inner product."""
        omega = np.asarray(omega, dtype=complex)
        return cls(omega.shape[0], gram_of, lambda s: np.linalg.solve(gram_of(s), omega))

    def space(self, s: float) -> SymplecticSpace:
        if self._fixed is not None:
            return self._fixed
        return SymplecticSpace(self.gram_of(float(s)), self.J_of(float(s)))


@dataclass(eq=False)
class LagrangianPath:
    """A path ``s -> eval(s)`` of Lagrangian frames."""

    eval: Callable[[float], SubspaceFrame]

    def __call__(self, s) -> SubspaceFrame:
        out = self.eval(float(s))
        return out if isinstance(out, SubspaceFrame) else SubspaceFrame(out)

    @classmethod
    def constant(cls, frame) -> "LagrangianPath":
        sub = frame if isinstance(frame, SubspaceFrame) else SubspaceFrame(frame)
        return cls(lambda s: sub)


class GeodesicLagrangianPath(LagrangianPath):
    """Lagrangians sampled at knots ``s``, joined by geodesics of their generators.

    Between knots ``U(s) = U_k (U_k^{-1} U_{k+1})^tau`` along the principal
    branch, in the splitting bases of the fixed ``space``.
    """

    def __init__(self, space: SymplecticSpace, s, frames):
        self.space = space
        self.s = np.asarray(s, dtype=float)
        if self.s.ndim != 1 or len(self.s) < 1 or np.any(np.diff(self.s) <= 0):
            raise ValueError("knots must be increasing")
        self.frames = [f if isinstance(f, SubspaceFrame) else SubspaceFrame(f) for f in frames]
        if len(self.frames) != len(self.s):
            raise ValueError("need one frame per knot")
        self._U = [lagrangian_to_unitary(space, f, tol=1e-8).U for f in self.frames]
        self._steps = [np.linalg.solve(a, b) for a, b in zip(self._U[:-1], self._U[1:])]
        super().__init__(lambda s: unitary_to_lagrangian(self.space, self.generator(s)))

    def generator(self, s):
        if len(self.s) == 1 or s <= self.s[0]:
            return self._U[0]
        if s >= self.s[-1]:
            return self._U[-1]
        k = int(np.searchsorted(self.s, s, side="right") - 1)
        tau = (s - self.s[k]) / (self.s[k + 1] - self.s[k])
        return self._U[k] @ unitary_power(self._steps[k], tau)


def unitary_power(M, tau):
    """``M^tau`` along the principal branch, for unitary ``M``."""
    T, Z = sla.schur(np.asarray(M, dtype=complex), output="complex")
    ang = np.angle(np.diag(T))
    return Z @ np.diag(np.exp(1j * tau * ang)) @ Z.conj().T


def generator_path(lam: LagrangianPath, family: SymplecticFamily, check=True):
    """``s -> U_s`` in the normalised splitting bases of ``family.space(s)``."""
    return lambda s: lagrangian_to_unitary(family.space(s), lam(s), check=check).U


def _ratio(lam, mu, family, check=True):
    def W(s):
        space = family.space(s)
        U = lagrangian_to_unitary(space, lam(s), check=check).U
        V = lagrangian_to_unitary(space, mu(s), check=check).U
        return U @ np.linalg.inv(V)
    return W


def maslov_index(lam: LagrangianPath, mu: LagrangianPath, family: SymplecticFamily,
                 sample_hint: int = 64):
    """``Mas{lam_s, mu_s} = -SF{U_s V_s^{-1}}`` through 1, co-oriented upwards.

    Returns ``(index, computation)`` where ``computation.total`` is the
    spectral flow of the unitary path (so ``index == -computation.total``).
    """
    path = OperatorPath(family.dim // 2, UNITARY, _ratio(lam, mu, family), sample_hint=sample_hint)
    sf, comp = sf_partition(path)
    return -sf, comp


def _default_complement(space, sub):
    """``graph(-U)``, transversal to the Lagrangian ``graph(U)``."""
    U = lagrangian_to_unitary(space, sub, check=False).U
    return unitary_to_lagrangian(space, -U)


def _q_matrix(lam, t, X, W, family, h):
    """``[Q(X_i, X_j)]_{ji}`` for vectors ``X`` in ``lam(t)`` and complement ``W``."""
    Wf = W.frame if isinstance(W, SubspaceFrame) else np.asarray(W, dtype=complex)

    def coeffs(s):
        F = lam(s).frame
        M = np.hstack([F, -Wf])
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > 1e10:
            raise ValueError(f"complement is not transversal to the path at s={s}")
        sol = np.linalg.solve(M, X)
        return sol[F.shape[1]:]

    D, mismatch = richardson_derivative(coeffs, t, h)
    if mismatch > 1e-4:
        raise ValueError(f"path does not look differentiable at t={t} (mismatch {mismatch:.2e})")
    space = family.space(t)
    dw = Wf @ D
    return dw.conj().T @ space.gram @ space.J @ X


def _hermitian_part(Q, what):
    dev = np.abs(Q - Q.conj().T).max() if Q.size else 0.0
    if dev > 1e-5 * max(1.0, float(np.abs(Q).max())):
        raise ValueError(f"{what} is not Hermitian (deviation {dev:.2e})")
    return 0.5 * (Q + Q.conj().T)


def crossing_form_Q(lam: LagrangianPath, t: float, W: SubspaceFrame | None,
                    family: SymplecticFamily, basis=None, h: float = 1e-5,
                    validate: bool = False):
    """Crossing form of ``lam`` at ``t`` as a Hermitian matrix.

    ``Q(u, v) = d/ds omega(u, w_v(s))`` where ``v + w_v(s)`` lies in
    ``lam(s)`` and ``w_v(s)`` in the complement ``W``.  With ``u = X a``,
    ``v = X b`` for the basis ``X`` (default: orthonormal frame of
    ``lam(t)``), ``Q(u, v) = b^H Qmat a``.

    ``validate=True`` recomputes the form with a second complement and
    raises if the two differ by more than 1e-6.
    """
    space = family.space(t)
    sub = lam(t)
    X = orthonormal_frame(sub, space.gram) if basis is None else np.asarray(basis, dtype=complex)
    if W is None:
        W = _default_complement(space, sub)
    Q = _hermitian_part(_q_matrix(lam, t, X, W, family, h), "crossing form")
    if validate:
        U = lagrangian_to_unitary(space, sub, check=False).U
        k = U.shape[0]
        phases = np.exp(1j * np.linspace(0.7, 2.3, k))
        W2 = unitary_to_lagrangian(space, U @ np.diag(phases))
        Q2 = _hermitian_part(_q_matrix(lam, t, X, W2, family, h), "crossing form")
        if np.abs(Q - Q2).max() > 1e-6 * max(1.0, float(np.abs(Q).max())):
            raise ValueError("crossing form depends on the complement; path not differentiable?")
    return Q


def _crossing_vectors(lam, mu, family, t, cluster=1e-6):
    """Basis of ``lam(t) ∩ mu(t)`` from eigenvectors of ``U V^{-1}`` at eigenvalue 1."""
    space = family.space(t)
    U = lagrangian_to_unitary(space, lam(t), check=False).U
    V = lagrangian_to_unitary(space, mu(t), check=False).U
    W = U @ np.linalg.inv(V)
    w, y = np.linalg.eig(W)
    near = np.abs(np.angle(w)) < cluster
    if not near.any():
        return np.zeros((space.dim, 0), dtype=complex)
    Y, _ = np.linalg.qr(y[:, near])
    A = np.linalg.solve(V, Y)
    X = space.basis_plus @ A + space.basis_minus @ Y
    return orthonormal_frame(SubspaceFrame(X), space.gram)


def crossing_form_Gamma(lam: LagrangianPath, mu: LagrangianPath, t: float,
                        family: SymplecticFamily, h: float = 1e-5, basis=None):
    """``Q(lam, t) - Q(mu, t)`` restricted to ``lam(t) ∩ mu(t)``; returns ``(Gamma, basis)``."""
    space = family.space(t)
    if basis is None:
        basis = _crossing_vectors(lam, mu, family, t)
        if basis.shape[1] == 0:
            cap = intersection(lam(t), mu(t))
            basis = orthonormal_frame(cap, space.gram) if cap.dim else basis
    if basis.shape[1] == 0:
        raise ValueError(f"t={t} is not a crossing")
    Ql = _q_matrix(lam, t, basis, _default_complement(space, lam(t)), family, h)
    Qm = _q_matrix(mu, t, basis, _default_complement(space, mu(t)), family, h)
    return _hermitian_part(Ql - Qm, "crossing form"), basis


@dataclass
class CrossingRecordMas:
    t: float
    intersection_frame: np.ndarray
    Q_lambda: np.ndarray
    Q_mu: np.ndarray
    Gamma: np.ndarray
    signature: tuple[int, int, int]
    contribution: int

    def to_dict(self):
        def cplx(a):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(a)]
        return {
            "t": self.t,
            "intersection_frame": cplx(self.intersection_frame),
            "Q_lambda": cplx(self.Q_lambda),
            "Q_mu": cplx(self.Q_mu),
            "Gamma": cplx(self.Gamma),
            "signature": list(self.signature),
            "contribution": self.contribution,
        }


def maslov_via_crossings(lam: LagrangianPath, mu: LagrangianPath, family: SymplecticFamily,
                         grid: int = 512, h: float = 1e-5, return_records: bool = False):
    """Maslov index as ``m^+(Gamma(0)) - m^-(Gamma(1)) + sum sign Gamma(t)``.

    Crossings are the zeros of the smallest eigenvalue argument of
    ``U_s V_s^{-1}``, located on a uniform grid and refined to 1e-10.
    """
    W = _ratio(lam, mu, family, check=False)

    def signed(s):
        ang = np.angle(np.linalg.eigvals(W(s)))
        return float(ang[np.argmin(np.abs(ang))])

    def dist(s):
        return abs(signed(s))

    ss = np.linspace(0.0, 1.0, grid + 1)
    tol = 1e-7
    points, plateaus = locate_zeros(dist, ss, tol, xatol=1e-12)
    # sign changes catch zeros too close together to show up as separate grid minima
    g = np.array([signed(s) for s in ss])
    for i in np.nonzero(g[:-1] * g[1:] < 0)[0]:
        t = brentq(signed, ss[i], ss[i + 1], xtol=1e-14)
        if dist(t) < tol and not any(abs(t - p) < 1e-8 for p in points):
            points.append(t)
    points.sort()
    if plateaus:
        lo, hi = plateaus[0]
        raise DegenerateCrossingError(
            f"Lagrangians intersect on the whole interval [{lo:.6g}, {hi:.6g}]; "
            "use maslov_index (partition method) instead"
        )
    records, total = [], 0
    for t in points:
        space = family.space(t)
        X = _crossing_vectors(lam, mu, family, t)
        if X.shape[1] == 0:
            continue
        Ql = _hermitian_part(_q_matrix(lam, t, X, _default_complement(space, lam(t)), family, h), "Q")
        Qm = _hermitian_part(_q_matrix(mu, t, X, _default_complement(space, mu(t)), family, h), "Q")
        G = 0.5 * ((Ql - Qm) + (Ql - Qm).conj().T)
        gw = np.linalg.eigvalsh(G)
        scale = max(1.0, float(np.abs(gw).max()))
        if np.abs(gw).min() <= 1e2 * zero_band(scale) + 1e-6 * scale:
            raise DegenerateCrossingError(
                f"crossing at t={t:.10g} is not regular (form eigenvalues {gw}); "
                "use maslov_index (partition method) instead"
            )
        mp, mm = int(np.count_nonzero(gw > 0)), int(np.count_nonzero(gw < 0))
        if t == 0.0:
            c = mp
        elif t == 1.0:
            c = -mm
        else:
            c = mp - mm
        total += c
        records.append(CrossingRecordMas(t, X, Ql, Qm, G, (mp, 0, mm), c))
    return (total, records) if return_records else total


def winding_oracle(lam: LagrangianPath, mu, space: SymplecticSpace | SymplecticFamily,
                   start: int = 64, max_points: int = 2 ** 16, return_trace: bool = False):
    """Winding number of ``s -> det(U_s^{-1} V)`` for a loop ``lam`` and fixed ``mu``.

    The accumulated argument is computed on grids doubled until two
    successive totals agree to 1e-6.  ``return_trace`` adds rows
    ``(s, re, im, accumulated_arg)`` from the finest grid.
    """
    if isinstance(space, SymplecticFamily):
        space = space.space(0.0)
    mu_frame = mu(0.0) if callable(mu) else mu
    if not same_span(lam(0.0), lam(1.0), space.gram, tol=1e-8):
        raise ValueError("winding oracle needs a loop: lam(0) and lam(1) differ")
    V = lagrangian_to_unitary(space, mu_frame).U
    cache = {}

    def det_at(s):
        if s not in cache:
            U = lagrangian_to_unitary(space, lam(s), check=False).U
            d = np.linalg.det(np.linalg.solve(U, V))
            cache[s] = d / abs(d)
        return cache[s]

    prev_total, n = None, start
    while True:
        ss = np.linspace(0.0, 1.0, n + 1)
        d = np.array([det_at(float(s)) for s in ss])
        steps = np.angle(d[1:] / d[:-1])
        total = float(steps.sum())
        if prev_total is not None and abs(total - prev_total) < 1e-6 and np.abs(steps).max() < np.pi / 2:
            break
        if n >= max_points:
            raise NonConvergenceError("winding number did not stabilise")
        prev_total, n = total, 2 * n
    wind = total / (2 * np.pi)
    k = int(round(wind))
    if abs(wind - k) > 1e-6:
        raise NonConvergenceError(f"accumulated argument {total} is not a multiple of 2 pi")
    if not return_trace:
        return k
    acc = np.concatenate([[0.0], np.cumsum(steps)])
    trace = np.column_stack([ss, d.real, d.imag, acc])
    return k, trace
