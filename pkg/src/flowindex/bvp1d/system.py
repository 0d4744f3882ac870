"""First-order systems ``A_s = sigma d/dt + B(s, t)`` on ``[0, 1]``.

Solutions of ``A_s x = mu x`` satisfy ``x' = sigma^{-1} (mu - B) x``; the
transfer matrix ``T`` maps ``x(0)`` to ``x(1)``.  Two integrators are
available:

* :func:`transfer_matrix`, classical fourth-order Runge-Kutta with step
  halving, for single evaluations;
* :func:`transfer_matrices`, a fourth-order Magnus scheme batched over many
  shifts ``mu``.  Each step is an exact matrix exponential, so
  ``T^H sigma T = sigma`` holds to rounding error, and potentials constant
  in ``t`` are integrated exactly in one step.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from ..specflow import NonConvergenceError
from ..sympcore import SubspaceFrame, SymplecticSpace, is_lagrangian
from ..tolerances import TOL, rank_threshold
from .potentials import CallablePotential, Potential

DEFAULT_STEP = 1e-3


class FirstOrderSystem:
    """``sigma d/dt + B(s, t)`` with ``sigma`` constant, skew-adjoint and invertible.

    Parameters
    ----------
    sigma : (m, m) array
    potential : Potential or callable
        Hermitian ``B(s, t)``.  Plain callables ``f(s, t)`` are wrapped.
    smoothness_hint : int, optional
        Initial number of integration steps for the batched integrator.
    """

    def __init__(self, sigma, potential, smoothness_hint: int | None = None):
        sigma = np.atleast_2d(np.asarray(sigma, dtype=complex))
        m = sigma.shape[0]
        if sigma.shape != (m, m):
            raise ValueError("sigma must be square")
        if np.abs(sigma + sigma.conj().T).max() > TOL.num * max(1.0, np.abs(sigma).max()):
            raise ValueError("sigma is not skew-adjoint")
        sv = np.linalg.svd(sigma, compute_uv=False)
        if sv[-1] <= rank_threshold(sv):
            raise ValueError("sigma is singular")
        if not isinstance(potential, Potential):
            potential = CallablePotential(potential, m)
        if potential.m != m:
            raise ValueError(f"potential is {potential.m}x{potential.m}, sigma is {m}x{m}")
        self.m = m
        self.sigma = sigma
        self.sigma_inv = np.linalg.inv(sigma)
        self.potential = potential
        self.smoothness_hint = smoothness_hint

    def B(self, s, t):
        return self.potential(s, t)

    def check_hermitian(self, s_values=(0.0, 0.5, 1.0), t_values=np.linspace(0, 1, 11)):
        for s in s_values:
            vals = np.asarray(self.B(s, np.asarray(t_values)))
            dev = np.abs(vals - np.swapaxes(vals, -1, -2).conj()).max()
            if dev > TOL.num * max(1.0, np.abs(vals).max()):
                raise ValueError(f"B(s={s}, t) is not Hermitian (deviation {dev:.2e})")
        return True


def boundary_symplectic(sigma) -> SymplecticSpace:
    """``C^m + C^m`` with ``omega((x0, x1), (y0, y1)) = <sigma x1, y1> - <sigma x0, y0>``."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=complex))
    m = sigma.shape[0]
    J = sla.block_diag(-sigma, sigma)
    return SymplecticSpace(np.eye(2 * m, dtype=complex), J)


def tree_product(P):
    """Ordered product ``P[..., n-1, :, :] @ ... @ P[..., 0, :, :]`` by pairwise reduction."""
    while P.shape[-3] > 1:
        odd = P.shape[-3] % 2
        last = P[..., -1:, :, :] if odd else None
        if odd:
            P = P[..., :-1, :, :]
        P = P[..., 1::2, :, :] @ P[..., 0::2, :, :]
        if odd:
            P = np.concatenate([P, last], axis=-3)
    return P[..., 0, :, :]


def _expm2(X):
    """Batched exponential of 2x2 matrices in closed form."""
    return _expm2_entries(X[..., 0, 0], X[..., 0, 1], X[..., 1, 0], X[..., 1, 1])


def _expm2_entries(x00, x01, x10, x11):
    """``exp`` of ``[[x00, x01], [x10, x11]]`` entrywise over equal-shape arrays.

    With ``X = tr/2 I + Y`` and ``q^2 = -det Y``:
    ``exp(X) = exp(tr/2) (cosh(q) I + sinh(q)/q Y)``.
    """
    tr = 0.5 * (x00 + x11)
    a = x00 - tr
    b, c = x01, x10
    q2 = a * a + b * c
    q = np.sqrt(q2)
    e = np.exp(q)
    ei = 1.0 / e
    cosh = 0.5 * (e + ei)
    small = np.abs(q) < 1e-3
    with np.errstate(invalid="ignore", divide="ignore"):
        sinhc = np.where(small, 1 + q2 / 6 + q2 * q2 / 120, 0.5 * (e - ei) / q)
    f = np.exp(tr)
    fs = f * sinhc
    out = np.empty(tr.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = f * cosh + fs * a
    out[..., 1, 1] = f * cosh - fs * a
    out[..., 0, 1] = fs * b
    out[..., 1, 0] = fs * c
    return out


def batched_expm(X):
    m = X.shape[-1]
    if m == 1:
        return np.exp(X)
    if m == 2:
        return _expm2(X)
    return sla.expm(X)


def _magnus_factors(system, s, n):
    """Coefficients ``P0, P1`` of the step exponents ``Omega_k(mu) = P0_k + mu P1_k``."""
    h = 1.0 / n
    S = system.sigma_inv
    c = np.sqrt(3.0) / 6
    if system.potential.t_constant:
        M = S @ system.B(s, 0.0)
        P0 = np.broadcast_to(-h * M, (n,) + M.shape)
        P1 = np.broadcast_to(h * S, (n,) + M.shape)
        return P0, P1
    tk = np.arange(n) * h
    M1 = S @ system.B(s, tk + (0.5 - c) * h)
    M2 = S @ system.B(s, tk + (0.5 + c) * h)
    k = np.sqrt(3.0) / 12 * h * h
    P0 = -0.5 * h * (M1 + M2) + k * (M2 @ M1 - M1 @ M2)
    P1 = h * S + k * ((M1 @ S - S @ M1) - (M2 @ S - S @ M2))
    return P0, P1


def _magnus(system, s, mus, n, factors=None):
    P0, P1 = factors if factors is not None else _magnus_factors(system, s, n)
    if P0.shape[-1] == 2:
        mu = mus[:, None]
        steps = _expm2_entries(*(P0[None, :, i, j] + mu * P1[None, :, i, j] for i, j in
                                 ((0, 0), (0, 1), (1, 0), (1, 1))))
        return tree_product(steps)
    Om = P0[None] + mus[:, None, None, None] * P1[None]
    return tree_product(batched_expm(Om))


def magnus_steps(system: FirstOrderSystem, s: float, mu_max: float, tol: float = 1e-10,
                 n0: int | None = None, max_steps: int = 2 ** 14) -> int:
    """Step count for which doubling changes ``T`` by less than ``tol`` on ``|mu| <= mu_max``.

    Probed at ``mu = -mu_max, 0, mu_max``; the oscillation rate, and hence the
    error, is largest at the ends of the range.
    """
    if system.potential.t_constant:
        return 1
    probe = np.array([-mu_max, 0.0, mu_max])
    n = n0 or system.smoothness_hint or 16
    prev = _magnus(system, s, probe, n)
    while True:
        cur = _magnus(system, s, probe, 2 * n)
        err = np.abs(cur - prev).max(axis=(-1, -2)) / np.maximum(1.0, np.abs(cur).max(axis=(-1, -2)))
        if err.max() < tol:
            return 2 * n
        n *= 2
        if n >= max_steps:
            raise NonConvergenceError(
                f"transfer matrix at s={s} did not converge with {n} steps (error {err.max():.2e})"
            )
        prev = cur


def transfer_matrices(system: FirstOrderSystem, s: float, mus, tol: float = 1e-10,
                      n: int | None = None):
    """Transfer matrices for all shifts ``mus`` at once, shape ``(len(mus), m, m)``.

    The step count comes from :func:`magnus_steps` unless ``n`` is given.
    """
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    if n is None:
        n = magnus_steps(system, s, float(np.abs(mus).max()), tol)
    return _magnus(system, s, mus, n)


def _rk4(system, s, mu, n):
    h = 1.0 / n
    tk = np.arange(n) * h
    S = system.sigma_inv
    eye = np.eye(system.m)

    def A(t):
        return S @ (mu * eye - system.B(s, t))

    A1, A2, A3 = A(tk), A(tk + 0.5 * h), A(tk + h)
    k1 = A1
    k2 = A2 @ (eye + 0.5 * h * k1)
    k3 = A2 @ (eye + 0.5 * h * k2)
    k4 = A3 @ (eye + h * k3)
    R = eye + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return tree_product(R)


def transfer_matrix(system: FirstOrderSystem, s: float, mu: float = 0.0,
                    step: float | None = None, tol: float = 1e-10, max_halvings: int = 12):
    """Transfer matrix of ``sigma x' + B(s, .) x = mu x`` by Runge-Kutta 4.

    Starts from ``step`` (default 1e-3) and halves it until two successive
    results agree to ``tol`` relative to ``|T|``.
    """
    n = max(1, int(round(1.0 / (step or DEFAULT_STEP))))
    prev = _rk4(system, s, mu, n)
    for _ in range(max_halvings):
        n *= 2
        cur = _rk4(system, s, mu, n)
        if np.abs(cur - prev).max() < tol * max(1.0, np.abs(cur).max()):
            return cur
        prev = cur
    raise NonConvergenceError(f"step halving did not converge for s={s}, mu={mu}")


def symplectic_defect(system: FirstOrderSystem, T) -> float:
    """``max |T^H sigma T - sigma|``."""
    T = np.asarray(T)
    return float(np.abs(np.swapaxes(T, -1, -2).conj() @ system.sigma @ T - system.sigma).max())


def cauchy_data(system: FirstOrderSystem, s: float, mu: float = 0.0, method: str = "magnus",
                check: bool = True, step: float | None = None) -> SubspaceFrame:
    """Boundary values ``{(v, T v)}`` of all solutions of ``A_s x = mu x``."""
    if method == "magnus":
        T = transfer_matrices(system, s, [mu])[0]
    elif method == "rk4":
        T = transfer_matrix(system, s, mu, step=step)
    else:
        raise ValueError(f"unknown integrator {method!r}")
    frame = SubspaceFrame(np.vstack([np.eye(system.m), T]))
    if check and not is_lagrangian(boundary_symplectic(system.sigma), frame, tol=1e-8):
        raise ValueError(f"Cauchy data at s={s} is not Lagrangian; integrator inaccurate")
    return frame


def ucp_check(system: FirstOrderSystem, s: float) -> bool:
    """True when only the zero solution of ``A_s x = 0`` vanishes at both ends.

    For an ODE a solution with ``x(0) = 0`` vanishes identically, so this
    amounts to invertibility of ``T(0)``.
    """
    T = transfer_matrices(system, s, [0.0])[0]
    sv = np.linalg.svd(T, compute_uv=False)
    return bool(sv[-1] > rank_threshold(sv))


def ucp_certificate(system: FirstOrderSystem, s_values) -> dict:
    """Smallest singular value of ``T(0)`` over ``s_values`` and the overall verdict."""
    s_values = np.asarray(s_values, dtype=float)
    smin, worst = np.inf, None
    for s in s_values:
        sv = np.linalg.svd(transfer_matrices(system, float(s), [0.0])[0], compute_uv=False)
        if sv[-1] < smin:
            smin, worst = float(sv[-1]), float(s)
    return {"holds": bool(smin > TOL.rank_abs), "min_singular_value": smin, "at_s": worst,
            "samples": int(len(s_values))}
