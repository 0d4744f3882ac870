"""Finite-dimensional complex symplectic linear algebra.

Subspaces are carried as column frames.  Every inner product, adjoint and
orthogonal projection is taken with respect to an explicit Gram matrix, so
the same routines work for a whole family of inner products.

Sign conventions (see ``docs/conventions.md``):

* ``omega(x, y) = <J x, y> = y^H G J x``, linear in ``x``.
* ``H^+`` is the *negative* spectral subspace of ``sqrt(-1) J`` and ``H^-``
  the positive one.  Bases are normalised so that ``omega`` restricts to
  ``+i I`` on ``H^+`` and ``-i I`` on ``H^-``.  In those coordinates a
  Lagrangian is the graph of a unitary matrix ``U: H^+ -> H^-``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.linalg as sla

from .tolerances import TOL, numerical_rank, rank_threshold

__all__ = [
    "SymplecticSpace",
    "SubspaceFrame",
    "UnitaryGenerator",
    "annihilator",
    "classify",
    "is_lagrangian",
    "fredholm_index",
    "lagrangian_to_unitary",
    "unitary_to_lagrangian",
    "intersection",
    "intersection_dim",
    "subspace_sum",
    "gap_distance",
    "quotient_gap",
    "orthonormal_frame",
    "projector",
    "same_span",
    "contains",
]

Isotropy = Literal["isotropic", "coisotropic", "lagrangian", "none"]


def _as_complex(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SubspaceFrame:
    """A subspace of ``C^n`` spanned by the columns of ``frame``.

    A frame with zero columns is the zero subspace.
    """

    frame: np.ndarray

    def __post_init__(self):
        f = np.array(self.frame, dtype=complex)
        if f.ndim == 1:
            f = f[:, None]
        if f.ndim != 2:
            raise ValueError(f"frame must be a matrix, got shape {f.shape}")
        if f.shape[1] > 0:
            s = np.linalg.svd(f, compute_uv=False)
            if s[-1] <= rank_threshold(s):
                raise ValueError(
                    f"frame is rank deficient (smallest singular value {s[-1]:.3g})"
                )
        f.setflags(write=False)
        object.__setattr__(self, "frame", f)

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @classmethod
    def zero(cls, n: int) -> "SubspaceFrame":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "SubspaceFrame":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def span(cls, *vectors) -> "SubspaceFrame":
        """Frame from column vectors; dependent vectors are dropped."""
        mat = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
        return cls(_column_basis(mat))

    def __repr__(self):
        return f"SubspaceFrame(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _column_basis(mat: np.ndarray) -> np.ndarray:
    """Orthonormal (Euclidean) basis of the column span of ``mat``."""
    if mat.shape[1] == 0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    r = int(np.count_nonzero(s > rank_threshold(s)))
    return u[:, :r]


def _null_space(mat: np.ndarray, ncols: int) -> np.ndarray:
    """Orthonormal basis of ``{x : mat @ x = 0}`` for a ``k x ncols`` matrix."""
    if mat.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    r = int(np.count_nonzero(s > rank_threshold(s)))
    return vh[r:].conj().T


class _Metric:
    """Cholesky factor of a Gram matrix, ``G = L L^H``."""

    def __init__(self, gram):
        self.n = gram.shape[0]
        self.gram = gram
        self.L = np.linalg.cholesky(gram)

    def to_euclid(self, x):
        return self.L.conj().T @ x

    def from_euclid(self, y):
        return sla.solve_triangular(self.L.conj().T, y, lower=False)


def _metric(gram, n) -> _Metric:
    if gram is None:
        gram = np.eye(n, dtype=complex)
    return _Metric(np.asarray(gram, dtype=complex))


def orthonormal_frame(sub: SubspaceFrame, gram=None) -> np.ndarray:
    """Gram-orthonormal basis of ``sub``."""
    met = _metric(gram, sub.ambient_dim)
    q = _column_basis(met.to_euclid(sub.frame))
    return met.from_euclid(q)


def projector(sub: SubspaceFrame, gram=None) -> np.ndarray:
    """Gram-orthogonal projection onto ``sub``."""
    met = _metric(gram, sub.ambient_dim)
    q = _column_basis(met.to_euclid(sub.frame))
    pe = q @ q.conj().T
    # back from Euclidean coordinates: P = L^{-H} Pe L^H
    return met.from_euclid(pe @ met.L.conj().T)


def gap_distance(M: SubspaceFrame, N: SubspaceFrame, gram=None) -> float:
    """Gap ``||P_M - P_N||`` between two subspaces."""
    if M.ambient_dim != N.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")
    met = _metric(gram, M.ambient_dim)
    qm = _column_basis(met.to_euclid(M.frame))
    qn = _column_basis(met.to_euclid(N.frame))
    diff = qm @ qm.conj().T - qn @ qn.conj().T
    return float(np.linalg.norm(diff, 2)) if diff.size else 0.0


def contains(big: SubspaceFrame, small: SubspaceFrame, gram=None, tol=None) -> bool:
    """True if ``small`` lies inside ``big`` up to ``tol``."""
    if small.dim == 0:
        return True
    met = _metric(gram, big.ambient_dim)
    qb = _column_basis(met.to_euclid(big.frame))
    qs = _column_basis(met.to_euclid(small.frame))
    resid = qs - qb @ (qb.conj().T @ qs)
    return float(np.linalg.norm(resid, 2)) < (TOL.num if tol is None else tol)


def same_span(a: SubspaceFrame, b: SubspaceFrame, gram=None, tol=None) -> bool:
    return a.dim == b.dim and gap_distance(a, b, gram) < (TOL.num if tol is None else tol)


def intersection(lam: SubspaceFrame, mu: SubspaceFrame) -> SubspaceFrame:
    """Frame of ``lam ∩ mu`` from the kernel of ``[F_lam, -F_mu]``."""
    if lam.ambient_dim != mu.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")
    n = lam.ambient_dim
    if lam.dim == 0 or mu.dim == 0:
        return SubspaceFrame.zero(n)
    fl = _column_basis(lam.frame)
    fm = _column_basis(mu.frame)
    ker = _null_space(np.hstack([fl, -fm]), fl.shape[1] + fm.shape[1])
    if ker.shape[1] == 0:
        return SubspaceFrame.zero(n)
    return SubspaceFrame(_column_basis(fl @ ker[: fl.shape[1]]))


def subspace_sum(lam: SubspaceFrame, mu: SubspaceFrame) -> SubspaceFrame:
    if lam.ambient_dim != mu.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")
    return SubspaceFrame(_column_basis(np.hstack([lam.frame, mu.frame])))


def fredholm_index(lam: SubspaceFrame, mu: SubspaceFrame) -> int:
    """``dim(lam ∩ mu) - codim(lam + mu)``."""
    n = lam.ambient_dim
    if mu.ambient_dim != n:
        raise ValueError("subspaces live in different ambient spaces")
    both = np.hstack([lam.frame, mu.frame])
    rank_sum = numerical_rank(both)
    dim_cap = lam.dim + mu.dim - rank_sum
    return dim_cap - (n - rank_sum)


def quotient_gap(D1: SubspaceFrame, D2: SubspaceFrame, Y: SubspaceFrame, gram=None,
                 tol=None) -> float:
    """Gap between ``D1/Y`` and ``D2/Y``, realised as ``D_i ∩ Y^⊥``."""
    if not (contains(D1, Y, gram, tol) and contains(D2, Y, gram, tol)):
        raise ValueError("Y must be contained in both D1 and D2")
    met = _metric(gram, D1.ambient_dim)
    qy = _column_basis(met.to_euclid(Y.frame))

    def complement(D):
        qd = _column_basis(met.to_euclid(D.frame))
        rest = qd - qy @ (qy.conj().T @ qd)
        return SubspaceFrame(met.from_euclid(_column_basis(rest)))

    return gap_distance(complement(D1), complement(D2), gram)


@dataclass(frozen=True, eq=False)
class SymplecticSpace:
    """``C^n`` with inner product ``<x, y> = y^H G x`` and ``omega(x, y) = <J x, y>``."""

    gram: np.ndarray
    J: np.ndarray
    tol: float | None = None

    def __post_init__(self):
        if self.tol is None:
            object.__setattr__(self, "tol", TOL.num)
        G = _as_complex(self.gram)
        J = _as_complex(self.J)
        n = G.shape[0]
        if G.shape != (n, n) or J.shape != (n, n):
            raise ValueError("gram and J must be square matrices of equal size")
        scale = max(1.0, float(np.abs(G).max()))
        if np.abs(G - G.conj().T).max() > self.tol * scale:
            raise ValueError("gram matrix is not Hermitian")
        if np.linalg.eigvalsh(G).min() <= TOL.pd:
            raise ValueError("gram matrix is not positive definite")
        GJ = G @ J
        if np.abs(GJ + GJ.conj().T).max() > self.tol * max(1.0, float(np.abs(GJ).max())):
            raise ValueError("J is not skew-adjoint with respect to the gram matrix")
        s = np.linalg.svd(J, compute_uv=False)
        if s[-1] <= rank_threshold(s):
            raise ValueError("J is not invertible")
        object.__setattr__(self, "gram", G)
        object.__setattr__(self, "J", J)

    @classmethod
    def standard(cls, J) -> "SymplecticSpace":
        J = np.asarray(J, dtype=complex)
        return cls(np.eye(J.shape[0], dtype=complex), J)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def omega(self, x, y) -> complex:
        return complex(np.asarray(y).conj() @ self.gram @ self.J @ np.asarray(x))

    def omega_matrix(self, X, Y) -> np.ndarray:
        """Matrix ``[omega(X[:, j], Y[:, i])]_{ij} = Y^H G J X``."""
        return np.asarray(Y).conj().T @ self.gram @ self.J @ np.asarray(X)

    @cached_property
    def _splitting(self):
        G, J = self.gram, self.J
        herm = 1j * (G @ J)
        herm = 0.5 * (herm + herm.conj().T)
        kappa, vecs = sla.eigh(herm, G)
        scale = max(1.0, float(np.abs(kappa).max()))
        if np.abs(kappa).min() < self.tol * scale:
            raise ValueError("sqrt(-1) J has an eigenvalue at zero; splitting undefined")
        # G|K| defines the form in which the normalised bases are orthonormal
        abs_form = G @ vecs @ np.diag(np.abs(kappa)) @ vecs.conj().T @ G
        plus = _canonical_basis(vecs[:, kappa < 0], G, abs_form)
        minus = _canonical_basis(vecs[:, kappa > 0], G, abs_form)
        return plus, minus

    @property
    def basis_plus(self) -> np.ndarray:
        """Basis of ``H^+`` with ``omega = +i I`` on it."""
        return self._splitting[0]

    @property
    def basis_minus(self) -> np.ndarray:
        """Basis of ``H^-`` with ``omega = -i I`` on it."""
        return self._splitting[1]

    @cached_property
    def _split_solver(self):
        return sla.lu_factor(np.hstack(self._splitting))


def _canonical_basis(vecs, gram, form):
    """Deterministic basis of ``span(vecs)``, orthonormal for ``form``.

    Gram-Schmidt of the projections of the standard basis vectors, so the
    result does not depend on how LAPACK orders degenerate eigenvectors.
    """
    n, k = vecs.shape
    if k == 0:
        return np.zeros((n, 0), dtype=complex)
    proj = vecs @ vecs.conj().T @ gram
    out = []
    for j in range(n):
        c = proj[:, j].copy()
        for b in out:
            c = c - (b.conj() @ form @ c) * b
        nrm2 = float(np.real(c.conj() @ form @ c))
        if nrm2 > 1e-12:
            # re-orthogonalise once for stability
            for b in out:
                c = c - (b.conj() @ form @ c) * b
            nrm2 = float(np.real(c.conj() @ form @ c))
            out.append(c / np.sqrt(nrm2))
        if len(out) == k:
            break
    return np.column_stack(out)


def _check_space(space: SymplecticSpace, sub: SubspaceFrame):
    if sub.ambient_dim != space.dim:
        raise ValueError(
            f"dimension mismatch: subspace in C^{sub.ambient_dim}, space is C^{space.dim}"
        )


def annihilator(space: SymplecticSpace, lam: SubspaceFrame) -> SubspaceFrame:
    """``lam^omega = {y : omega(x, y) = 0 for all x in lam}``."""
    _check_space(space, lam)
    if lam.dim == 0:
        return SubspaceFrame.full(space.dim)
    # omega(x, y) = y^H (G J F) c, so y must be orthogonal to the columns of G J F
    constraints = (space.gram @ space.J @ lam.frame).conj().T
    ker = _null_space(constraints, space.dim)
    if ker.shape[1] == 0:
        return SubspaceFrame.zero(space.dim)
    return SubspaceFrame(ker)


def classify(space: SymplecticSpace, lam: SubspaceFrame, tol=None) -> Isotropy:
    ann = annihilator(space, lam)
    iso = contains(ann, lam, space.gram, tol)
    coiso = contains(lam, ann, space.gram, tol)
    if iso and coiso:
        return "lagrangian"
    if iso:
        return "isotropic"
    if coiso:
        return "coisotropic"
    return "none"


def is_lagrangian(space: SymplecticSpace, lam: SubspaceFrame, tol=None) -> bool:
    """Half-dimensional and isotropic; one SVD instead of the full classification."""
    _check_space(space, lam)
    if 2 * lam.dim != space.dim:
        return False
    q = _column_basis(lam.frame)
    form = space.gram @ space.J
    resid = np.abs(q.conj().T @ form @ q).max() if q.size else 0.0
    return resid < (space.tol if tol is None else tol) * max(1.0, float(np.abs(form).max()))


@dataclass(frozen=True, eq=False)
class UnitaryGenerator:
    """Matrix ``U`` of the map ``H^+ -> H^-`` whose graph is a Lagrangian.

    ``U`` is written in the normalised bases ``basis_plus``/``basis_minus`` of
    the space, where the generator condition reduces to ``U^H U = I``.
    """

    basis_plus: np.ndarray
    basis_minus: np.ndarray
    U: np.ndarray


def lagrangian_to_unitary(space: SymplecticSpace, lam: SubspaceFrame,
                          tol=None, check=True) -> UnitaryGenerator:
    _check_space(space, lam)
    n = space.dim
    if n % 2 or space.basis_plus.shape[1] != n // 2:
        raise ValueError("space admits no Lagrangian subspaces (unbalanced splitting)")
    if check:
        if not is_lagrangian(space, lam, tol):
            kind = classify(space, lam, tol)
            raise ValueError(f"subspace is not Lagrangian (classified as {kind})")
    elif lam.dim != n // 2:
        raise ValueError("subspace has the wrong dimension for a Lagrangian")
    coeff = sla.lu_solve(space._split_solver, lam.frame)
    k = n // 2
    a, b = coeff[:k], coeff[k:]
    U = np.linalg.solve(a.T, b.T).T
    return UnitaryGenerator(space.basis_plus, space.basis_minus, U)


def _check_generator(U, tol):
    k = U.shape[0]
    if U.shape != (k, k):
        raise ValueError("generator must be square")
    dev = np.abs(U.conj().T @ U - np.eye(k)).max() if k else 0.0
    if dev > tol * max(1.0, k):
        raise ValueError(f"generator violates U^* J U = -J (deviation {dev:.3g})")


def unitary_to_lagrangian(space: SymplecticSpace, U, tol=None) -> SubspaceFrame:
    """Graph ``{x + U x : x in H^+}`` of a generator."""
    if isinstance(U, UnitaryGenerator):
        U = U.U
    U = np.asarray(U, dtype=complex)
    if U.shape[0] != space.basis_minus.shape[1] or U.shape[1] != space.basis_plus.shape[1]:
        raise ValueError("generator shape does not match the splitting of the space")
    _check_generator(U, 1e-8 if tol is None else max(tol, 1e-8))
    return SubspaceFrame(space.basis_plus + space.basis_minus @ U)


def intersection_dim(space: SymplecticSpace, lam: SubspaceFrame, mu: SubspaceFrame,
                     tol=None) -> int:
    """``dim ker(U V^{-1} - I)``, cross-checked against a rank count."""
    U = lagrangian_to_unitary(space, lam, tol).U
    V = lagrangian_to_unitary(space, mu, tol).U
    W = U @ np.linalg.inv(V)
    s = np.linalg.svd(W - np.eye(W.shape[0]), compute_uv=False)
    count = int(np.count_nonzero(s <= rank_threshold(s)))
    direct = intersection(lam, mu).dim
    if direct != count:
        warnings.warn(
            f"intersection dimension by generators ({count}) differs from rank count ({direct})",
            RuntimeWarning,
            stacklevel=2,
        )
    return count
