"""Paths of self-adjoint boundary conditions.

A boundary condition for ``sigma d/dt + B`` is a Lagrangian subspace of the
boundary space ``C^m + C^m`` (values at ``t = 0`` and ``t = 1``); the domain
is ``{x : (x(0), x(1)) in L}``.
"""

from __future__ import annotations

import numpy as np

from ..maslov import GeodesicLagrangianPath
from ..sympcore import SubspaceFrame, is_lagrangian, same_span, unitary_to_lagrangian
from .system import boundary_symplectic


class BoundaryPath:
    m: int

    def __call__(self, s: float) -> SubspaceFrame:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def is_loop(self) -> bool:
        return same_span(self(0.0), self(1.0), tol=1e-8)

    def check(self, sigma, s_values=(0.0, 0.5, 1.0)):
        space = boundary_symplectic(sigma)
        for s in s_values:
            if not is_lagrangian(space, self(s), tol=1e-8):
                raise ValueError(f"boundary condition at s={s} is not Lagrangian")
        return True


class PhaseBoundary(BoundaryPath):
    """``x(1) = exp(i theta_s) x(0)`` with ``theta_s = theta0 + s (theta1 - theta0)``; ``m = 1``."""

    m = 1

    def __init__(self, theta0: float, theta1: float | None = None):
        self.theta0 = float(theta0)
        self.theta1 = float(theta0 if theta1 is None else theta1)

    def theta(self, s):
        return self.theta0 + s * (self.theta1 - self.theta0)

    def __call__(self, s):
        return SubspaceFrame(np.array([1.0, np.exp(1j * self.theta(s))]))

    def to_dict(self):
        return {"type": "phase", "theta0": self.theta0, "theta1": self.theta1}


class FixedBoundary(BoundaryPath):
    """The same boundary frame for every ``s``."""

    def __init__(self, frame):
        self.frame = frame if isinstance(frame, SubspaceFrame) else SubspaceFrame(frame)
        self.m = self.frame.ambient_dim // 2

    def __call__(self, s):
        return self.frame

    def to_dict(self):
        return {"type": "fixed", "frame": self.frame.frame}


def periodic(m: int = 1) -> FixedBoundary:
    """``x(1) = x(0)``."""
    eye = np.eye(m)
    return FixedBoundary(np.vstack([eye, eye]))


class SplitBoundary(BoundaryPath):
    """Components listed in ``zero`` vanish at both ends; the others are free."""

    def __init__(self, m: int, zero):
        self.m = int(m)
        self.zero = sorted(int(i) for i in zero)
        free = [i for i in range(self.m) if i not in self.zero]
        cols = []
        for i in free:
            for end in (0, 1):
                e = np.zeros(2 * self.m)
                e[end * self.m + i] = 1.0
                cols.append(e)
        self.frame = SubspaceFrame(np.column_stack(cols))

    def __call__(self, s):
        return self.frame

    def to_dict(self):
        return {"type": "split", "m": self.m, "zero": self.zero}


class GeneratorBoundary(BoundaryPath):
    """Boundary Lagrangians with generators ``U_s = U0 exp(i s H)``.

    Generators are taken in the normalised splitting bases of the boundary
    space for ``sigma``.
    """

    def __init__(self, sigma, U0, H):
        self.sigma = np.atleast_2d(np.asarray(sigma, dtype=complex))
        self.space = boundary_symplectic(self.sigma)
        self.U0 = np.atleast_2d(np.asarray(U0, dtype=complex))
        self.H = np.atleast_2d(np.asarray(H, dtype=complex))
        if np.abs(self.H - self.H.conj().T).max() > 1e-12 * max(1.0, np.abs(self.H).max()):
            raise ValueError("H must be Hermitian")
        self.m = self.sigma.shape[0]
        self._w, self._v = np.linalg.eigh(self.H)

    def generator(self, s):
        return self.U0 @ (self._v * np.exp(1j * s * self._w)) @ self._v.conj().T

    def __call__(self, s):
        return unitary_to_lagrangian(self.space, self.generator(s))

    def to_dict(self):
        return {"type": "generator", "U0": self.U0, "H": self.H}


class FramesBoundary(BoundaryPath):
    """Frames sampled at knots ``s``, joined by geodesics of their generators."""

    def __init__(self, sigma, s, frames):
        self.sigma = np.atleast_2d(np.asarray(sigma, dtype=complex))
        self.m = self.sigma.shape[0]
        self.path = GeodesicLagrangianPath(boundary_symplectic(self.sigma), s, frames)

    def __call__(self, s):
        return self.path(s)

    def to_dict(self):
        return {"type": "frames", "s": self.path.s, "frames": [f.frame for f in self.path.frames]}
