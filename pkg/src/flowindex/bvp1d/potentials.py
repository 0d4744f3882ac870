"""Hermitian potentials ``B(s, t)`` for first-order systems.

Every potential is vectorised in ``t``: ``B(s, t)`` with an array ``t`` of
shape ``(N,)`` returns an array of shape ``(N, m, m)``.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import PchipInterpolator, interp1d


def _herm(a, name):
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if np.abs(a - a.conj().T).max() > 1e-12 * max(1.0, np.abs(a).max()):
        raise ValueError(f"{name} is not Hermitian")
    return 0.5 * (a + a.conj().T)


class Potential:
    m: int
    t_constant: bool = False

    def __call__(self, s, t):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class AffinePotential(Potential):
    """``B(s, t) = (1 - s) v0 + s v1``, constant in ``t``."""

    t_constant = True

    def __init__(self, v0, v1):
        self.v0 = _herm(v0, "v0")
        self.v1 = _herm(v1, "v1")
        if self.v0.shape != self.v1.shape:
            raise ValueError("v0 and v1 have different shapes")
        self.m = self.v0.shape[0]

    def __call__(self, s, t):
        val = (1 - s) * self.v0 + s * self.v1
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return val
        return np.broadcast_to(val, t.shape + val.shape)

    def to_dict(self):
        return {"type": "affine", "v0": self.v0, "v1": self.v1}


class TrigPotential(Potential):
    """Trigonometric polynomial in ``t`` with coefficients affine in ``s``.

    ``B = base + s slope + sum_k (C_k + s C'_k) cos(2 pi k t) + (S_k + s S'_k) sin(2 pi k t)``.
    """

    def __init__(self, base, slope=None, harmonics=()):
        self.base = _herm(base, "base")
        self.m = self.base.shape[0]
        zero = np.zeros_like(self.base)
        self.slope = zero if slope is None else _herm(slope, "slope")
        self.harmonics = []
        for h in harmonics:
            k = int(h["k"])
            if k < 1:
                raise ValueError("harmonic index must be positive")
            terms = {key: (zero if h.get(key) is None else _herm(h[key], key))
                     for key in ("cos", "sin", "s_cos", "s_sin")}
            self.harmonics.append((k, terms))
        self.t_constant = not self.harmonics

    def __call__(self, s, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.broadcast_to(self.base + s * self.slope, t.shape + self.base.shape).copy()
        for k, c in self.harmonics:
            cos = np.cos(2 * np.pi * k * t)[:, None, None]
            sin = np.sin(2 * np.pi * k * t)[:, None, None]
            out += cos * (c["cos"] + s * c["s_cos"]) + sin * (c["sin"] + s * c["s_sin"])
        return out[0] if scalar else out

    def to_dict(self):
        return {
            "type": "trig",
            "base": self.base,
            "slope": self.slope,
            "harmonics": [dict(k=k, **terms) for k, terms in self.harmonics],
        }


def _interpolant(x, y, mode, axis):
    if len(x) < 2:
        raise ValueError("sampled data needs at least two knots")
    if mode == "linear":
        return interp1d(x, y, axis=axis, assume_sorted=True)
    if mode == "pchip-entrywise":
        return PchipInterpolator(x, y, axis=axis)
    raise ValueError(f"unknown interpolation mode {mode!r}")


def interpolate_hermitian(x, values, mode="linear"):
    """Entrywise interpolation of Hermitian samples; real and imaginary parts separately.

    Both modes map Hermitian samples to Hermitian values (pchip is odd in the
    data, so antisymmetric imaginary parts stay antisymmetric).
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=complex)
    re = _interpolant(x, values.real, mode, 0)
    im = _interpolant(x, values.imag, mode, 0)

    def f(u):
        return re(u) + 1j * im(u)
    return f


class SampledPotential(Potential):
    """Potential given on a tensor grid ``values[i, j] = B(s_i, t_j)``.

    A single ``s`` knot gives an ``s``-independent potential, a single ``t``
    knot a ``t``-independent one.
    """

    def __init__(self, s, t, values, mode="linear"):
        self.s = np.asarray(s, dtype=float)
        self.t = np.asarray(t, dtype=float)
        vals = np.asarray(values, dtype=complex)
        if vals.shape[:2] != (len(self.s), len(self.t)) or vals.shape[2] != vals.shape[3]:
            raise ValueError("values must have shape (len(s), len(t), m, m)")
        for i in range(len(self.s)):
            for j in range(len(self.t)):
                _herm(vals[i, j], f"sample ({i}, {j})")
        for knots, name in ((self.s, "s"), (self.t, "t")):
            if np.any(np.diff(knots) <= 0):
                raise ValueError(f"{name} knots must be increasing")
        self.values = vals
        self.mode = mode
        self.m = vals.shape[2]
        self.t_constant = len(self.t) == 1
        self._in_s = None if len(self.s) == 1 else interpolate_hermitian(self.s, vals, mode)

    def __call__(self, s, t):
        slab = self.values[0] if self._in_s is None else self._in_s(float(np.clip(s, self.s[0], self.s[-1])))
        t = np.asarray(t, dtype=float)
        if self.t_constant:
            val = slab[0]
            return val if t.ndim == 0 else np.broadcast_to(val, t.shape + val.shape)
        tt = np.clip(t, self.t[0], self.t[-1])
        out = interpolate_hermitian(self.t, slab, self.mode)(tt)
        return 0.5 * (out + np.swapaxes(out, -1, -2).conj())

    def to_dict(self):
        return {"type": "sampled", "s": self.s, "t": self.t, "values": self.values, "mode": self.mode}


class CallablePotential(Potential):
    """Wrap a user function ``f(s, t)`` returning an ``m x m`` matrix."""

    def __init__(self, f, m, t_constant=False):
        self.f = f
        self.m = int(m)
        self.t_constant = t_constant

    def __call__(self, s, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return np.asarray(self.f(s, float(t)), dtype=complex).reshape(self.m, self.m)
        return np.array([np.asarray(self.f(s, float(u)), dtype=complex).reshape(self.m, self.m)
                         for u in t])

    def to_dict(self):
        raise TypeError("callable potentials cannot be serialised")


def shifted(potential: Potential, shift: float) -> Potential:
    """``B + shift I``."""
    eye = np.eye(potential.m)

    class _Shifted(Potential):
        m = potential.m
        t_constant = potential.t_constant

        def __call__(self, s, t):
            return potential(s, t) + shift * eye

        def to_dict(self):
            raise TypeError("shifted potentials are not serialised")

    return _Shifted()
