"""Spectral flow of continuous matrix paths.

Two kinds of path are supported:

``hermitian``
    self-adjoint matrices (with respect to a possibly ``s``-dependent Gram
    matrix); the curve crossed is the imaginary axis near 0, co-oriented
    from left to right, so the negative side is ``Re < 0``.
``unitary``
    unitary matrices; the curve crossed is the real axis near 1,
    co-oriented upwards, so the negative side is the lower half plane.

Both are reduced to a real *spectral coordinate* per eigenvalue (the
eigenvalue itself, or its argument in ``(-pi, pi]``), which is what
:func:`partition_flow` consumes.  Eigenvalues inside the zero band count as
nullity, never as negative; this fixes the contribution of eigenvalues that
sit on the curve at ``s = 0`` or ``s = 1``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq, minimize_scalar

from .tolerances import TOL, zero_band

__all__ = [
    "OperatorPath",
    "FlowComputation",
    "CrossingRecordSF",
    "NonConvergenceError",
    "WindowCollisionError",
    "spectral_decomposition",
    "spectral_projection",
    "contour_projection",
    "aps_projection",
    "hyperbolic_nullity",
    "riesz_transform",
    "partition_flow",
    "sf_partition",
    "sf_crossing",
    "spectral_coordinates",
]

HERMITIAN = "hermitian"
UNITARY = "unitary"


class NonConvergenceError(RuntimeError):
    """Adaptive refinement did not settle; carries the offending interval."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class WindowCollisionError(ValueError):
    """An eigenvalue sits on the boundary of a spectral window."""


def _check_self_adjoint(A, gram):
    GA = A if gram is None else gram @ A
    scale = max(1.0, float(np.abs(GA).max()))
    if np.abs(GA - GA.conj().T).max() > 1e3 * TOL.num * scale:
        raise ValueError("matrix is not self-adjoint with respect to the Gram matrix")
    return 0.5 * (GA + GA.conj().T)


def _eigh(A, gram=None, vectors=True):
    """Eigen-decomposition of a Gram-self-adjoint matrix; vectors are Gram-orthonormal."""
    A = np.asarray(A, dtype=complex)
    GA = _check_self_adjoint(A, gram)
    if gram is None:
        return np.linalg.eigh(GA) if vectors else np.linalg.eigvalsh(GA)
    gram = np.asarray(gram, dtype=complex)
    return sla.eigh(GA, gram, eigvals_only=not vectors)


def _herm_band(vals):
    return zero_band(np.abs(vals).max() if len(vals) else 0.0)


def spectral_decomposition(A, gram=None):
    """Morse data ``(m_plus, m_zero, m_minus, (eigvals, eigvecs))`` of ``A``."""
    w, v = _eigh(A, gram)
    band = _herm_band(w)
    m_minus = int(np.count_nonzero(w < -band))
    m_plus = int(np.count_nonzero(w > band))
    m_zero = len(w) - m_minus - m_plus
    return m_plus, m_zero, m_minus, (w, v)


def _window_bounds(window):
    if np.isscalar(window):
        r = float(window)
        return -r, r
    lo, hi = window
    return float(lo), float(hi)


def spectral_projection(A, window, gram=None, tol_gap=None):
    """Projection onto the eigenvectors with eigenvalues inside ``window``.

    ``window`` is either a radius ``r`` (meaning ``(-r, r)``) or an interval
    ``(a, b)``.
    """
    lo, hi = _window_bounds(window)
    w, v = _eigh(A, gram)
    if tol_gap is None:
        tol_gap = 1e3 * TOL.num * max(1.0, float(np.abs(w).max()))
    if np.any(np.abs(w - lo) < tol_gap) or np.any(np.abs(w - hi) < tol_gap):
        raise WindowCollisionError(f"eigenvalue on the window boundary {lo}, {hi}; refine the window")
    inside = (w > lo) & (w < hi)
    vin = v[:, inside]
    G = np.eye(len(w)) if gram is None else np.asarray(gram, dtype=complex)
    return vin @ vin.conj().T @ G


def contour_projection(A, window, nodes=256):
    """Riesz projection by the trapezoid rule on the circle over ``window``."""
    lo, hi = _window_bounds(window)
    A = np.asarray(A, dtype=complex)
    center, radius = 0.5 * (lo + hi), 0.5 * (hi - lo)
    n = A.shape[0]
    phis = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    P = np.zeros((n, n), dtype=complex)
    eye = np.eye(n)
    for phi in phis:
        z = center + radius * np.exp(1j * phi)
        P += radius * np.exp(1j * phi) * np.linalg.solve(z * eye - A, eye)
    return P / nodes


def aps_projection(A, gram=None):
    """Projection onto the non-negative spectral subspace."""
    w, v = _eigh(A, gram)
    keep = w >= -_herm_band(w)
    G = np.eye(len(w)) if gram is None else np.asarray(gram, dtype=complex)
    return v[:, keep] @ v[:, keep].conj().T @ G


def hyperbolic_nullity(A, kind=HERMITIAN, gram=None) -> int:
    """Number of eigenvalues on the curve: at 0 (hermitian) or at 1 (unitary)."""
    x = spectral_coordinates(A, kind, gram)
    return int(np.count_nonzero(np.abs(x) <= _band_for(kind, x)))


def riesz_transform(A, gram=None):
    """``A (A^2 + I)^{-1/2}`` through the spectral decomposition."""
    w, v = _eigh(A, gram)
    G = np.eye(len(w)) if gram is None else np.asarray(gram, dtype=complex)
    return v @ np.diag(w / np.sqrt(1.0 + w * w)) @ v.conj().T @ G


def spectral_coordinates(A, kind=HERMITIAN, gram=None):
    """Sorted real coordinates of the spectrum relative to the crossed curve."""
    if kind == HERMITIAN:
        return np.sort(_eigh(A, gram, vectors=False))
    if kind == UNITARY:
        return np.sort(np.angle(np.linalg.eigvals(np.asarray(A, dtype=complex))))
    raise ValueError(f"unknown path kind {kind!r}")


def _band_for(kind, x):
    if kind == UNITARY:
        return zero_band(1.0)
    return _herm_band(x)


@dataclass(frozen=True)
class OperatorPath:
    """Continuous family ``s -> A_s`` on ``[0, 1]``."""

    dim: int
    kind: str
    eval: Callable[[float], np.ndarray]
    gram_family: Callable[[float], np.ndarray] | None = None
    sample_hint: int = 64

    def __post_init__(self):
        if self.kind not in (HERMITIAN, UNITARY):
            raise ValueError(f"kind must be 'hermitian' or 'unitary', got {self.kind!r}")

    def __call__(self, s):
        return np.asarray(self.eval(float(s)), dtype=complex)

    def gram(self, s):
        return None if self.gram_family is None else np.asarray(self.gram_family(float(s)), dtype=complex)

    def coordinates(self, s):
        A = self(s)
        if self.kind == UNITARY:
            G = self.gram(s)
            Gm = np.eye(self.dim) if G is None else G
            dev = np.abs(A.conj().T @ Gm @ A - Gm).max()
            if dev > 1e3 * TOL.num * max(1.0, np.abs(Gm).max()):
                raise ValueError(f"path value at s={s} is not unitary (deviation {dev:.2e})")
        return spectral_coordinates(A, self.kind, self.gram(s))

    def band(self, x):
        return _band_for(self.kind, x)

    def restrict(self, a: float, b: float) -> "OperatorPath":
        """The path ``s -> A_{a + (b - a) s}``; ``a > b`` reverses it."""
        f, g = self.eval, self.gram_family
        return OperatorPath(
            self.dim,
            self.kind,
            lambda s: f(a + (b - a) * s),
            None if g is None else (lambda s: g(a + (b - a) * s)),
            self.sample_hint,
        )

    def reversed(self) -> "OperatorPath":
        return self.restrict(1.0, 0.0)

    @staticmethod
    def concat(paths: Sequence["OperatorPath"]) -> "OperatorPath":
        """Paths traversed one after another, each on an equal share of ``[0, 1]``."""
        k = len(paths)
        first = paths[0]

        def pick(s):
            i = min(int(s * k), k - 1)
            return paths[i], s * k - i

        def ev(s):
            p, u = pick(s)
            return p.eval(u)

        grams = [p.gram_family for p in paths]
        if all(g is None for g in grams):
            gf = None
        else:
            def gf(s):
                p, u = pick(s)
                return np.eye(p.dim) if p.gram_family is None else p.gram_family(u)
        return OperatorPath(first.dim, first.kind, ev, gf, max(p.sample_hint for p in paths) * k)

    @staticmethod
    def block_diag(p: "OperatorPath", q: "OperatorPath") -> "OperatorPath":
        if p.kind != q.kind:
            raise ValueError("blocks must be of the same kind")

        def gf(s):
            gp = np.eye(p.dim) if p.gram_family is None else p.gram_family(s)
            gq = np.eye(q.dim) if q.gram_family is None else q.gram_family(s)
            return sla.block_diag(gp, gq)

        no_gram = p.gram_family is None and q.gram_family is None
        return OperatorPath(
            p.dim + q.dim,
            p.kind,
            lambda s: sla.block_diag(p.eval(s), q.eval(s)),
            None if no_gram else gf,
            max(p.sample_hint, q.sample_hint),
        )


@dataclass
class FlowComputation:
    """Record of one run of the partition algorithm."""

    partition: list[float]
    anchors: list[float]
    window_radii: list[float]
    segment_terms: list[int]
    total: int
    evaluations: int = 0
    notes: list[str] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _choose_radius(x, cap, band):
    """Window radius in the widest gap of ``|x|`` (measured from 0)."""
    mags = np.sort(np.abs(np.asarray(x, dtype=float)))
    if cap is not None:
        mags = mags[mags < cap]
    mags = mags[mags > band]
    if cap is not None:
        top = float(cap)
    elif mags.size:
        top = float(mags[-1] + max(mags[-1], 1.0))
    else:
        top = 2.0
    edges = np.concatenate([[0.0], mags, [top]])
    gaps = np.diff(edges)
    k = int(np.argmax(gaps))
    return 0.5 * (edges[k] + edges[k + 1])


def partition_flow(
    spectrum: Callable[[float], np.ndarray],
    band: Callable[[np.ndarray], float],
    cap: float | None = None,
    orientation: int = 1,
    sample_hint: int = 64,
    max_depth: int = 20,
    gap_frac: float = 1e-3,
    a: float = 0.0,
    b: float = 1.0,
) -> FlowComputation:
    """Partition algorithm on a path given by its spectral coordinates.

    ``spectrum(s)`` returns the real spectral coordinates at ``s``.  Each
    segment gets a window ``|x| < r`` chosen at its midpoint; the segment is
    accepted once two successive sample doublings show the same window
    count and no coordinate within ``gap_frac * r`` of ``r``.  Otherwise the
    segment is bisected.  The flow is the sum over segments of the negative
    count in the window at the left end minus that at the right end.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    cache: dict[float, np.ndarray] = {}

    def spec(s):
        key = float(s)
        if key not in cache:
            cache[key] = np.asarray(spectrum(key), dtype=float)
        return cache[key]

    def negative_in_window(x, r):
        bnd = band(x)
        inside = x[np.abs(x) < r]
        return int(np.count_nonzero(orientation * inside < -bnd))

    def segment_ok(lo, hi, r, count):
        clearance = max(gap_frac * r, 1e-12)
        passes = 0
        for npts in (3, 5, 9):
            for s in np.linspace(lo, hi, npts):
                x = spec(s)
                if np.any(np.abs(np.abs(x) - r) <= clearance):
                    return False
                if int(np.count_nonzero(np.abs(x) < r)) != count:
                    return False
            passes += 1
            if passes == 2:
                return True
        return True

    n0 = max(1, int(sample_hint))
    grid = np.linspace(a, b, n0 + 1)
    stack = [(float(grid[i]), float(grid[i + 1]), 0) for i in range(n0)][::-1]
    partition, anchors, radii, terms = [a], [], [], []
    while stack:
        lo, hi, depth = stack.pop()
        t = 0.5 * (lo + hi)
        xt = spec(t)
        r = _choose_radius(xt, cap, band(xt))
        count = int(np.count_nonzero(np.abs(xt) < r))
        if segment_ok(lo, hi, r, count):
            partition.append(hi)
            anchors.append(t)
            radii.append(r)
            terms.append(negative_in_window(spec(lo), r) - negative_in_window(spec(hi), r))
            continue
        if depth >= max_depth:
            raise NonConvergenceError(
                f"partition refinement did not converge on [{lo:.6g}, {hi:.6g}]; "
                "the path may be discontinuous",
                interval=(lo, hi),
            )
        stack.append((t, hi, depth + 1))
        stack.append((lo, t, depth + 1))
    return FlowComputation(partition, anchors, radii, terms, int(sum(terms)), len(cache))


def sf_partition(path: OperatorPath, orientation: int = 1, max_depth: int = 20):
    """Spectral flow by the partition algorithm; returns ``(total, record)``.

    ``orientation=-1`` flips the co-orientation of the crossed curve.
    """
    cap = np.pi if path.kind == UNITARY else None
    comp = partition_flow(
        path.coordinates,
        path.band,
        cap=cap,
        orientation=orientation,
        sample_hint=path.sample_hint,
        max_depth=max_depth,
    )
    return comp.total, comp


@dataclass
class CrossingRecordSF:
    t: float
    nullity: int
    B_restricted: np.ndarray
    signature_data: tuple[int, int, int]
    contribution: int
    fallback: bool = False

    def to_dict(self):
        return {
            "t": self.t,
            "nullity": self.nullity,
            "B_restricted": self.B_restricted.tolist() if self.B_restricted is not None else None,
            "signature_data": list(self.signature_data),
            "contribution": self.contribution,
            "fallback": self.fallback,
        }


def _derivative(f, t, h):
    """Second-order difference of ``f`` at ``t``, one-sided at the ends of [0, 1]."""
    if t - h < 0.0:
        return (-3 * f(t) + 4 * f(t + h) - f(t + 2 * h)) / (2 * h)
    if t + h > 1.0:
        return (3 * f(t) - 4 * f(t - h) + f(t - 2 * h)) / (2 * h)
    return (f(t + h) - f(t - h)) / (2 * h)


def richardson_derivative(f, t, h=1e-5):
    """Derivative with one Richardson step; returns ``(value, mismatch)``."""
    d1 = _derivative(f, t, h)
    d2 = _derivative(f, t, h / 2)
    rich = (4 * d2 - d1) / 3
    mismatch = float(np.max(np.abs(rich - d2))) / max(1.0, float(np.max(np.abs(rich))))
    return rich, mismatch


def locate_zeros(dist: Callable[[float], float], grid: np.ndarray, tol: float, xatol: float):
    """Times where the non-negative function ``dist`` vanishes.

    Returns ``(points, plateaus)``: isolated zeros refined from grid local
    minima, and ``(lo, hi)`` intervals where ``dist`` stays below ``tol`` on
    consecutive grid points.
    """
    g = np.array([dist(s) for s in grid])
    n = len(grid)
    small = g < tol
    plateaus, in_plateau = [], np.zeros(n, bool)
    i = 0
    while i < n:
        if small[i] and i + 1 < n and small[i + 1]:
            j = i
            while j + 1 < n and small[j + 1]:
                j += 1
            plateaus.append((float(grid[max(i - 1, 0)]), float(grid[min(j + 1, n - 1)])))
            in_plateau[max(i - 1, 0): j + 2] = True
            i = j + 1
        else:
            i += 1
    points = []
    for i in range(n):
        if in_plateau[i]:
            continue
        left = g[i - 1] if i > 0 else np.inf
        right = g[i + 1] if i < n - 1 else np.inf
        if not (g[i] <= left and g[i] <= right) or (g[i] == left and g[i] == right):
            continue
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
        res = minimize_scalar(dist, bounds=(lo, hi), method="bounded",
                              options={"xatol": xatol, "maxiter": 500})
        cands = [(float(res.fun), float(res.x)), (float(g[i]), float(grid[i]))]
        for end in (0, n - 1):
            if i == end or abs(i - end) == 1:
                cands.append((float(g[end]), float(grid[end])))
        val, t = min(cands)
        if val < tol:
            if t < 10 * xatol:
                t = 0.0
            elif t > 1 - 10 * xatol:
                t = 1.0
            points.append(t)
    points.sort()
    merged = []
    for t in points:
        if merged and abs(t - merged[-1]) < 1e-8:
            continue
        merged.append(t)
    return merged, plateaus


def _eigenvalue_zeros(path, ss, X, tol, merge=1e-8):
    """Zeros of the sorted eigenvalue curves ``X[:, k]`` sampled on ``ss``.

    Sign changes across a grid cell are refined by Brent's method; grid
    values inside ``(-tol, tol)`` are zeros themselves, and runs of such
    values form plateaus.  Returns ``(points, plateaus)``.
    """
    n = len(ss)
    small = np.abs(X) < tol
    plateaus, roots = [], []
    for k in range(X.shape[1]):
        i = 0
        while i < n:
            if small[i, k] and i + 1 < n and small[i + 1, k]:
                j = i
                while j + 1 < n and small[j + 1, k]:
                    j += 1
                plateaus.append((float(ss[max(i - 1, 0)]), float(ss[min(j + 1, n - 1)])))
                i = j + 1
                continue
            if small[i, k]:
                roots.append(float(ss[i]))
            elif i + 1 < n and not small[i + 1, k] and X[i, k] * X[i + 1, k] < 0:
                roots.append(brentq(lambda u: path.coordinates(u)[k], ss[i], ss[i + 1], xtol=1e-14))
            i += 1
    plateaus = _merge_intervals(plateaus)
    roots = sorted(t for t in roots if not any(lo <= t <= hi for lo, hi in plateaus))
    points = []
    for t in roots:
        if not points or t - points[-1] > merge:
            points.append(t)
    return points, plateaus


def _merge_intervals(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def sf_crossing(path: OperatorPath, grid: int = 512, h: float = 1e-5):
    """Spectral flow from local crossing data; returns ``(total, crossings)``.

    Interior regular crossings add the signature of ``P dA/ds P``; a crossing
    at ``s = 0`` adds ``-m^-`` and one at ``s = 1`` adds ``m^+``.  Crossings
    that are not regular, or where the difference quotient is unreliable,
    are evaluated by :func:`sf_partition` on a small interval around them
    and flagged with ``fallback=True``.
    """
    if path.kind != HERMITIAN:
        raise ValueError("sf_crossing handles hermitian paths only")
    ss = np.linspace(0.0, 1.0, grid + 1)
    ds = ss[1] - ss[0]
    X = np.array([path.coordinates(s) for s in ss])
    kernel_tol = 1e-6 * max(1.0, float(np.abs(X).max()))
    points, plateaus = _eigenvalue_zeros(path, ss, X, kernel_tol)

    def GA(s):
        G = path.gram(s)
        A = path(s)
        return A if G is None else G @ A

    def partition_piece(lo, hi):
        return sf_partition(path.restrict(lo, hi))[0]

    records = []
    for lo, hi in plateaus:
        contrib = partition_piece(lo, hi)
        records.append(CrossingRecordSF(0.5 * (lo + hi), -1, None, (0, 0, 0), contrib, True))
    for k, t in enumerate(points):
        w, v = _eigh(path(t), path.gram(t))
        ker = np.abs(w) < kernel_tol
        V = v[:, ker]
        D, mismatch = richardson_derivative(GA, t, h)
        B = V.conj().T @ D @ V
        B = 0.5 * (B + B.conj().T)
        bw = np.linalg.eigvalsh(B)
        bscale = max(1.0, float(np.abs(bw).max()) if bw.size else 1.0)
        regular = bw.size > 0 and np.abs(bw).min() > zero_band(bscale) * 1e2 and mismatch < 1e-4
        mp = int(np.count_nonzero(bw > 0))
        mm = int(np.count_nonzero(bw < 0))
        if regular:
            if t == 0.0:
                contrib = -mm
            elif t == 1.0:
                contrib = mp
            else:
                contrib = mp - mm
            records.append(CrossingRecordSF(t, int(ker.sum()), B, (mp, 0, mm), contrib))
            continue
        left = points[k - 1] if k > 0 else -np.inf
        right = points[k + 1] if k + 1 < len(points) else np.inf
        delta = min(ds, 0.5 * (t - left), 0.5 * (right - t))
        lo, hi = max(0.0, t - delta), min(1.0, t + delta)
        contrib = partition_piece(lo, hi)
        records.append(CrossingRecordSF(t, int(ker.sum()), B, (mp, bw.size - mp - mm, mm), contrib, True))
    records.sort(key=lambda r: r.t)
    return int(sum(r.contribution for r in records)), records
