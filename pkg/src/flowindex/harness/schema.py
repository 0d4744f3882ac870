"""Scenario and path files: parsing with field-level diagnostics."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..bvp1d.boundary import (
    FixedBoundary,
    FramesBoundary,
    GeneratorBoundary,
    PhaseBoundary,
    SplitBoundary,
    periodic,
)
from ..bvp1d.flow import Scenario
from ..bvp1d.potentials import AffinePotential, SampledPotential, TrigPotential, interpolate_hermitian
from ..bvp1d.system import FirstOrderSystem
from ..maslov import GeodesicLagrangianPath, LagrangianPath, unitary_power
from ..specflow import HERMITIAN, UNITARY, OperatorPath
from ..sympcore import SymplecticSpace
from .report import to_jsonable


class SchemaError(ValueError):
    """Invalid input file; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def load_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(str(path), f"cannot read file ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _require(obj, key, where):
    if not isinstance(obj, dict):
        raise SchemaError(where, "expected an object")
    if key not in obj:
        raise SchemaError(f"{where}.{key}" if where else key, "missing field")
    return obj[key]


def matrix(value, field, ndim=2):
    """Array of rank ``ndim`` whose entries are numbers or ``[re, im]`` pairs."""
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(field, "entries must be numbers or [re, im] pairs") from exc
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == ndim:
        return arr.astype(complex)
    raise SchemaError(field, f"expected a rank-{ndim} array (complex entries as [re, im]), got shape {arr.shape}")


def _number(obj, key, where, default=None, kind=float):
    if key not in obj:
        if default is None:
            raise SchemaError(f"{where}.{key}", "missing field")
        return default
    try:
        return kind(obj[key])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}.{key}", f"expected {kind.__name__}") from exc


def parse_potential(obj, m, where="potential"):
    kind = _require(obj, "type", where)
    try:
        if kind == "affine":
            v0 = matrix(_require(obj, "v0", where), f"{where}.v0")
            v1 = matrix(obj.get("v1", obj["v0"]), f"{where}.v1")
            pot = AffinePotential(v0, v1)
        elif kind == "trig":
            base = matrix(_require(obj, "base", where), f"{where}.base")
            slope = matrix(obj["slope"], f"{where}.slope") if "slope" in obj else None
            harmonics = []
            for i, h in enumerate(obj.get("harmonics", [])):
                hw = f"{where}.harmonics[{i}]"
                entry = {"k": _number(h, "k", hw, kind=int)}
                for key in ("cos", "sin", "s_cos", "s_sin"):
                    if key in h:
                        entry[key] = matrix(h[key], f"{hw}.{key}")
                harmonics.append(entry)
            pot = TrigPotential(base, slope, harmonics)
        elif kind == "sampled":
            s = np.asarray(_require(obj, "s", where), dtype=float)
            t = np.asarray(_require(obj, "t", where), dtype=float)
            vals = matrix(_require(obj, "values", where), f"{where}.values", ndim=4)
            pot = SampledPotential(s, t, vals, obj.get("mode", "linear"))
        else:
            raise SchemaError(f"{where}.type", f"unknown potential type {kind!r}")
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from exc
    if pot.m != m:
        raise SchemaError(where, f"potential is {pot.m}x{pot.m} but m={m}")
    return pot


def parse_boundary(obj, sigma, where="boundary"):
    kind = _require(obj, "type", where)
    m = sigma.shape[0]
    try:
        if kind == "phase":
            if m != 1:
                raise SchemaError(f"{where}.type", "phase boundary needs m=1")
            return PhaseBoundary(_number(obj, "theta0", where), _number(obj, "theta1", where, obj.get("theta0")))
        if kind == "periodic":
            return periodic(m)
        if kind == "fixed":
            return FixedBoundary(matrix(_require(obj, "frame", where), f"{where}.frame"))
        if kind == "split":
            return SplitBoundary(m, _require(obj, "zero", where))
        if kind == "generator":
            return GeneratorBoundary(sigma, matrix(_require(obj, "U0", where), f"{where}.U0"),
                                     matrix(_require(obj, "H", where), f"{where}.H"))
        if kind == "frames":
            frames = matrix(_require(obj, "frames", where), f"{where}.frames", ndim=3)
            return FramesBoundary(sigma, _require(obj, "s", where), list(frames))
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from exc
    raise SchemaError(f"{where}.type", f"unknown boundary type {kind!r}")


def parse_scenario(obj, label=None) -> Scenario:
    m = _number(obj, "m", "", kind=int)
    sigma = matrix(_require(obj, "sigma", ""), "sigma")
    if sigma.shape != (m, m):
        raise SchemaError("sigma", f"expected {m}x{m}, got {sigma.shape}")
    try:
        system = FirstOrderSystem(sigma, parse_potential(_require(obj, "potential", ""), m),
                                  obj.get("smoothness_hint"))
        system.check_hermitian()
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError("sigma", str(exc)) from exc
    boundary = parse_boundary(_require(obj, "boundary", ""), sigma)
    try:
        boundary.check(sigma)
    except ValueError as exc:
        raise SchemaError("boundary", str(exc)) from exc
    window = _number(obj, "window", "")
    if window <= 0:
        raise SchemaError("window", "must be positive")
    return Scenario(
        system=system,
        boundary=boundary,
        window=window,
        s_samples=_number(obj, "s_samples", "", 256, int),
        seed=obj.get("seed"),
        label=label or obj.get("label", ""),
        sample_hint=_number(obj, "sample_hint", "", 16, int),
        source=obj,
    )


def scenario_to_dict(sc: Scenario) -> dict:
    out = {
        "label": sc.label,
        "m": sc.system.m,
        "sigma": sc.system.sigma,
        "potential": sc.system.potential.to_dict(),
        "boundary": sc.boundary.to_dict(),
        "window": sc.window,
        "s_samples": sc.s_samples,
        "sample_hint": sc.sample_hint,
        "seed": sc.seed,
    }
    return to_jsonable(out)


def parse_matrix_path(obj) -> OperatorPath:
    """Sampled matrix path: ``{"kind", "s", "matrices", "mode", "gram"?, "sample_hint"?}``."""
    kind = obj.get("kind", HERMITIAN)
    if kind not in (HERMITIAN, UNITARY):
        raise SchemaError("kind", "must be 'hermitian' or 'unitary'")
    s = np.asarray(_require(obj, "s", ""), dtype=float)
    mats = matrix(_require(obj, "matrices", ""), "matrices", ndim=3)
    if len(s) != len(mats):
        raise SchemaError("matrices", "need one matrix per s knot")
    if len(s) < 1 or np.any(np.diff(s) <= 0) or s[0] != 0.0 or s[-1] != 1.0:
        raise SchemaError("s", "knots must increase from 0 to 1")
    mode = obj.get("mode", "linear")
    if mode not in ("linear", "pchip-entrywise"):
        raise SchemaError("mode", f"unknown interpolation mode {mode!r}")
    n = mats.shape[1]
    gram = None
    if "gram" in obj:
        grams = matrix(obj["gram"], "gram", ndim=3)
        if grams.shape != mats.shape:
            raise SchemaError("gram", "need one Gram matrix per knot, same size as the matrices")
        gram = interpolate_hermitian(s, grams, mode) if len(s) > 1 else (lambda u: grams[0])
    if len(s) == 1:
        def ev(u):
            return mats[0]
    elif kind == UNITARY:
        steps = [np.linalg.solve(a, b) for a, b in zip(mats[:-1], mats[1:])]

        def ev(u):
            k = min(int(np.searchsorted(s, u, side="right") - 1), len(s) - 2)
            tau = (u - s[k]) / (s[k + 1] - s[k])
            return mats[k] @ unitary_power(steps[k], tau)
    else:
        f = interpolate_hermitian(s, mats, mode)

        def ev(u):
            if gram is None:
                return f(u)
            # samples hold G A; return A so that it is self-adjoint for G
            return np.linalg.solve(gram(u), f(u))
    return OperatorPath(n, kind, ev, gram, int(obj.get("sample_hint", 64)))


def parse_lagrangian_pair(obj):
    """``{"gram"?, "J", "lambda": {"s", "frames"}, "mu": {...}}`` -> (lam, mu, space)."""
    J = matrix(_require(obj, "J", ""), "J")
    gram = matrix(obj["gram"], "gram") if "gram" in obj else np.eye(J.shape[0])
    try:
        space = SymplecticSpace(gram, J)
    except ValueError as exc:
        raise SchemaError("J", str(exc)) from exc
    paths = []
    for key in ("lambda", "mu"):
        part = _require(obj, key, "")
        frames = matrix(_require(part, "frames", key), f"{key}.frames", ndim=3)
        try:
            paths.append(GeodesicLagrangianPath(space, _require(part, "s", key), list(frames)))
        except ValueError as exc:
            raise SchemaError(key, str(exc)) from exc
    return paths[0], paths[1], space


__all__ = [
    "SchemaError",
    "load_json",
    "parse_scenario",
    "parse_matrix_path",
    "parse_lagrangian_pair",
    "scenario_to_dict",
    "LagrangianPath",
]
