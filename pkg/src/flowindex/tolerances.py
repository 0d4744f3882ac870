"""Numerical tolerances shared by every module.

Rank and zero decisions all go through the helpers here.  Values are read at
call time from the module-level ``TOL`` object, so ``override`` (or the CLI
flags) change them everywhere at once.
"""

from contextlib import contextmanager
from dataclasses import asdict, dataclass

import numpy as np


@dataclass
class Tolerances:
    num: float = 1e-9
    rank_rel: float = 1e-8
    rank_abs: float = 1e-12
    zero_rel: float = 1e-8
    pd: float = 1e-12

    def as_dict(self):
        return asdict(self)


TOL = Tolerances()


@contextmanager
def override(**values):
    """Temporarily change tolerances, e.g. ``with override(zero_rel=1e-6): ...``."""
    old = TOL.as_dict()
    for key, val in values.items():
        if not hasattr(TOL, key):
            raise AttributeError(f"unknown tolerance {key!r}")
        setattr(TOL, key, float(val))
    try:
        yield TOL
    finally:
        for key, val in old.items():
            setattr(TOL, key, val)


def rank_threshold(svals) -> float:
    """Singular values at or below this value are treated as zero."""
    svals = np.asarray(svals)
    top = float(svals.max()) if svals.size else 0.0
    return max(TOL.rank_rel * top, TOL.rank_abs)


def numerical_rank(mat) -> int:
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.count_nonzero(s > rank_threshold(s)))


def zero_band(scale) -> float:
    """Half-width of the band around zero in which eigenvalues count as zero."""
    return max(TOL.zero_rel * float(scale), TOL.rank_abs)
