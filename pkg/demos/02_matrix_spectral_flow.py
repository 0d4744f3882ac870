"""Spectral flow of matrix paths by three independent methods.

The partition method counts negative eigenvalues at the ends of short
segments, the tracking oracle follows matched eigenvalues and the crossing
method sums signatures of derivatives at kernel points.  For Hermitian paths
all three must also equal the change of the negative index.
"""

import numpy as np

from flowindex.bvp1d import track_flow
from flowindex.specflow import HERMITIAN, UNITARY, OperatorPath, sf_crossing, sf_partition

rng = np.random.default_rng(7)
n = 6


def herm(scale):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


H0, C, S = herm(1.0), herm(1.0), herm(1.0)


def f(s):
    return H0 + np.cos(2 * np.pi * s) * C + np.sin(2 * np.pi * s) * S + 3 * s * np.eye(n)


path = OperatorPath(n, HERMITIAN, f)
total, comp = sf_partition(path)
print("partition:", total, "over", len(comp.segment_terms), "segments")
print("tracking: ", track_flow(lambda s: np.linalg.eigvalsh(f(s)), cap=None).total)
print("crossings:", sf_crossing(path)[0])
neg = [int((np.linalg.eigvalsh(f(s)) < 0).sum()) for s in (0.0, 1.0)]
print("negative index at the ends:", neg, "->", neg[0] - neg[1])

# the two conventions for kernels at the ends differ by the change of nullity
g = OperatorPath(1, HERMITIAN, lambda s: np.array([[s]]))
print("A_s = s: flow", sf_partition(g)[0], "with kernel non-negative,",
      sf_partition(g, orientation=-1)[0], "with kernel negative")

# unitary paths cross 1 upwards when the argument increases through 0
u = OperatorPath(1, UNITARY, lambda s: np.array([[np.exp(1j * (2 * np.pi * s - np.pi))]]))
print("e^{i(2 pi s - pi)}: flow", sf_partition(u)[0])
