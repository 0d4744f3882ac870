"""Lagrangian subspaces, their unitary generators and the gap metric.

Run with ``python demos/01_symplectic_subspaces.py``.
"""

import numpy as np

from flowindex.sympcore import (
    SubspaceFrame,
    SymplecticSpace,
    classify,
    fredholm_index,
    gap_distance,
    intersection_dim,
    lagrangian_to_unitary,
    unitary_to_lagrangian,
)

# C^2 with omega(x, y) = i x0 conj(y0) - i x1 conj(y1)
space = SymplecticSpace.standard(np.diag([1j, -1j]))

# a line span(1, z) is Lagrangian exactly when |z| = 1
for z in (1.0, np.exp(0.4j), 2.0):
    print(f"span(1, {z:.3g}) is {classify(space, SubspaceFrame.span([1, z]))}")

# every Lagrangian is the graph of a unitary generator, and back
lam = SubspaceFrame.span([1, np.exp(0.4j)])
U = lagrangian_to_unitary(space, lam).U
print("generator:", np.round(U, 6), " round trip gap:",
      gap_distance(lam, unitary_to_lagrangian(space, U)))

# two Lagrangians meet where U V^{-1} has eigenvalue 1
mu = SubspaceFrame.span([1, 1])
print("dim(lam ∩ mu) =", intersection_dim(space, lam, mu),
      "  dim(mu ∩ mu) =", intersection_dim(space, mu, mu))

# the gap metric is the norm of the difference of orthogonal projections
for angle in (0.0, 0.1, 1.0, np.pi):
    other = SubspaceFrame.span([1, np.exp(1j * (0.4 + angle))])
    print(f"gap after rotating by {angle:.2f}: {gap_distance(lam, other):.6f}")

# a Fredholm pair in C^3: index = dim of intersection - codim of sum
e1 = SubspaceFrame.span([1, 0, 0])
plane = SubspaceFrame.span([1, 0, 0], [0, 1, 0])
print("index(e1, e1) =", fredholm_index(e1, e1), "  index(e1, plane) =", fredholm_index(e1, plane))
