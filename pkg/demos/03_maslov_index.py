"""Maslov index of a pair of Lagrangian paths by three engines.

``lam_s = span(1, e^{i theta_s})`` in C^2 rotates once against the fixed
line ``span(1, 1)``.  The unitary reduction, the crossing-form sum and the
winding number of the generator determinant all give -1; running twice as
fast gives -2.
"""

import numpy as np

from flowindex.maslov import (
    LagrangianPath,
    SymplecticFamily,
    crossing_form_Q,
    maslov_index,
    maslov_via_crossings,
    winding_oracle,
)
from flowindex.sympcore import SubspaceFrame, SymplecticSpace

space = SymplecticSpace.standard(np.diag([1j, -1j]))
family = SymplecticFamily.constant(space)
mu = LagrangianPath.constant(SubspaceFrame.span([1, 1]))

for turns in (1, 2):
    lam = LagrangianPath(lambda s, k=turns: SubspaceFrame.span([1, np.exp(1j * (np.pi + 2 * np.pi * k * s))]))
    mas, _ = maslov_index(lam, mu, family)
    cross, records = maslov_via_crossings(lam, mu, family, return_records=True)
    wind = winding_oracle(lam, mu(0.0), space)
    print(f"{turns} turn(s): unitary {mas}, crossings {cross} at t = "
          f"{[round(r.t, 6) for r in records]}, winding {wind}")

# the crossing form at s = 1/2 evaluated on u = (1, 1), with two different complements
lam = LagrangianPath(lambda s: SubspaceFrame.span([1, np.exp(1j * (np.pi + 2 * np.pi * s))]))
u = np.array([[1.0], [1.0]])
for w in ([1, -1], [1, 1j]):
    Q = crossing_form_Q(lam, 0.5, SubspaceFrame.span(w), family, basis=u)
    print(f"Q(u, u) with complement span{tuple(w)}: {Q[0, 0].real:.9f}  (-2 pi = {-2 * np.pi:.9f})")

# the index only depends on the symplectic form, not on the inner product used to compute it
omega = space.gram @ space.J
bent = SymplecticFamily.from_form(omega, lambda s: np.eye(2) + np.sin(np.pi * s) * np.array([[1, 0.5], [0.5, 2]]))
print("with a varying inner product:", maslov_index(lam, mu, bent)[0])
