"""Spectral flow of first-order boundary value problems and the Cauchy data.

For ``A_s = sigma d/dt + B(s, t)`` on [0, 1] with boundary Lagrangians
``L_s``, the spectral flow of the operators equals minus the Maslov index of
``L_s`` against the Cauchy data of ``A_s x = 0``.  The built-in catalog covers
a rotating boundary phase, a potential shift, a Jacobi-type system, a
constant family and a doubled loop.
"""

import numpy as np

from flowindex.bvp1d import (
    AffinePotential,
    FirstOrderSystem,
    PhaseBoundary,
    cauchy_gap_profile,
    eigenvalues_in_window,
    perturbation_flow,
    phase_eigenvalues,
    verify_gsff,
)
from flowindex.harness.catalog import CATALOG, SIGMA_1, catalog_scenario, random_scenario

# shooting against the closed form for -i d/dt with x(1) = e^{i theta} x(0)
system = FirstOrderSystem(SIGMA_1, AffinePotential([[0.0]], [[0.0]]))
frame = PhaseBoundary(0.3)(0.0)
print("shooting:   ", np.round(eigenvalues_in_window(system, 0.0, frame, 10.0), 10))
print("closed form:", np.round(phase_eigenvalues(0.3, 0.0, -1.0, 10.0), 10))

print("\nscenario  SF  oracle  Mas  equal")
for name in sorted(CATALOG):
    rep = verify_gsff(catalog_scenario(name))
    print(f"{name:8s} {rep.sf_partition:3d} {rep.sf_oracle:6d} {rep.maslov_partition:4d}  {rep.equal}")

rep = verify_gsff(random_scenario(11), crossings=True)
print(f"random seed 11: SF {rep.sf_partition}, Mas {rep.maslov_partition}, "
      f"by crossings {rep.maslov_crossings}, equal {rep.equal}")

# shifting A by a in [0, eps] sweeps the eigenvalues of A in [-eps, 0) through zero
for theta, eps in ((-0.25, 0.5), (1.0, 0.5)):
    print(f"theta = {theta}: perturbation flow and kernel count",
          perturbation_flow(system, 0.0, PhaseBoundary(theta)(0.0), eps))

# continuity of the Cauchy data: doubling the s-grid halves the largest step
sc = catalog_scenario("J1")
for n in (32, 64, 128):
    print(f"J1 with {n} steps: largest Cauchy gap increment {cauchy_gap_profile(sc, n)[1].max():.3e}")
