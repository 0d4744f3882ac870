import numpy as np
import pytest
import scipy.linalg as sla

from conftest import random_hermitian, random_unitary
from flowindex.bvp1d import (
    AffinePotential,
    FirstOrderSystem,
    FixedBoundary,
    FramesBoundary,
    GeneratorBoundary,
    PhaseBoundary,
    SampledPotential,
    Scenario,
    SplitBoundary,
    TrigPotential,
    boundary_symplectic,
    cauchy_data,
    cauchy_gap_profile,
    eigenvalue_condition,
    eigenvalues_in_window,
    fd_eigenvalues,
    periodic,
    perturbation_flow,
    phase_eigenvalues,
    sf_oracle,
    spectral_flow,
    symplectic_defect,
    transfer_matrices,
    transfer_matrix,
    ucp_certificate,
    ucp_check,
)
from flowindex.bvp1d.potentials import shifted
from flowindex.bvp1d.spectrum import WindowEdgeError
from flowindex.harness.catalog import SIGMA_1, SIGMA_J, catalog_scenario, random_scenario
from flowindex.sympcore import SubspaceFrame, is_lagrangian

FLAT = FirstOrderSystem(SIGMA_1, AffinePotential([[0.0]], [[0.0]]))


def trig_system(rng, m, harmonics=2, sigma=None):
    if sigma is None:
        d = rng.uniform(0.7, 1.5, size=m) * rng.choice([-1, 1], size=m)
        V = random_unitary(rng, m)
        sigma = 1j * (V * d) @ V.conj().T
    harm = [{"k": k, "cos": random_hermitian(rng, m, 0.5 / k ** 2),
             "sin": random_hermitian(rng, m, 0.5 / k ** 2),
             "s_cos": random_hermitian(rng, m, 0.3 / k ** 2)} for k in range(1, harmonics + 1)]
    pot = TrigPotential(random_hermitian(rng, m), random_hermitian(rng, m, 2.0), harm)
    return FirstOrderSystem(sigma, pot)


class TestPotentials:
    def test_affine(self):
        p = AffinePotential([[1.0]], [[3.0]])
        assert p(0.25, 0.7)[0, 0] == 1.5
        assert p(0.5, np.linspace(0, 1, 4)).shape == (4, 1, 1)

    def test_trig_values(self):
        base = np.diag([1.0, -1.0])
        c = np.array([[0.0, 1.0], [1.0, 0.0]])
        p = TrigPotential(base, 2 * base, [{"k": 2, "cos": c, "s_sin": base}])
        s, t = 0.3, 0.1
        expected = base + s * 2 * base + np.cos(4 * np.pi * t) * c + s * np.sin(4 * np.pi * t) * base
        np.testing.assert_allclose(p(s, t), expected, atol=1e-14)
        assert not p.t_constant

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            AffinePotential([[0, 1], [2, 0]], np.eye(2))

    def test_sampled(self, rng):
        s = [0.0, 1.0]
        t = np.linspace(0, 1, 5)
        vals = np.array([[random_hermitian(rng, 2) for _ in t] for _ in s])
        p = SampledPotential(s, t, vals)
        np.testing.assert_allclose(p(0.0, t[2]), vals[0, 2], atol=1e-12)
        np.testing.assert_allclose(p(0.5, t[1]), 0.5 * (vals[0, 1] + vals[1, 1]), atol=1e-12)
        mid = p(0.3, 0.37)
        np.testing.assert_allclose(mid, mid.conj().T, atol=1e-14)
        smooth = SampledPotential(s, t, vals, mode="pchip-entrywise")
        mid = smooth(0.6, np.array([0.1, 0.9]))
        np.testing.assert_allclose(mid, np.swapaxes(mid, -1, -2).conj(), atol=1e-14)

    def test_shifted(self):
        p = shifted(AffinePotential([[1.0]], [[3.0]]), 0.5)
        assert p(0.0, 0.0)[0, 0] == 1.5


class TestSystem:
    def test_sigma_checks(self):
        with pytest.raises(ValueError):
            FirstOrderSystem(np.eye(1), AffinePotential([[0.0]], [[0.0]]))
        with pytest.raises(ValueError):
            FirstOrderSystem(np.zeros((1, 1)), AffinePotential([[0.0]], [[0.0]]))

    def test_boundary_form(self):
        space = boundary_symplectic(SIGMA_1)
        np.testing.assert_allclose(space.J, np.diag([1j, -1j]))

    @pytest.mark.parametrize("mu", [0.0, 1.3, -7.0])
    def test_scalar_transfer(self, mu):
        system = FirstOrderSystem(SIGMA_1, AffinePotential([[2.0]], [[2.0]]))
        # -i x' + 2 x = mu x  =>  x(1) = exp(i (mu - 2)) x(0)
        exact = np.exp(1j * (mu - 2.0))
        assert abs(transfer_matrix(system, 0.5, mu)[0, 0] - exact) < 1e-9
        assert abs(transfer_matrices(system, 0.5, [mu])[0, 0, 0] - exact) < 1e-12

    def test_constant_matrix_transfer(self, rng):
        B0, B1 = random_hermitian(rng, 2), random_hermitian(rng, 2)
        system = FirstOrderSystem(SIGMA_J, AffinePotential(B0, B1))
        s, mu = 0.4, 2.5
        B = (1 - s) * B0 + s * B1
        exact = sla.expm(np.linalg.solve(SIGMA_J, mu * np.eye(2) - B))
        np.testing.assert_allclose(transfer_matrices(system, s, [mu])[0], exact, atol=1e-11)
        np.testing.assert_allclose(transfer_matrix(system, s, mu), exact, atol=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_integrators_agree(self, seed):
        rng = np.random.default_rng(seed)
        system = trig_system(rng, 1 + seed % 3)
        mus = np.array([-3.0, 0.0, 2.0])
        T = transfer_matrices(system, 0.3, mus)
        for mu, Tm in zip(mus, T):
            np.testing.assert_allclose(transfer_matrix(system, 0.3, mu), Tm, atol=1e-8)
        assert symplectic_defect(system, T) < 1e-8
        assert symplectic_defect(system, transfer_matrix(system, 0.3, 2.0)) < 1e-8

    @pytest.mark.parametrize("seed", range(10))
    def test_cauchy_lagrangian(self, seed):
        rng = np.random.default_rng(50 + seed)
        system = trig_system(rng, 1 + seed % 3)
        space = boundary_symplectic(system.sigma)
        for method in ("magnus", "rk4"):
            frame = cauchy_data(system, 0.7, 0.0, method=method)
            assert is_lagrangian(space, frame, tol=1e-8)
        with pytest.raises(ValueError):
            cauchy_data(system, 0.7, method="euler")

    def test_ucp(self):
        system = FirstOrderSystem(SIGMA_1, AffinePotential([[0.0]], [[3.0]]))
        assert ucp_check(system, 0.5)
        cert = ucp_certificate(system, np.linspace(0, 1, 5))
        # |T| = 1 for a scalar unitary transfer matrix
        assert cert["holds"] and cert["min_singular_value"] >= 1 - 1e-6
        assert cert["samples"] == 5


class TestBoundary:
    def test_phase(self):
        b = PhaseBoundary(np.pi, 3 * np.pi)
        assert b.is_loop and b.check(SIGMA_1)
        assert not PhaseBoundary(0.0, 1.0).is_loop

    def test_periodic_and_split(self):
        assert periodic(2).check(SIGMA_J)
        assert SplitBoundary(2, [0]).check(SIGMA_J)
        assert SplitBoundary(2, [0]).frame.dim == 2

    def test_non_lagrangian(self):
        with pytest.raises(ValueError):
            FixedBoundary(np.array([[1.0], [0.0]])).check(SIGMA_1)

    def test_generator_and_frames(self, rng):
        sigma = 1j * np.diag([1.0, -1.0])
        g = GeneratorBoundary(sigma, random_unitary(rng, 2), random_hermitian(rng, 2))
        assert g.check(sigma)
        f = FramesBoundary(sigma, [0.0, 1.0], [g(0.0), g(1.0)])
        assert f.check(sigma)
        assert np.allclose(f(0.0).frame @ np.linalg.pinv(f(0.0).frame) @ g(0.0).frame, g(0.0).frame)


class TestEigenvalues:
    def test_condition(self):
        b = periodic(1)(0.0)
        assert eigenvalue_condition(FLAT, 0.0, b, 0.0) < 1e-10
        assert eigenvalue_condition(FLAT, 0.0, b, np.pi) > 0.1

    @pytest.mark.parametrize("seed", range(10))
    def test_phase_closed_form(self, seed):
        rng = np.random.default_rng(seed)
        kappa = float(rng.choice([-1, 1]) * rng.uniform(0.5, 2.0))
        theta = float(rng.uniform(-np.pi, np.pi))
        a, c = rng.normal(size=2)
        pot = TrigPotential([[a]], harmonics=[{"k": 1, "cos": [[c]]}, {"k": 3, "sin": [[c]]}])
        system = FirstOrderSystem(1j * kappa * np.eye(1), pot)
        got = eigenvalues_in_window(system, 0.0, PhaseBoundary(theta)(0.0), 9.0)
        # the harmonics integrate to zero over a period
        want = phase_eigenvalues(theta, a, kappa, 9.0)
        np.testing.assert_allclose(got, want, atol=1e-8)

    def test_fd_agreement(self):
        b1 = lambda t: 1.0 + 0.5 * np.cos(2 * np.pi * t)
        b2 = lambda t: -0.5 + t
        pot = SampledPotential([0.0], np.linspace(0, 1, 2001),
                               np.array([[np.diag([b1(t), b2(t)]) for t in np.linspace(0, 1, 2001)]]),
                               mode="pchip-entrywise")
        system = FirstOrderSystem(SIGMA_J, pot)
        got = eigenvalues_in_window(system, 0.0, SplitBoundary(2, [0])(0.0), 8.0)
        want = fd_eigenvalues(b1, b2, 8.0)
        assert got.shape == want.shape
        np.testing.assert_allclose(got, want, atol=1e-6)

    def test_multiplicity(self):
        # sigma = i I_2 with zero potential and periodic condition: every 2 pi k is double
        system = FirstOrderSystem(1j * np.eye(2), AffinePotential(np.zeros((2, 2)), np.zeros((2, 2))))
        got = eigenvalues_in_window(system, 0.0, periodic(2)(0.0), 7.0)
        np.testing.assert_allclose(got, [-2 * np.pi] * 2 + [0.0] * 2 + [2 * np.pi] * 2, atol=1e-9)

    def test_empty_window(self):
        got = eigenvalues_in_window(FLAT, 0.0, PhaseBoundary(np.pi)(0.0), 1.0)
        assert got.size == 0
        with pytest.raises(ValueError):
            eigenvalues_in_window(FLAT, 0.0, PhaseBoundary(np.pi)(0.0), (1.0, 0.0))

    def test_window_edge(self):
        with pytest.raises(WindowEdgeError):
            eigenvalues_in_window(FLAT, 0.0, periodic(1)(0.0), 2 * np.pi)

    @pytest.mark.parametrize("seed", range(8))
    def test_unitary_conjugation(self, seed):
        rng = np.random.default_rng(80 + seed)
        system = trig_system(rng, 2, harmonics=1)
        U = random_unitary(rng, 2)
        frame = GeneratorBoundary(system.sigma, random_unitary(rng, 2), np.zeros((2, 2)))(0.0)
        pot = system.potential
        conj = FirstOrderSystem(U @ system.sigma @ U.conj().T,
                                lambda s, t: U @ pot(s, t) @ U.conj().T)
        moved = SubspaceFrame(sla.block_diag(U, U) @ frame.frame)
        a = eigenvalues_in_window(system, 0.2, frame, 5.0)
        b = eigenvalues_in_window(conj, 0.2, moved, 5.0)
        np.testing.assert_allclose(a, b, atol=1e-8)


class TestFlow:
    @pytest.mark.parametrize("name", ["R1", "Z1"])
    def test_scalar_catalog(self, name):
        sc = catalog_scenario(name)
        sf, comp = spectral_flow(sc)
        assert sf == sf_oracle(sc) == {"R1": 1, "Z1": 0}[name]
        assert comp.partition[0] == 0.0 and comp.partition[-1] == 1.0

    def test_window_must_be_positive(self):
        sc = catalog_scenario("R1")
        with pytest.raises(ValueError):
            Scenario(sc.system, sc.boundary, 0.0)

    def test_mismatched_boundary(self):
        with pytest.raises(ValueError):
            Scenario(FLAT, periodic(2), 1.0)

    def test_random_scenario_flow(self):
        sc = random_scenario(3)
        from flowindex.bvp1d import verify_gsff

        rep = verify_gsff(sc)
        assert rep.equal and rep.sf_oracle == rep.sf_partition

    def test_gap_profile_constant(self):
        _, inc = cauchy_gap_profile(catalog_scenario("R1"), 16)
        assert inc.shape == (16,) and inc.max() < 1e-12

    def test_rk4_cauchy(self):
        sc = catalog_scenario("P1")
        sc.step = 1e-2
        frame = sc.cauchy(0.5)
        assert is_lagrangian(boundary_symplectic(sc.system.sigma), frame, tol=1e-8)


class TestPerturbation:
    @pytest.mark.parametrize("eps", [0.5, 1.0, 3.0])
    def test_kernel_crossed(self, eps):
        # theta = -eps / 2 puts one eigenvalue at -eps / 2 in the band [-eps, 0)
        system = FirstOrderSystem(SIGMA_1, AffinePotential([[0.0]], [[0.0]]))
        assert perturbation_flow(system, 0.0, PhaseBoundary(-eps / 2)(0.0), eps) == (1, 1)

    def test_no_kernel(self):
        assert perturbation_flow(FLAT, 0.0, PhaseBoundary(1.0)(0.0), 0.5) == (0, 0)

    def test_periodic_kernel_at_zero(self):
        # the eigenvalue 0 itself moves up and out of the band, so it does not count
        sc = catalog_scenario("P1")
        assert perturbation_flow(sc.system, 0.0, sc.boundary(0.0), 1.0) == (0, 0)

    def test_jacobi(self):
        sc = catalog_scenario("J1")
        frame = sc.boundary(0.0)
        assert perturbation_flow(sc.system, 0.3, frame, 0.2) == (0, 0)
        s = (np.pi - 0.25) / 4
        assert perturbation_flow(sc.system, s, frame, 0.5) == (1, 1)

    def test_eps_positive(self):
        with pytest.raises(ValueError):
            perturbation_flow(FLAT, 0.0, periodic(1)(0.0), 0.0)
