import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import omega_defect, random_space, random_unitary
from flowindex.sympcore import (
    SubspaceFrame,
    SymplecticSpace,
    annihilator,
    classify,
    contains,
    fredholm_index,
    gap_distance,
    intersection,
    intersection_dim,
    is_lagrangian,
    lagrangian_to_unitary,
    projector,
    quotient_gap,
    same_span,
    subspace_sum,
    unitary_to_lagrangian,
)

C2 = SymplecticSpace(np.eye(2), np.diag([1j, -1j]))
seeds = st.integers(0, 2 ** 32 - 1)


def line(theta):
    return SubspaceFrame(np.array([1.0, np.exp(1j * theta)]))


class TestSpaces:
    def test_rejects_indefinite_gram(self):
        with pytest.raises(ValueError):
            SymplecticSpace(np.diag([1.0, -1.0]), np.diag([1j, -1j]))

    def test_rejects_non_skew_J(self):
        with pytest.raises(ValueError):
            SymplecticSpace(np.eye(2), np.diag([1.0, 1j]))

    def test_rejects_singular_J(self):
        with pytest.raises(ValueError):
            SymplecticSpace(np.eye(2), np.diag([1j, 0.0]))

    def test_rank_deficient_frame(self):
        with pytest.raises(ValueError):
            SubspaceFrame(np.array([[1.0, 2.0], [1.0, 2.0]]))

    def test_zero_and_full_frames(self):
        assert SubspaceFrame.zero(3).dim == 0
        assert SubspaceFrame.full(3).dim == 3


class TestAnnihilator:
    def test_zero_subspace(self):
        assert annihilator(C2, SubspaceFrame.zero(2)).dim == 2

    def test_diagonal_line(self):
        ann = annihilator(C2, SubspaceFrame.span([1, 1]))
        # null space of y -> omega((1, 1), y) solved by hand: y0 = y1
        assert same_span(ann, SubspaceFrame.span([1, 1]))

    def test_full_space(self):
        assert annihilator(C2, SubspaceFrame.full(2)).dim == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            annihilator(C2, SubspaceFrame.span([1, 0, 0]))

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, n=st.integers(2, 8), k=st.integers(0, 8))
    def test_double_annihilator(self, seed, n, k):
        rng = np.random.default_rng(seed)
        k = min(k, n)
        space = random_space(rng, n)
        lam = SubspaceFrame(rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k)))
        ann = annihilator(space, lam)
        assert ann.dim == n - k
        assert same_span(annihilator(space, ann), lam, tol=1e-7)


class TestClassify:
    def test_zero_is_isotropic(self):
        assert classify(C2, SubspaceFrame.zero(2)) == "isotropic"

    @pytest.mark.parametrize("theta", [0.0, 0.3, np.pi, 5.0])
    def test_phase_lines_are_lagrangian(self, theta):
        assert classify(C2, line(theta)) == "lagrangian"
        # omega((a, e a), (c, e c)) = i a c* - i |e|^2 a c* = 0
        assert abs(C2.omega(line(theta).frame[:, 0], line(theta).frame[:, 0])) < 1e-14

    def test_full_space_is_coisotropic(self):
        assert classify(C2, SubspaceFrame.full(2)) == "coisotropic"

    def test_non_lagrangian_line(self):
        assert classify(C2, SubspaceFrame.span([1, 0])) == "none"

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, k=st.integers(1, 6))
    def test_lagrangians_have_half_dimension(self, seed, k):
        rng = np.random.default_rng(seed)
        space = random_space(rng, 2 * k)
        lam = unitary_to_lagrangian(space, random_unitary(rng, k))
        assert lam.dim == k
        assert omega_defect(space, lam.frame) < 1e-9
        assert classify(space, lam) == "lagrangian"
        assert is_lagrangian(space, lam)


class TestFredholm:
    def test_equal_lagrangians(self):
        assert fredholm_index(line(0.2), line(0.2)) == 0

    def test_transversal(self):
        assert fredholm_index(line(0.0), line(np.pi)) == 0

    def test_lines_in_c3(self):
        e1 = SubspaceFrame.span([1, 0, 0])
        # intersection is the line, the sum has codimension 2 in C^3
        assert fredholm_index(e1, e1) == 1 - 2

    def test_unequal_dimensions(self):
        e1 = SubspaceFrame.span([1, 0, 0])
        plane = SubspaceFrame(np.eye(3)[:, 1:])
        # transversal line and plane span C^3: 0 - 0; two lines: 0 - 1
        assert fredholm_index(e1, plane) == 0
        assert fredholm_index(e1, SubspaceFrame.span([0, 1, 0])) == -1


class TestGenerators:
    def test_diagonal_line(self):
        g = lagrangian_to_unitary(C2, SubspaceFrame.span([1, 1]))
        np.testing.assert_allclose(g.U, [[1.0]], atol=1e-14)

    @pytest.mark.parametrize("theta", [0.1, 1.0, 3.0, -2.0])
    def test_phase_line(self, theta):
        g = lagrangian_to_unitary(C2, line(theta))
        np.testing.assert_allclose(g.U, [[np.exp(1j * theta)]], atol=1e-14)

    def test_rejects_non_lagrangian(self):
        with pytest.raises(ValueError):
            lagrangian_to_unitary(C2, SubspaceFrame.span([1, 0]))

    def test_rejects_non_unitary_generator(self):
        with pytest.raises(ValueError):
            unitary_to_lagrangian(C2, np.array([[2.0]]))

    @pytest.mark.parametrize("seed", range(100))
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        k = 1 + seed % 6
        space = random_space(rng, 2 * k)
        U = random_unitary(rng, k)
        lam = unitary_to_lagrangian(space, U)
        np.testing.assert_allclose(lagrangian_to_unitary(space, lam).U, U, atol=1e-8)
        again = unitary_to_lagrangian(space, lagrangian_to_unitary(space, lam))
        assert same_span(again, lam, space.gram)


class TestIntersection:
    def test_equal(self):
        assert intersection_dim(C2, line(1.0), line(1.0)) == 1

    def test_transversal(self):
        assert intersection_dim(C2, SubspaceFrame.span([1, 1]), SubspaceFrame.span([1, -1])) == 0

    @pytest.mark.parametrize("theta,expected", [(0.5, 0), (2 * np.pi, 1), (-4 * np.pi, 1), (np.pi, 0)])
    def test_phase_against_diagonal(self, theta, expected):
        assert intersection_dim(C2, line(theta), SubspaceFrame.span([1, 1])) == expected

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_rank_count(self, seed):
        rng = np.random.default_rng(1000 + seed)
        k = 1 + seed % 5
        space = random_space(rng, 2 * k)
        U = random_unitary(rng, k)
        # force a common subspace of dimension r by sharing eigenvectors with eigenvalue 1
        r = seed % (k + 1)
        Q = random_unitary(rng, k)
        phases = np.exp(1j * rng.uniform(0.5, 5.5, size=k))
        phases[:r] = 1.0
        V = Q @ np.diag(phases) @ Q.conj().T @ U
        lam, mu = unitary_to_lagrangian(space, V), unitary_to_lagrangian(space, U)
        direct = 2 * k - np.linalg.matrix_rank(np.hstack([lam.frame, mu.frame]), tol=1e-8)
        assert direct == r
        assert intersection_dim(space, lam, mu) == r
        assert intersection(lam, mu).dim == r


class TestGap:
    def test_equal(self):
        assert gap_distance(line(0.4), line(0.4)) < 1e-14

    def test_orthogonal_lines(self):
        assert gap_distance(SubspaceFrame.span([1, 0]), SubspaceFrame.span([0, 1])) == pytest.approx(1.0)

    @pytest.mark.parametrize("t", [0.0, 0.1, 0.7, 1.5, 3.0])
    def test_principal_angle(self, t):
        d = gap_distance(SubspaceFrame.span([1, 0]), SubspaceFrame.span([np.cos(t), np.sin(t)]))
        assert d == pytest.approx(abs(np.sin(t)), abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, n=st.integers(2, 7))
    def test_metric_properties(self, seed, n):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, n))
        M, N, K = (SubspaceFrame(rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))) for _ in range(3))
        dMN, dNK, dMK = gap_distance(M, N), gap_distance(N, K), gap_distance(M, K)
        assert 0.0 <= dMN <= 1.0 + 1e-12
        assert dMK <= dMN + dNK + 1e-12
        assert abs(dMN - gap_distance(N, M)) < 1e-12
        perp = [SubspaceFrame(sla.null_space(X.frame.conj().T)) for X in (M, N)]
        assert abs(dMN - gap_distance(*perp)) < 1e-10

    def test_gram_aware_projector(self, rng):
        from conftest import random_gram

        G = random_gram(rng, 4)
        sub = SubspaceFrame(rng.normal(size=(4, 2)))
        P = projector(sub, G)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_allclose(G @ P, (G @ P).conj().T, atol=1e-12)


class TestQuotientGap:
    def test_equal(self):
        D = SubspaceFrame(np.eye(3)[:, :2])
        assert quotient_gap(D, D, SubspaceFrame.span([1, 0, 0])) < 1e-14

    def test_trivial_quotient(self, rng):
        D1 = SubspaceFrame(rng.normal(size=(4, 2)))
        D2 = SubspaceFrame(rng.normal(size=(4, 2)))
        assert quotient_gap(D1, D2, SubspaceFrame.zero(4)) == pytest.approx(gap_distance(D1, D2))

    def test_coordinate_planes(self):
        e = np.eye(3)
        D1 = SubspaceFrame(e[:, [0, 1]])
        D2 = SubspaceFrame(e[:, [0, 2]])
        assert quotient_gap(D1, D2, SubspaceFrame.span(e[:, 0])) == pytest.approx(1.0)

    def test_containment_violation(self):
        e = np.eye(3)
        with pytest.raises(ValueError):
            quotient_gap(SubspaceFrame(e[:, [0, 1]]), SubspaceFrame(e[:, [1, 2]]), SubspaceFrame.span(e[:, 0]))


def test_sum_and_contains(rng):
    a = SubspaceFrame(rng.normal(size=(5, 2)))
    b = SubspaceFrame(rng.normal(size=(5, 2)))
    s = subspace_sum(a, b)
    assert s.dim == 4
    assert contains(s, a) and contains(s, b)
