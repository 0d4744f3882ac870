import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_gram, random_hermitian, random_unitary
from flowindex.bvp1d.flow import track_flow
from flowindex.specflow import (
    HERMITIAN,
    UNITARY,
    NonConvergenceError,
    OperatorPath,
    WindowCollisionError,
    aps_projection,
    contour_projection,
    hyperbolic_nullity,
    partition_flow,
    riesz_transform,
    sf_crossing,
    sf_partition,
    spectral_decomposition,
    spectral_projection,
)
from flowindex.tolerances import zero_band

seeds = st.integers(0, 2 ** 32 - 1)


def herm_path(f, n, **kw):
    return OperatorPath(n, HERMITIAN, f, **kw)


def trig_path(rng, n, harmonics=3, scale=1.0):
    """``H0 + sum_k C_k cos(2 pi k s) + S_k sin(2 pi k s)`` with random Hermitian coefficients."""
    H0 = random_hermitian(rng, n, scale)
    terms = [(k, random_hermitian(rng, n, scale / k), random_hermitian(rng, n, scale / k))
             for k in range(1, harmonics + 1)]

    def f(s):
        out = H0.copy()
        for k, C, S in terms:
            out = out + np.cos(2 * np.pi * k * s) * C + np.sin(2 * np.pi * k * s) * S
        return out

    return f


def morse(A):
    w = np.linalg.eigvalsh(A)
    return int(np.count_nonzero(w < -zero_band(max(1.0, np.abs(w).max()))))


def endpoint_oracle(f):
    """Finite-dimensional spectral flow from the negative indices at the ends."""
    return morse(f(0.0)) - morse(f(1.0))


def tracking_oracle(f):
    return track_flow(lambda s: np.linalg.eigvalsh(f(s)), cap=None).total


def zero_at_end(f, end, count, rng):
    """Subtract a rank-``count`` correction vanishing at the other end so ``f(end)`` has a kernel."""
    w, V = np.linalg.eigh(f(end))
    idx = rng.choice(len(w), size=count, replace=False)
    K = (V[:, idx] * w[idx]) @ V[:, idx].conj().T

    def g(s):
        weight = s if end == 1.0 else 1.0 - s
        return f(s) - weight * K

    return g


class TestDecompositions:
    def test_zero_matrix(self):
        mp, mz, mm, _ = spectral_decomposition(np.zeros((3, 3)))
        assert (mp, mz, mm) == (0, 3, 0)

    def test_diagonal(self):
        mp, mz, mm, _ = spectral_decomposition(np.diag([3.0, -1.0, 0.0]))
        assert (mp, mz, mm) == (1, 1, 1)

    def test_known_spectrum(self, rng):
        Q = random_unitary(rng, 6)
        D = np.array([2.0, -3.0, 0.5, 0.0, -0.1, 4.0])
        mp, mz, mm, _ = spectral_decomposition(Q @ np.diag(D) @ Q.conj().T)
        assert (mp, mz, mm) == (3, 1, 2)

    def test_gram_aware(self, rng):
        G = random_gram(rng, 4)
        D = np.diag([1.0, -2.0, 0.0, 3.0])
        # G^{-1} D is self-adjoint for G with the same inertia as D
        mp, mz, mm, _ = spectral_decomposition(np.linalg.solve(G, D), G)
        assert (mp, mz, mm) == (2, 1, 1)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            spectral_decomposition(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestProjections:
    def test_window(self):
        P = spectral_projection(np.diag([-1.0, 0.1, 2.0]), 0.5)
        np.testing.assert_allclose(P, np.diag([0.0, 1.0, 0.0]), atol=1e-14)

    def test_everything_inside(self, rng):
        A = random_hermitian(rng, 5)
        P = spectral_projection(A, 1.0 + np.abs(np.linalg.eigvalsh(A)).max())
        np.testing.assert_allclose(P, np.eye(5), atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_interval_rank(self, seed):
        rng = np.random.default_rng(seed)
        A = random_hermitian(rng, 7)
        w = np.linalg.eigvalsh(A)
        a, b = -0.5 + 0.01 * seed, 1.3
        P = spectral_projection(A, (a, b))
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_allclose(P, P.conj().T, atol=1e-12)
        assert round(np.trace(P).real) == np.count_nonzero((w > a) & (w < b))

    def test_contour_agrees(self, rng):
        A = random_hermitian(rng, 5)
        w = np.linalg.eigvalsh(A)
        r = 0.5 * (np.sort(np.abs(w))[1] + np.sort(np.abs(w))[2])
        assert np.abs(contour_projection(A, r) - spectral_projection(A, r)).max() < 1e-6

    def test_boundary_collision(self):
        with pytest.raises(WindowCollisionError):
            spectral_projection(np.diag([0.5, 2.0]), 0.5)

    def test_aps(self):
        np.testing.assert_allclose(aps_projection(np.eye(3)), np.eye(3))
        np.testing.assert_allclose(aps_projection(-np.eye(3)), np.zeros((3, 3)))
        np.testing.assert_allclose(aps_projection(np.diag([1.0, -1.0, 0.0])), np.diag([1.0, 0.0, 1.0]), atol=1e-14)


class TestNullityAndRiesz:
    def test_invertible(self, rng):
        assert hyperbolic_nullity(np.diag([1.0, -2.0])) == 0

    def test_diagonal(self):
        assert hyperbolic_nullity(np.diag([0.0, 0.0, 5.0])) == 2

    def test_unitary(self):
        assert hyperbolic_nullity(np.diag([1.0, np.exp(1j * np.pi / 3)]), UNITARY) == 1

    def test_riesz(self, rng):
        np.testing.assert_allclose(riesz_transform(np.zeros((2, 2))), np.zeros((2, 2)))
        np.testing.assert_allclose(riesz_transform(np.eye(1)), [[1 / np.sqrt(2)]])
        A = random_hermitian(rng, 6)
        w = np.linalg.eigvalsh(A)
        np.testing.assert_allclose(np.linalg.eigvalsh(riesz_transform(A)), w / np.sqrt(1 + w ** 2), atol=1e-12)


class TestPartitionExamples:
    def test_constant(self, rng):
        A = random_hermitian(rng, 4)
        assert sf_partition(herm_path(lambda s: A, 4))[0] == 0

    def test_one_crossing(self):
        assert sf_partition(herm_path(lambda s: np.diag([2 * s - 1, 1.0]), 2))[0] == 1

    def test_unitary_rotation(self):
        path = OperatorPath(1, UNITARY, lambda s: np.array([[np.exp(1j * np.pi * (2 * s - 1))]]))
        assert sf_partition(path)[0] == 1

    def test_arriving_zero(self):
        assert sf_partition(herm_path(lambda s: np.array([[s - 1.0]]), 1))[0] == 1

    def test_departing_zero(self):
        assert sf_partition(herm_path(lambda s: np.array([[-s]]), 1))[0] == -1

    def test_record(self):
        total, comp = sf_partition(herm_path(lambda s: np.diag([2 * s - 1, 1.0]), 2))
        assert comp.partition[0] == 0.0 and comp.partition[-1] == 1.0
        assert sum(comp.segment_terms) == comp.total == total
        assert len(comp.window_radii) == len(comp.anchors) == len(comp.segment_terms)

    def test_unresolved_oscillation(self):
        # with a capped window, eigenvalues sweeping through every radius cannot be resolved
        def spectrum(s):
            return np.array([5 * np.sin(40 * np.pi / (s + 1e-2)), 5 * np.cos(37 * np.pi / (s + 1e-2))])

        with pytest.raises(NonConvergenceError) as info:
            partition_flow(spectrum, lambda x: 1e-8, cap=1.0, max_depth=6)
        lo, hi = info.value.interval
        assert 0.0 <= lo < hi <= 1.0

    def test_uncapped_matrix_path_telescopes(self):
        # without a cap the window can hold the whole spectrum, so only the ends matter
        f = lambda s: np.diag([5 * np.sin(40 * np.pi / (s + 1e-2)), 5 * np.cos(37 * np.pi / (s + 1e-2))])
        assert sf_partition(herm_path(f, 2), max_depth=6)[0] == endpoint_oracle(f)


class TestCrossing:
    def test_single(self):
        total, recs = sf_crossing(herm_path(lambda s: np.diag([2 * s - 1]), 1))
        assert total == 1
        assert len(recs) == 1 and abs(recs[0].t - 0.5) < 1e-8
        np.testing.assert_allclose(recs[0].B_restricted, [[2.0]], atol=1e-6)

    def test_opposite_pair(self):
        total, recs = sf_crossing(herm_path(lambda s: np.diag([s - 0.5, 0.5 - s]), 2))
        assert total == 0
        assert recs[0].signature_data[0] == 1 and recs[0].signature_data[2] == 1

    def test_no_crossing(self):
        assert sf_crossing(herm_path(lambda s: np.diag([1 + s, -2.0]), 2))[0] == 0

    def test_endpoints(self):
        assert sf_crossing(herm_path(lambda s: np.array([[s - 1.0]]), 1))[0] == 1
        assert sf_crossing(herm_path(lambda s: np.array([[-s]]), 1))[0] == -1

    def test_non_regular_falls_back(self):
        total, recs = sf_crossing(herm_path(lambda s: np.array([[(s - 0.5) ** 3]]), 1))
        assert total == 1
        assert any(r.fallback for r in recs)

    @pytest.mark.parametrize("seed", range(100))
    def test_agrees_with_partition(self, seed):
        rng = np.random.default_rng(500 + seed)
        n = 1 + seed % 8
        f = trig_path(rng, n, harmonics=1 + seed % 3)
        path = herm_path(f, n)
        expected = endpoint_oracle(f)
        assert sf_partition(path)[0] == expected
        assert sf_crossing(path)[0] == expected


@pytest.mark.parametrize("seed", range(200))
def test_partition_matches_tracking(seed):
    rng = np.random.default_rng(seed)
    n = 1 + seed % 12
    f = trig_path(rng, n)
    sf = sf_partition(herm_path(f, n))[0]
    assert sf == tracking_oracle(f)
    assert sf == endpoint_oracle(f)


class TestProperties:
    @pytest.mark.parametrize("seed", range(50))
    def test_catenation(self, seed):
        rng = np.random.default_rng(10_000 + seed)
        n = 1 + seed % 6
        path = herm_path(trig_path(rng, n), n)
        t = float(rng.uniform(0.05, 0.95))
        left = sf_partition(path.restrict(0.0, t))[0]
        right = sf_partition(path.restrict(t, 1.0))[0]
        assert left + right == sf_partition(path)[0]

    @pytest.mark.parametrize("seed", range(50))
    def test_homotopy_loop(self, seed):
        rng = np.random.default_rng(20_000 + seed)
        n = 1 + seed % 5
        H = [random_hermitian(rng, n) for _ in range(4)]
        C = random_hermitian(rng, n, 2.0)

        def A(s, t):
            bil = (1 - s) * (1 - t) * H[0] + s * (1 - t) * H[1] + s * t * H[2] + (1 - s) * t * H[3]
            return bil + np.sin(np.pi * s) * np.sin(np.pi * t) * C

        sides = [
            herm_path(lambda u: A(u, 0.0), n),
            herm_path(lambda u: A(1.0, u), n),
            herm_path(lambda u: A(1.0 - u, 1.0), n),
            herm_path(lambda u: A(0.0, 1.0 - u), n),
        ]
        assert sum(sf_partition(p)[0] for p in sides) == 0
        assert sf_partition(OperatorPath.concat(sides))[0] == 0

    @pytest.mark.parametrize("seed", range(50))
    def test_product(self, seed):
        rng = np.random.default_rng(30_000 + seed)
        n1, n2 = 1 + seed % 4, 1 + (seed // 4) % 4
        p = herm_path(trig_path(rng, n1), n1)
        q = herm_path(trig_path(rng, n2), n2)
        assert sf_partition(OperatorPath.block_diag(p, q))[0] == sf_partition(p)[0] + sf_partition(q)[0]

    @pytest.mark.parametrize("seed", range(50))
    def test_reverse_orientation(self, seed):
        rng = np.random.default_rng(40_000 + seed)
        n = 2 + seed % 5
        end = 1.0 if seed % 2 else 0.0
        g = zero_at_end(trig_path(rng, n), end, 1 + seed % 2, rng)
        path = herm_path(g, n)
        nu0, nu1 = hyperbolic_nullity(g(0.0)), hyperbolic_nullity(g(1.0))
        assert (nu0 if end == 0.0 else nu1) == 1 + seed % 2
        sf_l = sf_partition(path, orientation=1)[0]
        sf_hat = sf_partition(path, orientation=-1)[0]
        assert sf_l + sf_hat == nu1 - nu0

    @pytest.mark.parametrize("seed", range(50))
    def test_zero(self, seed):
        rng = np.random.default_rng(50_000 + seed)
        n = 1 + seed % 6
        D = np.diag(rng.choice([-2.0, -0.5, 0.0, 0.7, 3.0], size=n))
        H = random_hermitian(rng, n)
        w, V = np.linalg.eigh(H)

        def f(s):
            Q = (V * np.exp(2j * np.pi * s * w)) @ V.conj().T
            return Q @ D @ Q.conj().T

        assert sf_partition(herm_path(f, n))[0] == 0

    @pytest.mark.parametrize("seed", range(50))
    def test_invariance(self, seed):
        rng = np.random.default_rng(60_000 + seed)
        n = 1 + seed % 6
        f = trig_path(rng, n)
        T0, T1 = (np.eye(n) + 0.3 * random_hermitian(rng, n) + 0.3j * random_hermitian(rng, n)
                  for _ in range(2))

        def T(s):
            return (1 - s) * T0 + s * T1 + 2 * np.eye(n)

        conj = OperatorPath(n, HERMITIAN, lambda s: np.linalg.solve(T(s), f(s) @ T(s)),
                            gram_family=lambda s: T(s).conj().T @ T(s))
        assert sf_partition(conj)[0] == sf_partition(herm_path(f, n))[0]

    @pytest.mark.parametrize("seed", range(50))
    def test_bound(self, seed):
        rng = np.random.default_rng(70_000 + seed)
        n = 2 + seed % 6
        k = 1 + seed % n
        Q = random_unitary(rng, n)
        d = np.concatenate([np.zeros(k), rng.choice([-1.0, 1.0], size=n - k) * rng.uniform(1, 3, size=n - k)])
        A = Q @ np.diag(d) @ Q.conj().T
        # kernel directions of A move by small amounts: some negative, some positive, some stay
        e = np.zeros(n)
        e[:k] = 1e-2 * rng.choice([-1.0, 0.0, 1.0], size=k)
        E = Q @ np.diag(e) @ Q.conj().T
        path = herm_path(lambda s: A + s * E, n)
        B = A + E
        rel = -sf_partition(path)[0]
        assert 0 <= rel <= hyperbolic_nullity(A) - hyperbolic_nullity(B)
        assert rel == int(np.count_nonzero(e < 0))


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_reversal_negates(seed, n):
    f = trig_path(np.random.default_rng(seed), n, harmonics=2)
    path = herm_path(f, n)
    assert sf_partition(path.reversed())[0] == -sf_partition(path)[0]


def unitary_tracking_oracle(U, n=4096):
    """Signed passages of eigenvalue arguments through 0, following eigenvalues by circular distance."""
    ss = np.linspace(0.0, 1.0, n + 1)
    z = [np.linalg.eigvals(U(s)) for s in ss]
    band = 1e-8
    total = 0
    for za, zb in zip(z[:-1], z[1:]):
        cost = np.abs(np.angle(za[:, None] / zb[None, :]))
        ia, ib = linear_sum_assignment(cost)
        assert cost[ia, ib].max() < 0.05, "grid too coarse for the oracle"
        a = np.angle(za[ia])
        b = a + np.angle(zb[ib] / za[ia])
        near = (np.abs(a) < np.pi / 2) & (np.abs(b) < np.pi / 2)
        total += int(np.count_nonzero(near & (a < -band))) - int(np.count_nonzero(near & (b < -band)))
    return total


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=st.integers(1, 4))
def test_unitary_tracking(seed, n):
    rng = np.random.default_rng(seed)
    H = random_hermitian(rng, n, 3.0)
    U0 = random_unitary(rng, n)
    w, V = np.linalg.eigh(H)

    def U(s):
        return U0 @ (V * np.exp(1j * s * w)) @ V.conj().T

    assert sf_partition(OperatorPath(n, UNITARY, U))[0] == unitary_tracking_oracle(U)
