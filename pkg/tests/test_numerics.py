import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hetreg.errors import ConvergenceError, InvalidArgumentError, SingularDesignError
from hetreg.numerics import make_stream, solve_spd, std_normal, top_eigenpair

from oracles import jacobi_eigh, mp_solve, random_psd_with_gap, random_spd

GOLDEN_42_7 = -0.3485299519982578


class TestStreams:
    def test_same_key_same_draws(self):
        a = std_normal(make_stream(42, 0), 1000)
        b = std_normal(make_stream(42, 0), 1000)
        assert np.array_equal(a, b)

    def test_distinct_index_differs(self):
        a = std_normal(make_stream(42, 0), 1000)
        b = std_normal(make_stream(42, 1), 1000)
        assert np.any(a != b)

    def test_golden_first_draw(self):
        assert std_normal(make_stream(42, 7), 1)[0] == GOLDEN_42_7

    def test_moments(self):
        x = std_normal(make_stream(1, 2), 10 ** 6)
        assert abs(x.mean()) < 0.01
        assert abs(x.var() - 1.0) < 0.02

    def test_streams_uncorrelated(self):
        a = std_normal(make_stream(9, 0), 100_000)
        b = std_normal(make_stream(9, 1), 100_000)
        # 4 sigma for a sample correlation of 1e5 pairs
        assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(100_000)

    def test_draws_advance_stream(self):
        s = make_stream(3, 3)
        first, second = std_normal(s, 5), std_normal(s, 5)
        assert not np.array_equal(first, second)
        assert np.array_equal(np.concatenate([first, second]), std_normal(make_stream(3, 3), 10))

    @pytest.mark.parametrize("count", [0, -1, 2.5])
    def test_bad_count(self, count):
        with pytest.raises(InvalidArgumentError):
            std_normal(make_stream(0, 0), count)

    @pytest.mark.parametrize("seed,idx", [(-1, 0), (0, 1 << 64)])
    def test_seed_range(self, seed, idx):
        with pytest.raises(InvalidArgumentError):
            make_stream(seed, idx)


class TestSolveSpd:
    def test_identity(self):
        assert np.array_equal(solve_spd(np.eye(3), np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])

    def test_diagonal(self):
        assert np.allclose(solve_spd(np.diag([2.0, 4.0]), np.array([2.0, 4.0])), [1.0, 1.0], rtol=0, atol=1e-15)

    def test_matches_high_precision_elimination(self, rng):
        A = random_spd(rng, 6)
        b = rng.standard_normal(6)
        x = solve_spd(A, b)
        ref = mp_solve(A, b)
        assert np.allclose(x, ref, rtol=1e-10, atol=1e-10 * np.linalg.norm(ref))

    def test_residual_over_many_systems(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 51))
            A = random_spd(rng, d, cond=float(10 ** rng.uniform(0, 4)))
            b = rng.standard_normal(d)
            x = solve_spd(A, b)
            assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_singular_reports_pivot(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(SingularDesignError) as exc:
            solve_spd(A, np.ones(2))
        assert exc.value.index == 1
        assert exc.value.pivot == pytest.approx(0.0, abs=1e-15)

    def test_indefinite_rejected(self):
        with pytest.raises(SingularDesignError) as exc:
            solve_spd(np.diag([2.0, -1.0]), np.ones(2))
        assert exc.value.pivot == -1.0

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            solve_spd(np.eye(2), np.ones(3))


class TestTopEigenpair:
    def test_diagonal(self):
        lam, v = top_eigenpair(np.diag([3.0, 1.0]))
        assert lam == pytest.approx(3.0, rel=1e-10)
        assert np.allclose(v, [1.0, 0.0], atol=1e-9)

    def test_degenerate_identity(self):
        lam, v = top_eigenpair(np.eye(2))
        assert lam == pytest.approx(1.0)
        assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_matches_jacobi(self, rng):
        A = random_psd_with_gap(rng, 5)
        lam, v = top_eigenpair(A)
        evals, evecs = jacobi_eigh(A)
        i = int(np.argmax(evals))
        assert lam == pytest.approx(evals[i], rel=1e-8)
        assert abs(v @ evecs[:, i]) >= 1 - 1e-8

    def test_residual_and_rayleigh(self, rng):
        A = random_psd_with_gap(rng, 12, gap=1.3)
        lam, v = top_eigenpair(A, tol=1e-10)
        assert np.linalg.norm(A @ v - lam * v) <= 1e-10 * lam * (1 + 1e-6)
        assert v @ A @ v == pytest.approx(lam, rel=1e-10)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)

    def test_max_property(self, rng):
        A = random_psd_with_gap(rng, 8)
        lam, _ = top_eigenpair(A)
        for _ in range(100):
            u = rng.standard_normal(8)
            u /= np.linalg.norm(u)
            assert lam >= u @ A @ u

    def test_sign_canonical_and_repeatable(self, rng):
        A = random_psd_with_gap(rng, 6)
        _, v1 = top_eigenpair(A)
        _, v2 = top_eigenpair(A)
        assert np.array_equal(v1, v2)
        first = v1[np.flatnonzero(np.abs(v1) >= 1e-12)[0]]
        assert first > 0

    def test_spectral_norm_of_psd(self, rng):
        A = random_psd_with_gap(rng, 7)
        lam, _ = top_eigenpair(A)
        assert lam == pytest.approx(np.linalg.norm(A, 2), rel=1e-9)

    def test_zero_matrix(self):
        lam, v = top_eigenpair(np.zeros((3, 3)))
        assert lam == 0.0
        assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_no_gap_raises_with_residual(self):
        A = np.diag([1.0, 0.9999999])
        with pytest.raises(ConvergenceError) as exc:
            top_eigenpair(A, tol=1e-12, max_iter=5)
        assert exc.value.residual > 0
        assert exc.value.iterations == 5


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 50))
def test_solve_spd_residual_property(seed, d):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, d, cond=1e3)
    b = rng.standard_normal(d)
    x = solve_spd(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)
