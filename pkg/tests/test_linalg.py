import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opfactor.errors import DimensionMismatch, NonFinite, NonSquare, NotHermitianPsd
from opfactor.linalg import (
    DEFAULT_TOL,
    Tolerance,
    hermitize,
    loewner_leq,
    null_basis,
    pencil_extremes,
    pseudoinverse,
    psd_min_eig,
    range_basis,
    range_projection,
)

from conftest import bisect_lambda, crandn, scan_m_max


def test_tolerance_defaults_and_parse():
    assert DEFAULT_TOL == Tolerance(1e-9, 1e-10, 1e-8)
    assert Tolerance.parse("1e-7").eig_rel == 1e-7
    assert Tolerance.parse("1e-7").residual_rel == DEFAULT_TOL.residual_rel
    assert Tolerance.parse("1e-6, 1e-11, 1e-5") == Tolerance(1e-6, 1e-11, 1e-5)
    for bad in ("", "a", "1,2", "-1e-9", "1.5"):
        with pytest.raises(ValueError):
            Tolerance.parse(bad)


class TestPsdMinEig:
    def test_identity(self):
        res = psd_min_eig(np.eye(2))
        assert res.is_psd and res.min_eig == pytest.approx(1.0)
        assert np.linalg.norm(res.witness) == pytest.approx(1.0)

    def test_sign_case(self):
        res = psd_min_eig(np.diag([1.0, -1.0]))
        assert not res.is_psd and res.min_eig == pytest.approx(-1.0)
        assert abs(res.witness[1]) == pytest.approx(1.0)

    def test_rank_one_ones(self):
        # eigenvalues of [[a,b],[b,a]] are a +- b
        a, b = 1.0, 1.0
        res = psd_min_eig(np.array([[a, b], [b, a]]))
        assert res.is_psd
        assert res.min_eig == pytest.approx(a - b, abs=1e-15)
        v = np.array([1, -1]) / math.sqrt(2)
        assert abs(np.vdot(v, res.witness)) == pytest.approx(1.0)

    def test_witness_is_eigenvector(self, rng):
        A = hermitize(crandn(rng, 5, 5))
        res = psd_min_eig(A)
        assert np.allclose(A @ res.witness, res.min_eig * res.witness)

    def test_anti_hermitian_part_rejected(self):
        assert not psd_min_eig(np.array([[1.0, 1.0], [0.0, 1.0]])).is_psd

    def test_errors(self):
        with pytest.raises(NonSquare):
            psd_min_eig(np.ones((2, 3)))
        with pytest.raises(NonFinite):
            psd_min_eig(np.array([[np.nan]]))


class TestPseudoinverse:
    def test_diag(self):
        assert np.allclose(pseudoinverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_zero(self):
        assert np.array_equal(pseudoinverse(np.zeros((3, 2))), np.zeros((2, 3)))

    def test_penrose_identities(self, rng):
        A = crandn(rng, 4, 3)
        P = pseudoinverse(A)
        assert np.linalg.norm(A @ P @ A - A) <= 1e-10
        assert np.linalg.norm(P @ A @ P - P) <= 1e-10
        assert np.allclose(A @ P, (A @ P).conj().T)
        assert np.allclose(P @ A, (P @ A).conj().T)

    def test_matches_numpy_pinv(self, rng):
        A = crandn(rng, 5, 2) @ crandn(rng, 2, 4)
        assert np.allclose(pseudoinverse(A), np.linalg.pinv(A, rcond=1e-10), atol=1e-10)


class TestRangeProjection:
    def test_diag(self):
        assert np.allclose(range_projection(np.diag([3.0, 0.0])), np.diag([1.0, 0.0]))

    def test_full_rank(self, rng):
        assert np.allclose(range_projection(crandn(rng, 4, 4)), np.eye(4))

    def test_rank_one_formula(self):
        v = np.array([[1.0], [1.0]])
        assert np.allclose(range_projection(v), v @ v.T / (v.T @ v))

    def test_projector_properties(self, rng):
        A = crandn(rng, 6, 3) @ crandn(rng, 3, 5)
        P = range_projection(A)
        assert np.allclose(P @ P, P) and np.allclose(P, P.conj().T)
        assert np.allclose(P @ A, A)
        assert round(np.trace(P).real) == 3

    def test_bases_are_complementary(self, rng):
        A = crandn(rng, 5, 2) @ crandn(rng, 2, 5)
        R, N = range_basis(A), null_basis(A)
        assert R.shape[1] == 2 and N.shape[1] == 3
        assert np.linalg.norm(A @ N) <= 1e-12 * np.linalg.norm(A)


class TestLoewner:
    def test_examples(self):
        assert loewner_leq(np.eye(2), np.diag([2.0, 3.0]))
        assert not loewner_leq(np.diag([2.0, 0.0]), np.eye(2))

    def test_rank_one_update(self, rng):
        for _ in range(20):
            X = crandn(rng, 4, 4)
            A = hermitize(X @ X.conj().T)
            v = crandn(rng, 4, 1)
            assert loewner_leq(A, A + v @ v.conj().T)

    def test_reflexive_with_rounding(self, rng):
        X = crandn(rng, 6, 6)
        A = X @ X.conj().T
        B = (X * 3) @ (X.conj().T / 3)
        assert loewner_leq(A, B) and loewner_leq(B, A)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            loewner_leq(np.eye(2), np.eye(3))


class TestPencil:
    def test_diagonal(self):
        res = pencil_extremes(np.diag([9.0, 0.0]), np.diag([3.0, 0.0]))
        assert res.lambda_min_feasible and res.lambda_min == pytest.approx(3.0)
        assert res.m_max == pytest.approx(3.0)

    def test_kernel_obstruction(self):
        # M vanishes on e2 where A does not
        res = pencil_extremes(np.eye(2), np.diag([1.0, 0.0]))
        assert not res.lambda_min_feasible and res.lambda_min == math.inf
        assert res.m_max == pytest.approx(1.0)

    def test_m_max_zero_counterexample(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]])
        M = np.diag([1.0, 0.0])
        # det(A - mM) = -m, so A - mM is indefinite for every m > 0
        for m in (1e-6, 1e-3, 0.5):
            assert np.linalg.det(A - m * M) == pytest.approx(-m)
        assert pencil_extremes(A, M).m_max == 0.0

    def test_zero_m_is_unconstrained(self):
        res = pencil_extremes(np.eye(2), np.zeros((2, 2)))
        assert res.unconstrained and not res.lambda_min_feasible and res.m_max == math.inf
        res = pencil_extremes(np.zeros((2, 2)), np.zeros((2, 2)))
        assert res.lambda_min_feasible and res.lambda_min == 0.0

    def test_rejects_indefinite(self):
        with pytest.raises(NotHermitianPsd):
            pencil_extremes(np.eye(2), np.diag([1.0, -1.0]))

    def test_against_generalized_eigenvalues(self, rng):
        # M positive definite: lam_min = max eig, m_max = min eig of M^{-1}A
        for _ in range(20):
            X, Y = crandn(rng, 4, 4), crandn(rng, 4, 4)
            A, M = X @ X.conj().T, Y @ Y.conj().T + 0.5 * np.eye(4)
            w = np.sort(np.linalg.eigvals(np.linalg.solve(M, A)).real)
            res = pencil_extremes(A, M)
            assert res.lambda_min == pytest.approx(w[-1], rel=1e-8)
            assert res.m_max == pytest.approx(w[0], rel=1e-8)

    def test_singular_pencils_against_oracles(self, rng):
        for _ in range(15):
            Z = crandn(rng, 5, 3)
            A = Z @ np.diag(rng.uniform(0.2, 1, 3)) @ Z.conj().T
            W = Z @ crandn(rng, 3, 3)
            M = W @ W.conj().T
            res = pencil_extremes(A, M)
            assert res.lambda_min == pytest.approx(bisect_lambda(A, M), rel=1e-6)
            assert res.m_max == pytest.approx(scan_m_max(A, M), rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_pencil_bounds_are_tight(n, seed):
    rng = np.random.default_rng(seed)
    X, Y = crandn(rng, n, n), crandn(rng, n, n)
    A, M = X @ X.conj().T, Y @ Y.conj().T
    res = pencil_extremes(A, M)
    assert loewner_leq(A, res.lambda_min * M)
    assert loewner_leq(res.m_max * M, A)
    assert res.m_max <= res.lambda_min * (1 + 1e-8)
