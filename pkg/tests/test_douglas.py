import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opfactor.douglas import (
    DouglasCertificate,
    douglas_equivalence_check,
    douglas_factor,
    range_inclusion,
    verify_douglas_certificate,
)
from opfactor.errors import DimensionMismatch, RangeNotIncluded
from opfactor.instances import InstanceSpec, gen_instance

from conftest import bisect_lambda, crandn

B_RANK1 = np.diag([1.0, 0.0])


class TestRangeInclusion:
    def test_same(self, rng):
        T = crandn(rng, 3, 3)
        assert range_inclusion(T, T)

    def test_rank_jump(self):
        assert not range_inclusion(np.eye(2), B_RANK1)

    def test_explicit_ranges(self):
        assert range_inclusion(np.diag([2.0, 0.0]), B_RANK1)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            range_inclusion(np.eye(2), np.eye(3))


class TestFactor:
    def test_diagonal(self):
        cert = douglas_factor(np.diag([2.0, 0.0]), B_RANK1)
        assert np.allclose(cert.factor_c, np.diag([2.0, 0.0]))
        assert cert.lambda_min == pytest.approx(2.0)

    def test_invertible_identity_factor(self, rng):
        B = crandn(rng, 4, 4)
        cert = douglas_factor(B, B)
        assert np.allclose(cert.factor_c, np.eye(4)) and cert.lambda_min == pytest.approx(1.0)

    def test_round_trip_against_c0(self, rng):
        for _ in range(30):
            B = crandn(rng, 3, 5)  # full row rank
            C0 = crandn(rng, 5, 4)
            T = B @ C0
            cert = douglas_factor(T, B)
            assert np.linalg.norm(B @ cert.factor_c - T) <= 1e-8 * max(1, np.linalg.norm(T))
            assert np.linalg.norm(cert.factor_c, 2) <= np.linalg.norm(C0, 2) + 1e-8

    def test_lambda_against_bisection(self, rng):
        for _ in range(15):
            B = crandn(rng, 4, 2) @ crandn(rng, 2, 4)
            T = B @ crandn(rng, 4, 3)
            lam2 = bisect_lambda(T @ T.conj().T, B @ B.conj().T)
            assert douglas_factor(T, B).lambda_min == pytest.approx(np.sqrt(lam2), rel=1e-6)

    def test_c_norm_equals_lambda(self, rng):
        for _ in range(15):
            B = crandn(rng, 4, 3)
            T = B @ crandn(rng, 3, 2)
            cert = douglas_factor(T, B)
            assert np.linalg.norm(cert.factor_c, 2) == pytest.approx(cert.lambda_min, rel=1e-8)

    def test_rank_deficient_reports_column(self):
        with pytest.raises(RangeNotIncluded) as info:
            douglas_factor(np.eye(2), B_RANK1)
        assert info.value.column == 1
        assert np.allclose(info.value.witness, [0, 1])

    def test_zero_b_zero_t(self):
        cert = douglas_factor(np.zeros((2, 2)), np.zeros((2, 3)))
        assert cert.lambda_min == 0.0 and cert.factor_c.shape == (3, 2)


class TestEquivalence:
    def test_zero_t(self, rng):
        eq = douglas_equivalence_check(np.zeros((3, 3)), crandn(rng, 3, 3))
        assert (eq.inc, eq.maj, eq.fac) == (True, True, True)

    def test_all_fail_together(self):
        eq = douglas_equivalence_check(np.eye(2), B_RANK1)
        assert (eq.inc, eq.maj, eq.fac) == (False, False, False) and eq.agree

    def test_seeded_sweep(self):
        for i in range(200):
            kind = "douglas-feasible" if i % 2 else "random"
            inst = gen_instance(InstanceSpec(kind, 1 + i % 10, seed=13), i)
            eq = douglas_equivalence_check(inst.T, inst.B)
            assert eq.agree, eq.note


class TestVerify:
    def test_round_trip(self):
        for i in range(20):
            inst = gen_instance(InstanceSpec("douglas-feasible", 1 + i % 6, seed=14), i)
            cert = douglas_factor(inst.T, inst.B)
            assert verify_douglas_certificate(inst.T, inst.B, cert).passed

    def test_inflated_lambda_not_minimal(self):
        inst = gen_instance(InstanceSpec("douglas-feasible", 4, seed=14))
        cert = douglas_factor(inst.T, inst.B)
        rep = verify_douglas_certificate(inst.T, inst.B, DouglasCertificate(cert.lambda_min * 1.01, cert.factor_c))
        assert not rep["lambda_minimal"].passed

    def test_non_minimal_factor_rejected(self, rng):
        # adding a kernel component of B keeps BC = T but leaves ran B*
        B = np.diag([1.0, 0.0])
        T = np.diag([2.0, 0.0])
        cert = douglas_factor(T, B)
        C = cert.factor_c + np.array([[0, 0], [0.0, 0.5]])
        rep = verify_douglas_certificate(T, B, DouglasCertificate(cert.lambda_min, C))
        assert rep["factor"].passed and not rep["range"].passed


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_three_way_agreement(n, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, n)
    B = crandn(rng, n, r) @ crandn(rng, r, n) if r else np.zeros((n, n))
    T = B @ crandn(rng, n, n) if rng.random() < 0.5 else crandn(rng, n, n)
    assert douglas_equivalence_check(T, B).agree
