import numpy as np
import pytest

from opfactor.errors import InvalidSpec
from opfactor.instances import KINDS, InstanceSpec, difference_matrix, gen_instance, mass_matrix
from opfactor.linalg import range_projection
from opfactor.sebestyen import check_forward


@pytest.mark.parametrize("kind", [k for k in KINDS if k != "difference-operator"])
def test_deterministic(kind):
    a = gen_instance(InstanceSpec(kind, 5, seed=99), 3)
    b = gen_instance(InstanceSpec(kind, 5, seed=99), 3)
    assert np.array_equal(a.T, b.T) and np.array_equal(a.B, b.B)
    c = gen_instance(InstanceSpec(kind, 5, seed=99), 4)
    assert not np.array_equal(a.T, c.T)


def test_streams_differ_by_seed():
    a = gen_instance(InstanceSpec("random", 4, seed=1))
    b = gen_instance(InstanceSpec("random", 4, seed=2))
    assert not np.array_equal(a.T, b.T)


def test_forward_feasible_exact():
    inst = gen_instance(InstanceSpec("forward-feasible", 2, seed=1))
    assert np.array_equal(inst.ground_truth @ inst.B, inst.T)
    w = np.linalg.eigvalsh(inst.ground_truth)
    assert w[0] >= -1e-12 and w[-1] <= 1.0 + 1e-12


def test_forward_scale():
    inst = gen_instance(InstanceSpec("forward-feasible", 4, seed=1, scale=5.0))
    assert np.linalg.eigvalsh(inst.ground_truth)[-1] <= 5.0 + 1e-12


def test_forward_infeasible_really_infeasible():
    for i in range(30):
        inst = gen_instance(InstanceSpec("forward-infeasible", 1 + i % 6, seed=1), i)
        assert not check_forward(inst.T, inst.B).feasible


def test_douglas_feasible():
    inst = gen_instance(InstanceSpec("douglas-feasible", 5, seed=1))
    assert np.allclose(inst.B @ inst.ground_truth, inst.T)


def test_reversed_feasible():
    for i in range(10):
        inst = gen_instance(InstanceSpec("reversed-feasible", 6, seed=1), i)
        Y0 = inst.ground_truth
        P = range_projection(inst.T)
        assert np.allclose(Y0 @ inst.T, P @ inst.B)
        assert np.linalg.eigvalsh(Y0)[0] >= -1e-12


def test_difference_stencil():
    inst = gen_instance(InstanceSpec("difference-operator", 4))
    T = inst.T
    for k in range(3):
        assert T[k, k] == -4 and T[k, k + 1] == 4
    assert T[3, 3] == -4
    norms = [np.linalg.norm(difference_matrix(n), 2) for n in (4, 8, 16)]
    assert norms[0] < norms[1] < norms[2]


@pytest.mark.parametrize("variant", ["identity", "mass"])
def test_difference_form_is_grid_inner_product(variant):
    inst = gen_instance(InstanceSpec("difference-operator", 6, scale=2.0, variant=variant))
    G = np.eye(6) if variant == "identity" else mass_matrix(6)
    assert np.allclose(inst.B.conj().T @ inst.T, 2.0 * G)


def test_scalar_random_criterion():
    # 1x1: ||t f||^2 <= lam Re(t conj(b)) |f|^2 needs t conj(b) real and >= 0
    for i in range(40):
        inst = gen_instance(InstanceSpec("random", 1, seed=0), i)
        t, b = inst.T[0, 0], inst.B[0, 0]
        q = t * np.conj(b)
        expected = abs(q.imag) <= 1e-9 * abs(q) and q.real >= 0
        assert check_forward(inst.T, inst.B).feasible == expected
    for t, b, ok in [(2.0, 3.0, True), (2.0, -3.0, False), (1j, 1j, True), (1.0, 1j, False), (0.0, 5.0, True)]:
        assert check_forward([[t]], [[b]]).feasible == ok


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="nope", n=2),
        dict(kind="random", n=0),
        dict(kind="random", n=2.5),
        dict(kind="random", n=2, seed=-1),
        dict(kind="random", n=2, seed=2**64),
        dict(kind="random", n=2, scale=0.0),
        dict(kind="random", n=2, scale=float("nan")),
        dict(kind="difference-operator", n=2, variant="other"),
    ],
)
def test_invalid_spec(kwargs):
    with pytest.raises(InvalidSpec):
        InstanceSpec(**kwargs)
