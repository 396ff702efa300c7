"""Seeded test instances.

Random streams come from numpy's ``PCG64`` seeded with
``SeedSequence(seed, spawn_key=(kind_code, index))``; ``kind_code`` is the
position of the kind in ``KINDS``.  Every ``(kind, n, seed, scale, index)``
therefore maps to bit-identical matrices on any platform running numpy.

Random factors are built as ``U diag(s) V*`` with Haar unitaries and
singular values (or eigenvalues) drawn from ``[0.1, 1] * scale``, so that
conditioning stays within what the default tolerances can resolve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .linalg import adjoint, range_basis

KINDS = (
    "forward-feasible",
    "forward-infeasible",
    "douglas-feasible",
    "reversed-feasible",
    "random",
    "difference-operator",
)
VARIANTS = ("identity", "mass")


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    n: int
    seed: int = 0
    scale: float = 1.0
    variant: str = "identity"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidSpec(f"n must be a positive integer, got {self.n!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidSpec("seed must be an unsigned 64-bit integer")
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise InvalidSpec(f"scale must be positive, got {self.scale!r}")
        if self.variant not in VARIANTS:
            raise InvalidSpec(f"unknown variant {self.variant!r}")


@dataclass(frozen=True, eq=False)
class Instance:
    T: np.ndarray
    B: np.ndarray
    ground_truth: np.ndarray | None
    spec: InstanceSpec
    index: int = 0


def rng_for(spec: InstanceSpec, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(spec.seed), spawn_key=(KINDS.index(spec.kind), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_matrix(rng: np.random.Generator, n: int, rank: int | None = None, scale: float = 1.0) -> np.ndarray:
    """``n x n`` matrix of the given rank with singular values in ``[0.1, 1] * scale``."""
    rank = n if rank is None else rank
    U, V = haar_unitary(rng, n), haar_unitary(rng, n)
    s = scale * 10.0 ** rng.uniform(-1.0, 0.0, size=rank)
    return (U[:, :rank] * s) @ adjoint(V[:, :rank])


def random_psd(rng: np.random.Generator, n: int, rank: int | None = None, scale: float = 1.0) -> np.ndarray:
    """PSD matrix of the given rank with nonzero eigenvalues in ``[0.1, 1] * scale``."""
    rank = n if rank is None else rank
    Q = haar_unitary(rng, n)
    e = rng.uniform(0.1 * scale, scale, size=rank)
    X = (Q[:, :rank] * e) @ adjoint(Q[:, :rank])
    return (X + adjoint(X)) / 2


def _deficient_rank(rng: np.random.Generator, n: int, p: float) -> int:
    # full rank with probability 1 - p, otherwise uniform on 1..n-1
    if n == 1 or rng.uniform() >= p:
        return n
    return int(rng.integers(1, n))


def difference_matrix(n: int) -> np.ndarray:
    """Forward differences on a grid of spacing ``1/n``: rows ``(-n, n)``."""
    D = -float(n) * np.eye(n) + float(n) * np.eye(n, k=1)
    return D.astype(complex)


def mass_matrix(n: int) -> np.ndarray:
    """Dimensionless P1 mass matrix ``tridiag(1/6, 2/3, 1/6)``."""
    return (2 / 3 * np.eye(n) + 1 / 6 * (np.eye(n, k=1) + np.eye(n, k=-1))).astype(complex)


def _forward_feasible(rng, n, scale):
    B = random_matrix(rng, n, _deficient_rank(rng, n, 0.25))
    X0 = random_psd(rng, n, _deficient_rank(rng, n, 0.25), scale)
    return X0 @ B, B, X0


def _forward_infeasible(rng, n, scale):
    from .sebestyen import check_forward

    for _ in range(100):
        flavor = int(rng.integers(0, 3)) if n > 1 else 0
        if flavor == 0:
            # perturb a feasible pair off the feasibility set
            T, B, _ = _forward_feasible(rng, n, scale)
            E = random_matrix(rng, n, scale=0.1 * scale)
            T = T + E
        elif flavor == 1:
            # Hermitian but indefinite X0
            B = random_matrix(rng, n)
            Q = haar_unitary(rng, n)
            e = rng.uniform(0.1 * scale, scale, size=n)
            e[int(rng.integers(0, n))] *= -1
            X0 = (Q * e) @ adjoint(Q)
            T = X0 @ B
        else:
            # T*B = M0 PSD but ker M0 is not inside ker T
            T = random_matrix(rng, n, scale=scale)
            M0 = random_psd(rng, n, int(rng.integers(1, n)))
            B = np.linalg.solve(adjoint(T), M0)
        if not check_forward(T, B).feasible:
            return T, B, None
    raise RuntimeError("could not draw an infeasible instance")  # pragma: no cover


def _douglas_feasible(rng, n, scale):
    B = random_matrix(rng, n, _deficient_rank(rng, n, 0.5))
    C0 = random_matrix(rng, n, scale=scale)
    return B @ C0, B, C0


def _reversed_feasible(rng, n, scale):
    T = random_matrix(rng, n, _deficient_rank(rng, n, 0.5))
    Q = range_basis(T)
    r = Q.shape[1]
    W = haar_unitary(rng, r)
    e = rng.uniform(0.1 * scale, scale, size=r)
    Y0 = Q @ ((W * e) @ adjoint(W)) @ adjoint(Q)
    Y0 = (Y0 + adjoint(Y0)) / 2
    R = random_matrix(rng, n)
    B = Y0 @ T + (R - Q @ (adjoint(Q) @ R))
    return T, B, Y0


def _random(rng, n, scale):
    T = random_matrix(rng, n, scale=scale)
    B = random_matrix(rng, n, int(rng.integers(1, n + 1)))
    return T, B, None


def _difference(n, scale, variant):
    D = difference_matrix(n)
    gram = np.eye(n, dtype=complex) if variant == "identity" else mass_matrix(n)
    # (Tf, Bf) = f* gram f
    B = np.linalg.solve(adjoint(D), scale * gram)
    return D, B, None


def gen_instance(spec: InstanceSpec, index: int = 0) -> Instance:
    """Draw the ``index``-th instance of ``spec``.

    ``ground_truth`` is ``X0`` (forward-feasible, ``T = X0 B``), ``C0``
    (douglas-feasible, ``T = B C0``) or ``Y0`` (reversed-feasible,
    ``P_T B = Y0 T``), else ``None``.

    The difference-operator fixture pairs ``T = D`` with
    ``B = D^{-*} G`` where ``G`` is ``scale`` times the identity or the mass
    matrix, so the form ``(Tf, Bf) = f* G f`` is the grid inner product and
    the least forward constant grows like ``||D||^2``.
    """
    n, scale = int(spec.n), float(spec.scale)
    if spec.kind == "difference-operator":
        T, B, truth = _difference(n, scale, spec.variant)
    else:
        rng = rng_for(spec, index)
        make = {
            "forward-feasible": _forward_feasible,
            "forward-infeasible": _forward_infeasible,
            "douglas-feasible": _douglas_feasible,
            "reversed-feasible": _reversed_feasible,
            "random": _random,
        }[spec.kind]
        T, B, truth = make(rng, n, scale)
    return Instance(np.ascontiguousarray(T), np.ascontiguousarray(B), truth, spec, index)
