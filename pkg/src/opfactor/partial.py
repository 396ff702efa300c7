"""Operators restricted to subspace domains.

At finite dimension a densely defined operator is everywhere defined, so the
only meaningful partial operators are restrictions to subspaces.  That is
enough to make inclusion statements such as ``XB ⊆ T`` checkable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import DEFAULT_TOL, PsdResult, Tolerance, as_matrix, psd_min_eig

__all__ = ["PartialOperator", "includes", "compose", "closure", "quadratic_form_sign"]


@dataclass(frozen=True, eq=False)
class PartialOperator:
    """``matrix`` acting on the span of the orthonormal columns of ``domain_basis``."""

    matrix: np.ndarray
    domain_basis: np.ndarray

    def __post_init__(self):
        matrix = as_matrix(self.matrix, "matrix")
        basis = as_matrix(self.domain_basis, "domain_basis")
        if basis.shape[0] != matrix.shape[1]:
            raise DimensionMismatch(
                f"domain basis has {basis.shape[0]} rows, operator has {matrix.shape[1]} columns"
            )
        if basis.shape[1] > basis.shape[0]:
            raise DimensionMismatch("domain basis has more columns than the ambient dimension")
        gram = basis.conj().T @ basis
        if np.linalg.norm(gram - np.eye(basis.shape[1]), "fro") > DEFAULT_TOL.residual_rel * max(1, basis.shape[1]):
            raise ValueError("domain basis columns are not orthonormal")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "domain_basis", basis)

    @classmethod
    def full(cls, matrix) -> "PartialOperator":
        matrix = as_matrix(matrix)
        return cls(matrix, np.eye(matrix.shape[1], dtype=complex))

    @classmethod
    def restricted(cls, matrix, spanning) -> "PartialOperator":
        """Restrict ``matrix`` to the span of the columns of ``spanning``."""
        spanning = as_matrix(spanning, "spanning")
        if spanning.size == 0:
            return cls(matrix, spanning)
        U, s, _ = np.linalg.svd(spanning, full_matrices=False)
        keep = s > DEFAULT_TOL.rank_rel * s[0] if s.size and s[0] > 0 else np.zeros(s.shape, dtype=bool)
        return cls(matrix, U[:, keep])

    @property
    def n_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_out(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.domain_basis.shape[1]

    def domain_projector(self) -> np.ndarray:
        Q = self.domain_basis
        return Q @ Q.conj().T

    def __call__(self, f) -> np.ndarray:
        return self.matrix @ np.asarray(f, dtype=complex)


def includes(A: PartialOperator, B: PartialOperator, tol: Tolerance = DEFAULT_TOL) -> bool:
    """``A ⊆ B``: ``dom A ⊆ dom B`` and ``B`` agrees with ``A`` on ``dom A``."""
    if A.matrix.shape != B.matrix.shape:
        raise DimensionMismatch(f"operator shapes differ: {A.matrix.shape} vs {B.matrix.shape}")
    Qa = A.domain_basis
    outside = Qa - B.domain_projector() @ Qa
    if np.linalg.norm(outside, "fro") > tol.residual_rel:
        return False
    action = (B.matrix - A.matrix) @ Qa
    return bool(np.linalg.norm(action, "fro") <= tol.residual_rel * max(1.0, np.linalg.norm(A.matrix, "fro")))


def compose(A: PartialOperator, B: PartialOperator, tol: Tolerance = DEFAULT_TOL) -> PartialOperator:
    """``A B`` on ``{f in dom B : Bf in dom A}``."""
    if A.n_in != B.n_out:
        raise DimensionMismatch(f"cannot compose {A.matrix.shape} after {B.matrix.shape}")
    Qb = B.domain_basis
    # Bf must have no component outside dom A
    escape = B.matrix @ Qb - A.domain_projector() @ (B.matrix @ Qb)
    d = Qb.shape[1]
    if d == 0:
        coeffs = np.zeros((0, 0), dtype=complex)
    else:
        # rank decided against the size of B, not of the (possibly pure rounding) escape
        _, s, Vh = np.linalg.svd(escape, full_matrices=True)
        floor = tol.residual_rel * max(1.0, float(np.linalg.norm(B.matrix @ Qb, 2)))
        rank = int(np.count_nonzero(s > floor))
        coeffs = Vh[rank:].conj().T.reshape(d, d - rank)
    return PartialOperator(A.matrix @ B.matrix, Qb @ coeffs)


def closure(A: PartialOperator) -> PartialOperator:
    """Subspaces are closed and matrices bounded, so closing changes nothing."""
    return PartialOperator(A.matrix, A.domain_basis)


def quadratic_form_sign(M, domain_basis, tol: Tolerance = DEFAULT_TOL) -> PsdResult:
    """Is ``f* M f >= 0`` for every ``f`` in the span of ``domain_basis``?

    Returns the PSD verdict of the compression ``Q* M Q``; the witness is
    mapped back to ambient coordinates.
    """
    M = as_matrix(M, "M")
    Q = as_matrix(domain_basis, "domain_basis")
    if M.shape[0] != M.shape[1] or Q.shape[0] != M.shape[0]:
        raise DimensionMismatch(f"form {M.shape} does not act on basis {Q.shape}")
    if Q.shape[1] == 0:
        return PsdResult(True, 0.0, np.zeros(M.shape[0], dtype=complex))
    res = psd_min_eig(Q.conj().T @ M @ Q, tol)
    return PsdResult(res.is_psd, res.min_eig, Q @ res.witness)
