"""Dense complex linear algebra primitives.

PSD testing, Loewner comparisons, SVD pseudoinverses, range projections and
the extreme values of a semidefinite pencil ``(A, M)``.  Everything here is a
pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NonFinite, NonSquare, NotHermitianPsd

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "PsdResult",
    "PencilResult",
    "as_matrix",
    "hermitize",
    "adjoint",
    "spectral_norm",
    "psd_min_eig",
    "pseudoinverse",
    "range_projection",
    "loewner_leq",
    "pencil_extremes",
]

BISECTION_REL_WIDTH = 1e-10


@dataclass(frozen=True)
class Tolerance:
    """Relative tolerances used by every numerical decision.

    eig_rel
        Eigenvalue slack of PSD tests, relative to the spectral norm.
    rank_rel
        Singular values below ``rank_rel * sigma_max`` count as zero.
    residual_rel
        Bound for relative Frobenius residuals.
    """

    eig_rel: float = 1e-9
    rank_rel: float = 1e-10
    residual_rel: float = 1e-8

    def __post_init__(self):
        for name in ("eig_rel", "rank_rel", "residual_rel"):
            value = getattr(self, name)
            if not (0.0 <= value < 1.0) or math.isnan(value):
                raise ValueError(f"{name} must lie in [0, 1), got {value!r}")

    @classmethod
    def parse(cls, text: str) -> "Tolerance":
        """Parse ``"eig"`` or ``"eig,rank,residual"``.

        A single number overrides ``eig_rel`` only.
        """
        parts = [p.strip() for p in text.split(",") if p.strip()]
        values = [float(p) for p in parts]
        if len(values) == 1:
            return cls(eig_rel=values[0])
        if len(values) == 3:
            return cls(*values)
        raise ValueError(f"expected 1 or 3 comma separated numbers, got {text!r}")

    def as_dict(self) -> dict[str, float]:
        return {"eig_rel": self.eig_rel, "rank_rel": self.rank_rel, "residual_rel": self.residual_rel}


DEFAULT_TOL = Tolerance()


class PsdResult(NamedTuple):
    is_psd: bool
    min_eig: float
    witness: np.ndarray


@dataclass(frozen=True)
class PencilResult:
    """Extremes of the pencil ``(A, M)`` for PSD ``A`` and ``M``.

    ``lambda_min`` is the least ``lam`` with ``A <= lam M`` (``inf`` when no
    such ``lam`` exists) and ``m_max`` the largest ``m`` with ``A >= m M``.
    ``unconstrained`` marks ``M = 0``, where ``m_max`` is reported as ``inf``.
    """

    lambda_min_feasible: bool
    lambda_min: float
    m_max: float
    restricted_eigs: tuple[float, ...] = field(default_factory=tuple)
    unconstrained: bool = False


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a finite 2-D complex array."""
    arr = np.asarray(A, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return arr


def _square(A, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(A, name)
    if arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {arr.shape}")
    return arr


def adjoint(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def hermitize(A) -> np.ndarray:
    """``(A + A*) / 2``; the result is exactly Hermitian in floating point."""
    A = np.asarray(A, dtype=complex)
    return (A + A.conj().T) / 2


def spectral_norm(A) -> float:
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def psd_min_eig(A, tol: Tolerance = DEFAULT_TOL, scale: float | None = None) -> PsdResult:
    """Smallest eigenvalue of the Hermitian part of ``A`` and a PSD verdict.

    ``A`` is PSD when ``min_eig >= -eig_rel * scale`` and its anti-Hermitian
    part is small, ``||A - A*||_F <= eig_rel * max(1, ||A||_F, scale)``.
    ``scale`` defaults to ``||(A + A*)/2||_2``; callers comparing two
    operators pass the size of the operands instead (see ``loewner_leq``).
    """
    A = _square(A)
    Ah = hermitize(A)
    w, V = np.linalg.eigh(Ah)
    min_eig = float(w[0])
    if scale is None:
        scale = float(max(abs(w[0]), abs(w[-1])))
    defect = float(np.linalg.norm(A - A.conj().T, "fro"))
    fro = float(np.linalg.norm(A, "fro"))
    is_psd = min_eig >= -tol.eig_rel * scale and defect <= tol.eig_rel * max(1.0, fro, scale)
    return PsdResult(bool(is_psd), min_eig, V[:, 0])


def _svd_cutoff(s: np.ndarray, tol: Tolerance) -> np.ndarray:
    if s.size == 0 or s[0] == 0:
        return np.zeros(s.shape, dtype=bool)
    return s > tol.rank_rel * s[0]


def pseudoinverse(A, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with a relative singular-value cutoff."""
    A = as_matrix(A)
    if A.size == 0:
        return np.zeros(A.shape[::-1], dtype=complex)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = _svd_cutoff(s, tol)
    return (Vh[keep].conj().T / s[keep]) @ U[:, keep].conj().T


def range_basis(A, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``ran A`` (columns)."""
    A = as_matrix(A)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    return U[:, _svd_cutoff(s, tol)]


def null_basis(A, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``ker A`` (columns)."""
    A = as_matrix(A)
    n = A.shape[1]
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    rank = int(np.count_nonzero(_svd_cutoff(s, tol)))
    return Vh[rank:].conj().T.reshape(n, n - rank)


def range_projection(A, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto ``ran A``, i.e. ``A A^+``.

    Built from the left singular vectors so that the result is Hermitian
    and idempotent to working precision.
    """
    Q = range_basis(A, tol)
    return Q @ Q.conj().T


def loewner_leq(A, B, tol: Tolerance = DEFAULT_TOL) -> bool:
    """``A <= B`` in the Loewner order.

    The eigenvalue slack is taken relative to ``max(||A||_2, ||B||_2)``,
    not to ``||B - A||_2``: rounding in ``A`` and ``B`` is proportional to
    the operands, and the difference may be pure rounding noise.
    """
    A = _square(A, "A")
    B = _square(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    scale = max(spectral_norm(hermitize(A)), spectral_norm(hermitize(B)))
    return psd_min_eig(B - A, tol, scale=scale).is_psd


def _positive_part(H: np.ndarray, tol: Tolerance) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of Hermitian PSD ``H`` above the rank cutoff."""
    w, V = np.linalg.eigh(H)
    if w.size == 0 or w[-1] <= 0:
        return np.zeros(0), V[:, :0]
    keep = w > tol.rank_rel * w[-1]
    return w[keep], V[:, keep]


def _whiten(A: np.ndarray, d: np.ndarray, U: np.ndarray) -> np.ndarray:
    # D^{-1/2} U* A U D^{-1/2}
    r = 1.0 / np.sqrt(d)
    K = (U.conj().T @ A @ U) * r[:, None] * r[None, :]
    return hermitize(K)


def pencil_extremes(A, M, tol: Tolerance = DEFAULT_TOL) -> PencilResult:
    """Least ``lam`` with ``A <= lam M`` and largest ``m`` with ``A >= m M``.

    ``lambda_min`` comes from the pencil compressed to ``ran M``; it is
    finite only when ``ker M`` is contained in ``ker A``.  ``m_max`` is found
    by bisection on the Loewner test ``m M <= A``.  It is positive exactly
    when ``ker A`` is contained in ``ker M``; the bisection bracket is capped
    by the pencil compressed to ``ran A``, so tolerance slack cannot push the
    result above the true value.
    """
    A = _square(A, "A")
    M = _square(M, "M")
    if A.shape != M.shape:
        raise DimensionMismatch(f"pencil shapes differ: {A.shape} vs {M.shape}")
    for name, X in (("A", A), ("M", M)):
        if not psd_min_eig(X, tol).is_psd:
            raise NotHermitianPsd(f"{name} is not Hermitian PSD")
    Ah, Mh = hermitize(A), hermitize(M)
    norm_a, norm_m = spectral_norm(Ah), spectral_norm(Mh)

    if norm_m == 0.0 or norm_m <= tol.rank_rel * norm_a:
        feasible = norm_a == 0.0
        return PencilResult(feasible, 0.0 if feasible else math.inf, math.inf, (), True)

    d, U = _positive_part(Mh, tol)
    restricted = np.clip(np.linalg.eigvalsh(_whiten(Ah, d, U)), 0.0, None)
    restricted_eigs = tuple(float(x) for x in np.sort(restricted))

    off_ran_m = Ah - (Ah @ U) @ U.conj().T
    feasible = np.linalg.norm(off_ran_m, "fro") <= tol.residual_rel * np.linalg.norm(Ah, "fro")
    lambda_min = restricted_eigs[-1] if feasible else math.inf

    return PencilResult(bool(feasible), lambda_min, _m_max(Ah, Mh, restricted_eigs, tol), restricted_eigs)


def _m_max(Ah: np.ndarray, Mh: np.ndarray, restricted_eigs, tol: Tolerance) -> float:
    e, V = _positive_part(Ah, tol)
    if e.size == 0:
        return 0.0
    off_ran_a = Mh - (Mh @ V) @ V.conj().T
    if np.linalg.norm(off_ran_a, "fro") > tol.residual_rel * np.linalg.norm(Mh, "fro"):
        # some f has Af = 0 but f*Mf > 0
        return 0.0
    g_max = float(np.linalg.eigvalsh(_whiten(Mh, e, V))[-1])
    cap = 1.0 / g_max if g_max > 0 else math.inf
    hi = min(restricted_eigs[0], cap)

    def ok(m: float) -> bool:
        return loewner_leq(m * Mh, Ah, tol)

    if ok(hi):
        return hi
    lo = 0.0
    while hi - lo > BISECTION_REL_WIDTH * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
