"""Range-inclusion factorization ``T = BC``.

Majorization ``TT* <= lam^2 BB*``, factorization ``T = BC`` with
``||C|| <= lam`` and range inclusion ``ran T ⊆ ran B`` are equivalent; the
reduced solution ``C = B^+ T`` attains the least ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, RangeNotIncluded
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    adjoint,
    as_matrix,
    hermitize,
    loewner_leq,
    pencil_extremes,
    pseudoinverse,
    range_projection,
    spectral_norm,
)
from .report import VerificationReport

__all__ = [
    "DouglasCertificate",
    "DouglasEquivalence",
    "range_inclusion",
    "douglas_factor",
    "douglas_equivalence_check",
    "verify_douglas_certificate",
]

NORM_REL_SLACK = 1e-8
MINIMALITY_REL_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class DouglasCertificate:
    lambda_min: float
    factor_c: np.ndarray
    residuals: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class DouglasEquivalence:
    inc: bool
    maj: bool
    fac: bool
    note: str = ""

    @property
    def agree(self) -> bool:
        return self.inc == self.maj == self.fac


def _outputs(T, B) -> tuple[np.ndarray, np.ndarray]:
    T = as_matrix(T, "T")
    B = as_matrix(B, "B")
    if T.shape[0] != B.shape[0]:
        raise DimensionMismatch(f"T and B need the same output dimension, got {T.shape} and {B.shape}")
    return T, B


def _outside(T: np.ndarray, B: np.ndarray, tol: Tolerance) -> np.ndarray:
    return T - range_projection(B, tol) @ T


def range_inclusion(T, B, tol: Tolerance = DEFAULT_TOL) -> bool:
    """``ran T ⊆ ran B`` up to ``residual_rel``."""
    T, B = _outputs(T, B)
    out = _outside(T, B, tol)
    return bool(np.linalg.norm(out, "fro") <= tol.residual_rel * max(1.0, np.linalg.norm(T, "fro")))


def douglas_factor(T, B, tol: Tolerance = DEFAULT_TOL) -> DouglasCertificate:
    """Reduced factor ``C = B^+ T`` and the least ``lam`` with ``TT* <= lam^2 BB*``.

    Raises
    ------
    RangeNotIncluded
        With the column of ``T`` that sticks out of ``ran B`` the most.
    """
    T, B = _outputs(T, B)
    if not range_inclusion(T, B, tol):
        out = _outside(T, B, tol)
        col = int(np.argmax(np.linalg.norm(out, axis=0)))
        raise RangeNotIncluded(f"column {col} of T is not in ran B", T[:, col].copy(), col)

    C = pseudoinverse(B, tol) @ T
    pencil = pencil_extremes(hermitize(T @ adjoint(T)), hermitize(B @ adjoint(B)), tol)
    if pencil.unconstrained:
        # B = 0 forces T = 0 here
        lam = 0.0
    else:
        lam = math.sqrt(pencil.lambda_min) if pencil.lambda_min_feasible else math.inf

    P_Bs = range_projection(adjoint(B), tol)
    residuals = {
        "factor_residual": float(np.linalg.norm(B @ C - T, "fro") / max(1.0, np.linalg.norm(T, "fro"))),
        "norm_slack": spectral_norm(C) - lam,
        "majorization_slack": _majorization_gap(T, B, lam),
        "range_residual": float(np.linalg.norm(C - P_Bs @ C, "fro") / max(1.0, np.linalg.norm(C, "fro"))),
    }
    return DouglasCertificate(lam, C, residuals)


def _majorization_gap(T: np.ndarray, B: np.ndarray, lam: float) -> float:
    TT = hermitize(T @ adjoint(T))
    BB = hermitize(B @ adjoint(B))
    if not math.isfinite(lam):
        return -math.inf
    scale = max(spectral_norm(TT), lam * lam * spectral_norm(BB), 1e-300)
    return float(np.linalg.eigvalsh(lam * lam * BB - TT)[0]) / scale


def douglas_equivalence_check(T, B, tol: Tolerance = DEFAULT_TOL) -> DouglasEquivalence:
    """Evaluate the three equivalent conditions independently."""
    T, B = _outputs(T, B)
    inc = range_inclusion(T, B, tol)
    pencil = pencil_extremes(hermitize(T @ adjoint(T)), hermitize(B @ adjoint(B)), tol)
    maj = pencil.lambda_min_feasible
    try:
        cert = douglas_factor(T, B, tol)
        fac = bool(
            cert.residuals["factor_residual"] <= tol.residual_rel
            and spectral_norm(cert.factor_c) <= cert.lambda_min * (1 + NORM_REL_SLACK) + tol.residual_rel
        )
    except RangeNotIncluded:
        fac = False
    note = "" if inc == maj == fac else f"disagreement inc={inc} maj={maj} fac={fac}"
    return DouglasEquivalence(inc, maj, fac, note)


def verify_douglas_certificate(T, B, cert: DouglasCertificate, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """Re-check ``BC = T``, ``||C|| <= lam``, majorization and minimality of ``lam``."""
    rep = VerificationReport()
    try:
        T, B = _outputs(T, B)
        C = as_matrix(cert.factor_c, "factor_c")
        if C.shape != (B.shape[1], T.shape[1]):
            raise DimensionMismatch(f"C has shape {C.shape}, expected {(B.shape[1], T.shape[1])}")
    except (ValueError, TypeError) as exc:
        rep.add("well_formed", False, note=str(exc))
        return rep
    lam = float(cert.lambda_min)
    if not (math.isfinite(lam) and lam >= 0):
        rep.add("lambda_valid", False, lam, 0.0, "lambda must be finite and nonnegative")
        return rep

    res = np.linalg.norm(B @ C - T, "fro") / max(1.0, np.linalg.norm(T, "fro"))
    rep.add("factor", res <= tol.residual_rel, res, tol.residual_rel, "BC = T")
    norm_c = spectral_norm(C)
    bound = lam * (1 + NORM_REL_SLACK)
    rep.add("c_norm", norm_c <= bound, norm_c, bound)
    P_Bs = range_projection(adjoint(B), tol)
    rng = np.linalg.norm(C - P_Bs @ C, "fro")
    rng_bound = tol.residual_rel * max(1.0, np.linalg.norm(C, "fro"))
    rep.add("range", rng <= rng_bound, rng, rng_bound, "ran C ⊆ ran B*")

    TT = hermitize(T @ adjoint(T))
    BB = hermitize(B @ adjoint(B))
    rep.add("majorization", loewner_leq(TT, lam * lam * BB, tol), _majorization_gap(T, B, lam), -tol.eig_rel,
            "TT* <= lam^2 BB*")
    if lam > 0:
        eps = MINIMALITY_REL_EPS * (1 + lam * lam)
        minimal = not loewner_leq(TT, (lam * lam - eps) * BB, tol)
        rep.add("lambda_minimal", minimal, lam * lam - eps, lam * lam, "TT* <= (lam^2 - eps) BB* must fail")
    else:
        rep.add("lambda_minimal", np.linalg.norm(T, "fro") == 0.0, np.linalg.norm(T, "fro"), 0.0, "lam = 0 needs T = 0")
    return rep
