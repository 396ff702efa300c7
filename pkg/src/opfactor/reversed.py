"""The reversed inequality ``||Tf||^2 >= m (Tf, Bf) >= 0``.

It holds for some ``m > 0`` exactly when a PSD ``Y`` satisfies
``Y T = P_T B``, ``P_T`` being the projector onto ``ran T``.  The canonical
``Y = (T^+)* M T^+`` vanishes on ``(ran T)^⊥`` and has ``||Y|| = 1/m_max``.
If the form ``(T., B.)`` vanishes identically there is no constraint on
``m`` and ``Y = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DimensionMismatch, Infeasible
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    adjoint,
    as_matrix,
    hermitize,
    loewner_leq,
    pencil_extremes,
    pseudoinverse,
    psd_min_eig,
    range_projection,
    spectral_norm,
)
from .partial import PartialOperator, compose, includes
from .report import VerificationReport

__all__ = [
    "UNCONSTRAINED",
    "ReversedCertificate",
    "ReversedCheck",
    "check_reversed",
    "classify_pencil",
    "construct_Y",
    "verify_reversed_certificate",
]

UNCONSTRAINED = "unconstrained"
NORM_REL_SLACK = 1e-8
MAXIMALITY_REL_EPS = 1e-6
# m_max within this many eig_rel units of zero is flagged as borderline
BORDERLINE_FACTOR = 1e3

MValue = Union[float, str]


@dataclass(frozen=True, eq=False)
class ReversedCertificate:
    m_max: MValue
    factor_y: np.ndarray
    projector_t: np.ndarray
    residuals: dict[str, float] = field(default_factory=dict)
    borderline: bool = False


@dataclass(frozen=True, eq=False)
class ReversedCheck:
    feasible: bool
    m_max: MValue
    witness: np.ndarray | None
    reason: str = ""
    gram: np.ndarray | None = None
    hermitian_defect: float = 0.0
    borderline: bool = False


def _pair(T, B) -> tuple[np.ndarray, np.ndarray]:
    T = as_matrix(T, "T")
    B = as_matrix(B, "B")
    if T.shape != B.shape:
        raise DimensionMismatch(f"T and B must have the same shape, got {T.shape} and {B.shape}")
    return T, B


def _gram(T: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    raw = adjoint(B) @ T
    defect = np.linalg.norm(raw - adjoint(raw), "fro") / max(1.0, np.linalg.norm(raw, "fro"))
    return raw, hermitize(raw), float(defect)


def _is_zero_form(M: np.ndarray, T: np.ndarray, B: np.ndarray, tol: Tolerance) -> bool:
    size = np.linalg.norm(T, "fro") * np.linalg.norm(B, "fro")
    return bool(np.linalg.norm(M, "fro") <= tol.residual_rel * size)


def _kernel_witness(A: np.ndarray, M: np.ndarray, tol: Tolerance) -> np.ndarray:
    # f in ker A maximizing f*Mf: then f*(A - mM)f < 0 for every m > 0
    w, V = np.linalg.eigh(A)
    N = V[:, w <= tol.rank_rel * max(w[-1], 0.0)]
    if N.shape[1] == 0:
        N = V[:, :1]
    mu, Z = np.linalg.eigh(hermitize(adjoint(N) @ M @ N))
    return N @ Z[:, -1]


def classify_pencil(A, M, tol: Tolerance = DEFAULT_TOL) -> ReversedCheck:
    """Reversed-inequality verdict for the pencil ``A = T*T``, ``M = Re(Tf, Bf)``.

    Feasible iff ``M`` is PSD and either ``m_max > 0`` or ``M = 0``.
    """
    A = hermitize(as_matrix(A, "A"))
    M = hermitize(as_matrix(M, "M"))
    psd = psd_min_eig(M, tol)
    if not psd.is_psd:
        return ReversedCheck(False, 0.0, psd.witness, "indefinite", M)
    pencil = pencil_extremes(A, M, tol)
    if pencil.unconstrained:
        return ReversedCheck(True, UNCONSTRAINED, None, "", M)
    m = pencil.m_max
    if m <= 0.0:
        return ReversedCheck(False, 0.0, _kernel_witness(A, M, tol), "kernel", M)
    borderline = m * spectral_norm(M) <= BORDERLINE_FACTOR * tol.eig_rel * spectral_norm(A)
    return ReversedCheck(True, m, None, "", M, borderline=bool(borderline))


def check_reversed(T, B, tol: Tolerance = DEFAULT_TOL) -> ReversedCheck:
    """Decide ``||Tf||^2 >= m (Tf, Bf) >= 0`` for some ``m > 0``; report the largest ``m``."""
    T, B = _pair(T, B)
    raw, M, defect = _gram(T, B)
    if defect > tol.eig_rel:
        K = (raw - adjoint(raw)) / 2j
        w, V = np.linalg.eigh(K)
        return ReversedCheck(False, 0.0, V[:, int(np.argmax(np.abs(w)))], "non-hermitian", M, defect)
    if _is_zero_form(M, T, B, tol):
        return ReversedCheck(True, UNCONSTRAINED, None, "", M, defect)
    res = classify_pencil(hermitize(adjoint(T) @ T), M, tol)
    return ReversedCheck(res.feasible, res.m_max, res.witness, res.reason, M, defect, res.borderline)


def construct_Y(T, B, tol: Tolerance = DEFAULT_TOL) -> ReversedCertificate:
    """``Y = (T^+)* M T^+`` with ``Y T = P_T B`` and ``||Y|| <= 1/m_max``.

    Raises
    ------
    Infeasible
        With the witness of ``check_reversed``.
    """
    T, B = _pair(T, B)
    chk = check_reversed(T, B, tol)
    if not chk.feasible:
        raise Infeasible(f"reversed inequality fails ({chk.reason})", chk.witness, chk.reason)
    P_T = range_projection(T, tol)
    n = T.shape[0]
    if chk.m_max == UNCONSTRAINED:
        Y = np.zeros((n, n), dtype=complex)
    else:
        Tp = pseudoinverse(T, tol)
        Y = hermitize(adjoint(Tp) @ chk.gram @ Tp)
    PB = P_T @ B
    residuals = {
        "inclusion_residual": float(np.linalg.norm(Y @ T - PB, "fro") / max(1.0, np.linalg.norm(B, "fro"))),
        "norm_slack": spectral_norm(Y) - (1.0 / chk.m_max if chk.m_max != UNCONSTRAINED else 0.0),
        "form_dominance_slack": _form_dominance_gap(chk.gram, PB, chk.m_max),
        "hermitian_defect": chk.hermitian_defect,
    }
    return ReversedCertificate(chk.m_max, Y, P_T, residuals, chk.borderline)


def _form_dominance_gap(M: np.ndarray, PB: np.ndarray, m: MValue) -> float:
    # min eig of M - m (P_T B)*(P_T B), relative
    if m == UNCONSTRAINED:
        return 0.0
    G = hermitize(adjoint(PB) @ PB)
    scale = max(spectral_norm(M), m * spectral_norm(G), 1e-300)
    return float(np.linalg.eigvalsh(M - m * G)[0]) / scale


def verify_reversed_certificate(T, B, cert: ReversedCertificate, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """Re-check ``Y >= 0``, ``YT = P_T B``, ``||Y|| <= 1/m`` and the bound chain.

    The chain is ``m^2 (P_T B)*(P_T B) <= m M <= T*T``; maximality of ``m``
    is checked by requiring ``(m + eps) M <= T*T`` to fail.
    """
    rep = VerificationReport()
    try:
        T, B = _pair(T, B)
        Y = as_matrix(cert.factor_y, "factor_y")
        P_stored = as_matrix(cert.projector_t, "projector_t")
        n = T.shape[0]
        if Y.shape != (n, n) or P_stored.shape != (n, n):
            raise DimensionMismatch("certificate matrices have wrong shapes")
    except (ValueError, TypeError) as exc:
        rep.add("well_formed", False, note=str(exc))
        return rep
    m = cert.m_max
    if m != UNCONSTRAINED and not (isinstance(m, (int, float)) and math.isfinite(m) and m > 0):
        rep.add("m_valid", False, note=f"m must be positive or {UNCONSTRAINED!r}, got {m!r}")
        return rep

    raw, M, defect = _gram(T, B)
    rep.add("hermitian_defect", defect <= tol.eig_rel, defect, tol.eig_rel)
    P_T = range_projection(T, tol)
    p_err = np.linalg.norm(P_stored - P_T, "fro")
    rep.add("projector_matches", p_err <= tol.residual_rel * max(1.0, np.linalg.norm(P_T, "fro")), p_err,
            tol.residual_rel)

    psd = psd_min_eig(Y, tol)
    rep.add("y_psd", psd.is_psd, psd.min_eig, -tol.eig_rel * spectral_norm(Y))
    PB = P_T @ B
    incl = np.linalg.norm(Y @ T - PB, "fro")
    incl_bound = tol.residual_rel * max(1.0, np.linalg.norm(B, "fro"))
    literal = includes(compose(PartialOperator.full(Y), PartialOperator.full(T), tol), PartialOperator.full(PB), tol)
    rep.add("inclusion", literal and incl <= incl_bound, incl, incl_bound, "YT ⊆ P_T B")
    off = np.linalg.norm(Y - P_T @ Y, "fro")
    rep.add("range", off <= tol.residual_rel * max(1.0, np.linalg.norm(Y, "fro")), off, tol.residual_rel,
            "ran Y ⊆ ran T")

    norm_y = spectral_norm(Y)
    TT = hermitize(adjoint(T) @ T)
    if m == UNCONSTRAINED:
        rep.add("zero_form", _is_zero_form(M, T, B, tol), np.linalg.norm(M, "fro"), 0.0, "(Tf, Bf) = 0")
        rep.add("y_norm", norm_y <= tol.residual_rel, norm_y, tol.residual_rel, "Y = 0")
        return rep

    m = float(m)
    bound = (1.0 / m) * (1 + NORM_REL_SLACK)
    rep.add("y_norm", norm_y <= bound, norm_y, bound, "||Y|| <= 1/m")
    m_psd = psd_min_eig(M, tol)
    rep.add("form_nonneg", m_psd.is_psd, m_psd.min_eig, 0.0, "(Tf, Bf) >= 0")
    rep.add("reversed_bound", loewner_leq(m * M, TT, tol), m, m, "m M <= T*T")
    G = hermitize(adjoint(PB) @ PB)
    rep.add("form_dominance", loewner_leq(m * G, M, tol), _form_dominance_gap(M, PB, m), -tol.eig_rel, "m (P_T B)*(P_T B) <= M")
    chain = loewner_leq(m * m * G, m * M, tol) and loewner_leq(m * M, TT, tol)
    rep.add("chain", chain, m, m, "m^2 (P_T B)*(P_T B) <= m M <= T*T")
    eps = MAXIMALITY_REL_EPS * (1 + m)
    rep.add("m_maximal", not loewner_leq((m + eps) * M, TT, tol), m + eps, m, "(m + eps) M <= T*T must fail")
    return rep
