"""Nonnegative factorizations ``T = XB``.

For operators ``T, B`` with the same shape the pointwise inequality

    ||Tf||^2 <= lam * (Tf, Bf)        for every f

holds for some ``lam >= 0`` exactly when there is a PSD ``X`` with
``||X|| <= lam`` and ``XB = T``.  This module decides the inequality,
computes the least ``lam``, builds ``X = T M^+ T*`` from the Gram operator
``M`` of the form ``(T., B.)`` and the intermediate operator ``H = B* X B``
with ``T*T <= lam H <= lam^2 B*B``.

Inner products are linear in the first argument, ``(u, v) = v* u``, so the
form ``(Tf, Bg)`` has Gram matrix ``B* T``.  Only its Hermitian part enters
the decisions, which equals that of ``T* B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, Infeasible, NotPsd
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
    "SebestyenCertificate",
    "ForwardCheck",
    "gram_operator",
    "check_forward",
    "construct_X",
    "intermediate_H",
    "verify_forward_certificate",
]

NORM_REL_SLACK = 1e-8
MINIMALITY_REL_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class SebestyenCertificate:
    lambda_min: float
    gram: np.ndarray
    factor_x: np.ndarray
    intermediate_h: np.ndarray
    residuals: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class ForwardCheck:
    """Outcome of ``check_forward``.

    ``reason`` is empty when feasible, otherwise one of ``"indefinite"``
    (``f*Mf < 0``), ``"kernel"`` (``Mf = 0`` but ``Tf != 0``) or
    ``"non-hermitian"`` (``(Tf, Bf)`` is not real).
    """

    feasible: bool
    lambda_min: float
    witness: np.ndarray | None
    reason: str = ""
    gram: np.ndarray | None = None
    hermitian_defect: float = 0.0


def _pair(T, B) -> tuple[np.ndarray, np.ndarray]:
    T = as_matrix(T, "T")
    B = as_matrix(B, "B")
    if T.shape != B.shape:
        raise DimensionMismatch(f"T and B must have the same shape, got {T.shape} and {B.shape}")
    return T, B


def gram_operator(T, B, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, float]:
    """Hermitized ``T* B`` and the relative size of its anti-Hermitian part."""
    T, B = _pair(T, B)
    raw = adjoint(T) @ B
    defect = np.linalg.norm(raw - adjoint(raw), "fro") / max(1.0, np.linalg.norm(raw, "fro"))
    return hermitize(raw), float(defect)


def _kernel_witness(T: np.ndarray, M: np.ndarray, tol: Tolerance) -> np.ndarray:
    # unit f in ker M maximizing ||Tf||
    w, V = np.linalg.eigh(M)
    cutoff = tol.rank_rel * max(w[-1], 0.0)
    N = V[:, w <= cutoff]
    if N.shape[1] == 0:
        N = V[:, :1]
    _, _, Vh = np.linalg.svd(T @ N)
    return N @ Vh[0].conj()


def _antihermitian_witness(T: np.ndarray, B: np.ndarray) -> np.ndarray:
    raw = adjoint(B) @ T
    K = (raw - adjoint(raw)) / 2j
    w, V = np.linalg.eigh(K)
    return V[:, int(np.argmax(np.abs(w)))]


def check_forward(T, B, tol: Tolerance = DEFAULT_TOL) -> ForwardCheck:
    """Decide ``||Tf||^2 <= lam (Tf, Bf)`` for some ``lam`` and find the least one."""
    T, B = _pair(T, B)
    M, defect = gram_operator(T, B, tol)
    psd = psd_min_eig(M, tol)
    if not psd.is_psd:
        return ForwardCheck(False, math.inf, psd.witness, "indefinite", M, defect)

    norm_t = np.linalg.norm(T, "fro")
    off_kernel = T - T @ (pseudoinverse(M, tol) @ M)
    kernel_ok = np.linalg.norm(off_kernel, "fro") <= tol.residual_rel * norm_t
    pencil = pencil_extremes(hermitize(adjoint(T) @ T), M, tol) if kernel_ok else None
    if pencil is None or not pencil.lambda_min_feasible:
        return ForwardCheck(False, math.inf, _kernel_witness(T, M, tol), "kernel", M, defect)

    if defect > tol.eig_rel:
        return ForwardCheck(False, math.inf, _antihermitian_witness(T, B), "non-hermitian", M, defect)
    return ForwardCheck(True, pencil.lambda_min, None, "", M, defect)


def intermediate_H(B, X, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``H = B* X B``, equivalently ``(X^{1/2} B)* (X^{1/2} B)``."""
    B = as_matrix(B, "B")
    X = as_matrix(X, "X")
    if X.shape != (B.shape[0], B.shape[0]):
        raise DimensionMismatch(f"X must be {B.shape[0]}x{B.shape[0]}, got {X.shape}")
    if not psd_min_eig(X, tol).is_psd:
        raise NotPsd("X is not Hermitian PSD")
    return hermitize(adjoint(B) @ X @ B)


def _sandwich_gaps(T, B, H, lam) -> tuple[float, float, float]:
    TT = hermitize(adjoint(T) @ T)
    BB = hermitize(adjoint(B) @ B)
    lower = lam * H - TT
    upper = lam * lam * BB - lam * H
    scale = max(spectral_norm(TT), lam * spectral_norm(H), lam * lam * spectral_norm(BB), 1e-300)
    lo = float(np.linalg.eigvalsh(hermitize(lower))[0]) if lower.size else 0.0
    up = float(np.linalg.eigvalsh(hermitize(upper))[0]) if upper.size else 0.0
    return lo, up, scale


def construct_X(T, B, tol: Tolerance = DEFAULT_TOL) -> SebestyenCertificate:
    """Build ``X = T M^+ T*`` with ``XB = T`` and ``||X|| = lambda_min``.

    Raises
    ------
    Infeasible
        When the inequality fails; carries the witness vector.
    """
    T, B = _pair(T, B)
    chk = check_forward(T, B, tol)
    if not chk.feasible:
        raise Infeasible(f"forward inequality fails ({chk.reason})", chk.witness, chk.reason)
    M = chk.gram
    X = hermitize(T @ pseudoinverse(M, tol) @ adjoint(T))
    H = intermediate_H(B, X, tol)
    lam = chk.lambda_min

    norm_x = spectral_norm(X)
    P_T = range_projection(T, tol)
    lo, up, scale = _sandwich_gaps(T, B, H, lam)
    residuals = {
        "inclusion_residual": float(np.linalg.norm(X @ B - T, "fro") / max(1.0, np.linalg.norm(T, "fro"))),
        "range_residual": float(np.linalg.norm(X - P_T @ X, "fro") / max(np.linalg.norm(X, "fro"), 1e-300)),
        "psd_slack": float(np.linalg.eigvalsh(X)[0]),
        "norm_slack": norm_x - lam,
        "sandwich_slack": min(lo, up) / scale,
        "hermitian_defect": chk.hermitian_defect,
    }
    return SebestyenCertificate(lam, M, X, H, residuals)


def verify_forward_certificate(
    T, B, cert: SebestyenCertificate, tol: Tolerance = DEFAULT_TOL
) -> VerificationReport:
    """Re-check every claim of ``cert`` from the raw matrices.

    Nothing stored in the certificate is trusted: ``M`` and ``H`` are
    recomputed and compared with the stored copies.
    """
    rep = VerificationReport()
    try:
        T, B = _pair(T, B)
        X = as_matrix(cert.factor_x, "factor_x")
        H_stored = as_matrix(cert.intermediate_h, "intermediate_h")
        M_stored = as_matrix(cert.gram, "gram")
        n_out, n_in = T.shape
        if X.shape != (n_out, n_out) or H_stored.shape != (n_in, n_in) or M_stored.shape != (n_in, n_in):
            raise DimensionMismatch("certificate matrices have wrong shapes")
    except (ValueError, TypeError) as exc:
        rep.add("well_formed", False, note=str(exc))
        return rep
    lam = float(cert.lambda_min)
    if not (math.isfinite(lam) and lam >= 0):
        rep.add("lambda_valid", False, lam, 0.0, "lambda must be finite and nonnegative")
        return rep

    M, defect = gram_operator(T, B, tol)
    rep.add("hermitian_defect", defect <= tol.eig_rel, defect, tol.eig_rel)
    gram_err = np.linalg.norm(M_stored - M, "fro") / max(1.0, np.linalg.norm(M, "fro"))
    rep.add("gram_matches", gram_err <= tol.residual_rel, gram_err, tol.residual_rel)

    psd = psd_min_eig(X, tol)
    rep.add("x_psd", psd.is_psd, psd.min_eig, -tol.eig_rel * spectral_norm(X))
    norm_x = spectral_norm(X)
    rep.add("x_norm", norm_x <= lam * (1 + NORM_REL_SLACK), norm_x, lam * (1 + NORM_REL_SLACK))

    incl = np.linalg.norm(X @ B - T, "fro") / max(1.0, np.linalg.norm(T, "fro"))
    literal = includes(compose(PartialOperator.full(X), PartialOperator.full(B), tol), PartialOperator.full(T), tol)
    rep.add("inclusion", literal and incl <= tol.residual_rel, incl, tol.residual_rel, "XB ⊆ T")

    P_T = range_projection(T, tol)
    rng = np.linalg.norm(X - P_T @ X, "fro")
    rng_bound = tol.residual_rel * np.linalg.norm(X, "fro")
    rep.add("range", rng <= rng_bound, rng, rng_bound, "ran X ⊆ ran T")

    H = hermitize(adjoint(B) @ X @ B)
    h_err = np.linalg.norm(H_stored - H, "fro")
    h_bound = tol.residual_rel * max(1.0, np.linalg.norm(H, "fro"))
    rep.add("h_matches", h_err <= h_bound, h_err, h_bound, "H = B*XB")
    collapse = np.linalg.norm(H - M, "fro")
    collapse_bound = tol.residual_rel * max(np.linalg.norm(H, "fro"), np.linalg.norm(M, "fro"))
    rep.add("h_collapse", collapse <= collapse_bound, collapse, collapse_bound, "T*B = H = B*T")

    TT = hermitize(adjoint(T) @ T)
    BB = hermitize(adjoint(B) @ B)
    lo, up, scale = _sandwich_gaps(T, B, H, lam)
    rep.add("sandwich_lower", loewner_leq(TT, lam * H, tol), lo / scale, -tol.eig_rel, "T*T <= lam H")
    rep.add("sandwich_upper", loewner_leq(H, lam * BB, tol), up / scale, -tol.eig_rel, "H <= lam B*B")
    m_psd = psd_min_eig(M, tol)
    rep.add("form_bounds", m_psd.is_psd and loewner_leq(M, lam * BB, tol), m_psd.min_eig, 0.0, "0 <= M <= lam B*B")

    if lam > 0:
        eps = MINIMALITY_REL_EPS * (1 + lam)
        minimal = not loewner_leq(TT, (lam - eps) * H, tol)
        rep.add("lambda_minimal", minimal, lam - eps, lam, "T*T <= (lam - eps) H must fail")
    else:
        rep.add("lambda_minimal", np.linalg.norm(T, "fro") == 0.0, np.linalg.norm(T, "fro"), 0.0, "lam = 0 needs T = 0")
    return rep
