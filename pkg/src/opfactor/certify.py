"""Check-and-construct pipelines producing certificate files, and their verification."""

from __future__ import annotations

import math

import numpy as np

from . import douglas, reversed as rev, sebestyen
from .errors import Infeasible
from .io import CertificateFile
from .linalg import DEFAULT_TOL, Tolerance, adjoint, hermitize, range_projection, spectral_norm
from .report import VerificationReport

__all__ = ["run_check", "verify_file"]


def _finite(d: dict[str, float]) -> dict[str, float]:
    return {k: float(v) for k, v in d.items() if math.isfinite(v)}


def run_check(mode: str, T, B, tol: Tolerance = DEFAULT_TOL) -> CertificateFile:
    """Run the ``mode`` pipeline on ``(T, B)`` and package the outcome."""
    T = np.asarray(T, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if mode == "sebestyen":
        try:
            cert = sebestyen.construct_X(T, B, tol)
        except Infeasible as exc:
            return _infeasible(mode, T, B, tol, exc.reason, exc.witness)
        payload = {
            "lambda_min": float(cert.lambda_min),
            "gram": cert.gram,
            "factor_x": cert.factor_x,
            "intermediate_h": cert.intermediate_h,
        }
        return CertificateFile(mode, "feasible", T, B, tol, payload, None, _finite(cert.residuals))
    if mode == "douglas":
        try:
            cert = douglas.douglas_factor(T, B, tol)
        except Infeasible as exc:
            return _infeasible(mode, T, B, tol, exc.reason, exc.witness, getattr(exc, "column", None))
        payload = {"lambda_min": float(cert.lambda_min), "factor_c": cert.factor_c}
        return CertificateFile(mode, "feasible", T, B, tol, payload, None, _finite(cert.residuals))
    if mode == "reversed":
        try:
            cert = rev.construct_Y(T, B, tol)
        except Infeasible as exc:
            return _infeasible(mode, T, B, tol, exc.reason, exc.witness)
        verdict = "unconstrained" if cert.m_max == rev.UNCONSTRAINED else "feasible"
        payload = {
            "m_max": cert.m_max if verdict == "unconstrained" else float(cert.m_max),
            "factor_y": cert.factor_y,
            "projector_t": cert.projector_t,
            "borderline": bool(cert.borderline),
        }
        return CertificateFile(mode, verdict, T, B, tol, payload, None, _finite(cert.residuals))
    raise ValueError(f"unknown mode {mode!r}")


def _infeasible(mode, T, B, tol, reason, witness, column=None) -> CertificateFile:
    w = {"reason": reason, "vector": np.asarray(witness, dtype=complex).ravel(), "column": column}
    return CertificateFile(mode, "infeasible", T, B, tol, None, w)


def verify_file(cf: CertificateFile) -> VerificationReport:
    """Independently re-verify a parsed certificate file."""
    T, B, tol = cf.t_matrix, cf.b_matrix, cf.tolerance
    if cf.verdict == "infeasible":
        return _verify_witness(cf)
    p = cf.payload
    if cf.mode == "sebestyen":
        cert = sebestyen.SebestyenCertificate(p["lambda_min"], p["gram"], p["factor_x"], p["intermediate_h"])
        return sebestyen.verify_forward_certificate(T, B, cert, tol)
    if cf.mode == "douglas":
        cert = douglas.DouglasCertificate(p["lambda_min"], p["factor_c"])
        return douglas.verify_douglas_certificate(T, B, cert, tol)
    cert = rev.ReversedCertificate(p["m_max"], p["factor_y"], p["projector_t"], borderline=p["borderline"])
    return rev.verify_reversed_certificate(T, B, cert, tol)


def _verify_witness(cf: CertificateFile) -> VerificationReport:
    """An infeasible verdict is accepted when a fresh check agrees and the witness shows the failure."""
    rep = VerificationReport()
    T, B, tol = cf.t_matrix, cf.b_matrix, cf.tolerance
    reason = cf.witness["reason"]
    f = np.asarray(cf.witness["vector"], dtype=complex)
    try:
        if cf.mode == "douglas":
            fresh = not douglas.range_inclusion(T, B, tol)
        elif cf.mode == "sebestyen":
            fresh = not sebestyen.check_forward(T, B, tol).feasible
        else:
            fresh = not rev.check_reversed(T, B, tol).feasible
    except ValueError as exc:
        rep.add("well_formed", False, note=str(exc))
        return rep
    rep.add("recheck_infeasible", fresh, note="independent re-run agrees")

    if cf.mode == "douglas":
        col = cf.witness["column"]
        ok_col = isinstance(col, int) and 0 <= col < T.shape[1] and f.shape == (T.shape[0],)
        if not ok_col:
            rep.add("witness", False, note="witness column out of range")
            return rep
        same = np.array_equal(f, T[:, col])
        out = float(np.linalg.norm(f - range_projection(B, tol) @ f))
        bound = tol.residual_rel * max(1.0, float(np.linalg.norm(T, "fro")))
        rep.add("witness", same and out > bound, out, bound, "column of T outside ran B")
        return rep

    if f.shape != (T.shape[1],) or np.linalg.norm(f) == 0:
        rep.add("witness", False, note="witness has wrong shape or is zero")
        return rep
    f = f / np.linalg.norm(f)
    raw = adjoint(B) @ T
    M = hermitize(raw)
    q = complex(np.vdot(f, raw @ f))
    norm_m = spectral_norm(M)
    if reason == "indefinite":
        rep.add("witness", q.real < -tol.eig_rel * norm_m, q.real, -tol.eig_rel * norm_m, "Re (Tf, Bf) < 0")
    elif reason == "non-hermitian":
        bound = tol.eig_rel * max(1.0, float(np.linalg.norm(raw, "fro")))
        rep.add("witness", abs(q.imag) > bound, abs(q.imag), bound, "(Tf, Bf) not real")
    elif reason == "kernel" and cf.mode == "sebestyen":
        mf = float(np.linalg.norm(M @ f))
        tf = float(np.linalg.norm(T @ f))
        m_bound = tol.residual_rel * max(1.0, norm_m)
        t_bound = tol.residual_rel * float(np.linalg.norm(T, "fro"))
        rep.add("witness", mf <= m_bound and tf > t_bound, tf, t_bound, "Mf = 0 but Tf != 0")
    elif reason == "kernel":
        tf = float(np.linalg.norm(T @ f))
        t_bound = tol.residual_rel * max(1.0, float(np.linalg.norm(T, "fro")))
        rep.add("witness", tf <= t_bound and q.real > tol.eig_rel * norm_m, q.real, tol.eig_rel * norm_m,
                "Tf = 0 but (Tf, Bf) > 0")
    else:
        rep.add("witness", False, note=f"unknown witness reason {reason!r}")
    return rep
