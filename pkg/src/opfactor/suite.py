"""Seeded property sweeps over the factorization equivalences, and the scaling table."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import douglas, reversed as rev, sebestyen
from .errors import Infeasible, InvalidSpec
from .instances import InstanceSpec, gen_instance, haar_unitary, rng_for
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    adjoint,
    hermitize,
    loewner_leq,
    null_basis,
    pencil_extremes,
    psd_min_eig,
    spectral_norm,
)

__all__ = ["PropertyStats", "SuiteReport", "property_suite", "forward_equivalences", "scaling_report",
           "scaling_csv"]


@dataclass
class PropertyStats:
    passed: int = 0
    failed: int = 0
    # most adverse measured slack; larger is better
    worst_slack: float = math.inf
    first_failure: str = ""

    def record(self, ok: bool, slack: float = math.inf, where: str = "") -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if not self.first_failure:
                self.first_failure = where
        if not math.isnan(slack):
            self.worst_slack = min(self.worst_slack, slack)


@dataclass
class SuiteReport:
    properties: dict[str, PropertyStats] = field(default_factory=dict)
    lambdas: list[float] = field(default_factory=list)

    def stat(self, name: str) -> PropertyStats:
        return self.properties.setdefault(name, PropertyStats())

    @property
    def failures(self) -> int:
        return sum(s.failed for s in self.properties.values())

    def summary(self) -> str:
        width = max([len(k) for k in self.properties] + [8])
        lines = [f"{'property':<{width}}  {'pass':>5}  {'fail':>5}  {'worst slack':>12}"]
        for name, s in self.properties.items():
            slack = "-" if math.isinf(s.worst_slack) else f"{s.worst_slack:.3e}"
            line = f"{name:<{width}}  {s.passed:>5}  {s.failed:>5}  {slack:>12}"
            if s.first_failure:
                line += f"  first failure: {s.first_failure}"
            lines.append(line)
        return "\n".join(lines)


def forward_equivalences(T, B, tol: Tolerance = DEFAULT_TOL) -> dict[str, bool | float]:
    """Evaluate the four equivalent forms of the forward inequality separately.

    pointwise
        ``||Tf||^2 <= lam (Tf, Bf)`` for some ``lam``, i.e. ``check_forward``.
    sandwich
        ``T*T <= lam H <= lam^2 B*B`` with ``H`` the Hermitized ``T*B``.
    lower
        ``T*T <= lam H`` alone.
    factor
        ``construct_X`` succeeds and its certificate verifies.
    """
    T = np.asarray(T, dtype=complex)
    B = np.asarray(B, dtype=complex)
    chk = sebestyen.check_forward(T, B, tol)
    H, defect = sebestyen.gram_operator(T, B, tol)
    TT = hermitize(adjoint(T) @ T)
    BB = hermitize(adjoint(B) @ B)

    lower = sandwich = False
    lam = math.inf
    if defect <= tol.eig_rel and psd_min_eig(H, tol).is_psd:
        pencil = pencil_extremes(TT, H, tol)
        if pencil.lambda_min_feasible:
            lam = pencil.lambda_min
            lower = loewner_leq(TT, lam * H, tol)
            sandwich = lower and loewner_leq(lam * H, lam * lam * BB, tol)
    try:
        cert = sebestyen.construct_X(T, B, tol)
        factor = sebestyen.verify_forward_certificate(T, B, cert, tol).passed
    except Infeasible:
        factor = False
    return {"pointwise": chk.feasible, "sandwich": sandwich, "lower": lower, "factor": factor, "lambda": lam}


def _forward_feasible_props(rep: SuiteReport, inst, tol: Tolerance) -> None:
    T, B, X0 = inst.T, inst.B, inst.ground_truth
    where = f"forward-feasible #{inst.index} (n={T.shape[0]})"
    chk = sebestyen.check_forward(T, B, tol)
    x0 = spectral_norm(X0)
    rep.stat("forward: X0 B instances feasible").record(chk.feasible and chk.lambda_min <= x0 + 1e-8,
                                                      x0 + 1e-8 - chk.lambda_min, where)
    if not chk.feasible:
        return
    lam = chk.lambda_min
    rep.lambdas.append(lam)
    cert = sebestyen.construct_X(T, B, tol)
    vr = sebestyen.verify_forward_certificate(T, B, cert, tol)
    rep.stat("forward: certificates verify").record(vr.passed, -cert.residuals["inclusion_residual"], where)

    TT = hermitize(adjoint(T) @ T)
    BB = hermitize(adjoint(B) @ B)
    H = cert.intermediate_h
    rep.stat("forward: T*T <= lam H with H = B*XB").record(loewner_leq(TT, lam * H, tol),
                                                         cert.residuals["sandwich_slack"], where)
    rep.stat("forward: H <= lam B*B").record(loewner_leq(H, lam * BB, tol), math.inf, where)

    if lam > 0:
        eps = 1e-6 * (1 + lam)
        rep.stat("forward: lambda minimal").record(not loewner_leq(TT, (lam - eps) * H, tol), math.inf, where)

    # T*T <= lam H with H = Herm(T*B) >= 0 gives the pointwise bound, tested on vectors
    M = cert.gram
    raw = adjoint(B) @ T
    rng = rng_for(inst.spec, 10_000 + inst.index)
    n = T.shape[1]
    vecs = np.hstack([np.eye(n), rng.standard_normal((n, 8)) + 1j * rng.standard_normal((n, 8))])
    worst = math.inf
    ok = loewner_leq(TT, lam * M, tol)
    for f in vecs.T:
        lhs = float(np.linalg.norm(T @ f) ** 2)
        rhs = lam * float(np.vdot(f, raw @ f).real)
        slack = rhs - lhs + 1e-8 * max(1.0, lam * spectral_norm(M)) * float(np.vdot(f, f).real)
        worst = min(worst, slack)
        ok = ok and slack >= 0
    rep.stat("forward: T*T <= lam H implies pointwise bound").record(ok, worst, where)

    # B -> cB divides lambda by c and keeps XB = T literally
    c = 2.5
    chk_c = sebestyen.check_forward(T, c * B, tol)
    cert_c = sebestyen.construct_X(T, c * B, tol)
    lit = np.linalg.norm(cert_c.factor_x @ (c * B) - T, "fro") / max(1.0, np.linalg.norm(T, "fro"))
    rel = abs(chk_c.lambda_min - lam / c) / max(lam / c, 1e-300) if lam > 0 else chk_c.lambda_min
    rep.stat("forward: lambda(T, cB) = lambda/c").record(chk_c.feasible and rel <= 1e-8 and lit <= tol.residual_rel,
                                                          -rel, where)

    # kernel law: f*Mf small forces Tf small, and ker M = ker T
    small = 1e-9
    imp = True
    for f in vecs.T:
        f = f / np.linalg.norm(f)
        if abs(np.vdot(f, M @ f)) <= small:
            imp = imp and np.linalg.norm(T @ f) <= math.sqrt(lam * small) * (1 + 1e-6) + 1e-12
    NM, NT = null_basis(M, tol), null_basis(T, tol)
    same = NM.shape[1] == NT.shape[1] and (
        NM.shape[1] == 0 or np.linalg.norm(NM - NT @ (adjoint(NT) @ NM)) <= 1e-6
    )
    rep.stat("forward: ker M = ker T").record(imp and same, math.inf, where)


def _record_equivalences(rep: SuiteReport, T, B, tol: Tolerance, where: str) -> dict:
    eq = forward_equivalences(T, B, tol)
    vals = [eq["pointwise"], eq["sandwich"], eq["lower"], eq["factor"]]
    rep.stat("forward: four equivalent forms agree").record(all(v == vals[0] for v in vals), math.inf, where)
    return eq


def _forward_infeasible_props(rep: SuiteReport, inst, tol: Tolerance) -> None:
    T, B = inst.T, inst.B
    where = f"forward-infeasible #{inst.index} (n={T.shape[0]})"
    chk = sebestyen.check_forward(T, B, tol)
    ok = not chk.feasible
    try:
        sebestyen.construct_X(T, B, tol)
        ok = False
    except Infeasible as exc:
        f = exc.witness
        ok = ok and f is not None and np.linalg.norm(f) > 0
    rep.stat("forward: infeasible instances rejected with witness").record(ok, math.inf, where)
    _record_equivalences(rep, T, B, tol, where)


def _douglas_props(rep: SuiteReport, inst, tol: Tolerance) -> None:
    T, B = inst.T, inst.B
    where = f"{inst.spec.kind} #{inst.index} (n={T.shape[0]})"
    eq = douglas.douglas_equivalence_check(T, B, tol)
    rep.stat("douglas: inclusion, majorization, factorization agree").record(eq.agree, math.inf, where)
    if inst.spec.kind == "douglas-feasible":
        rep.stat("douglas: constructed T = BC0 feasible").record(eq.inc, math.inf, where)
    if not eq.inc:
        return
    cert = douglas.douglas_factor(T, B, tol)
    lam = cert.lambda_min
    norm_c = spectral_norm(cert.factor_c)
    ok = norm_c <= lam + 1e-8 and douglas.verify_douglas_certificate(T, B, cert, tol).passed
    if inst.ground_truth is not None:
        ok = ok and norm_c <= spectral_norm(inst.ground_truth) + 1e-8
    rep.stat("douglas: ||B^+ T|| <= lambda and certificate verifies").record(ok, lam + 1e-8 - norm_c, where)
    if lam > 0:
        eps = 1e-6 * (1 + lam * lam)
        TT = hermitize(T @ adjoint(T))
        BB = hermitize(B @ adjoint(B))
        rep.stat("douglas: lambda minimal").record(not loewner_leq(TT, (lam * lam - eps) * BB, tol), math.inf, where)


def _reversed_props(rep: SuiteReport, inst, tol: Tolerance) -> None:
    T, B, Y0 = inst.T, inst.B, inst.ground_truth
    where = f"reversed-feasible #{inst.index} (n={T.shape[0]})"
    chk = rev.check_reversed(T, B, tol)
    if chk.m_max == rev.UNCONSTRAINED:
        rep.stat("reversed: P_T B = Y0 T instances feasible").record(chk.feasible, math.inf, where)
        return
    bound = 1.0 / spectral_norm(Y0) - 1e-8
    rep.stat("reversed: P_T B = Y0 T instances feasible").record(chk.feasible and chk.m_max >= bound,
                                                              (chk.m_max - bound) if chk.feasible else -math.inf,
                                                              where)
    if not chk.feasible:
        return
    m = chk.m_max
    cert = rev.construct_Y(T, B, tol)
    vr = rev.verify_reversed_certificate(T, B, cert, tol)
    norm_y = spectral_norm(cert.factor_y)
    incl = np.linalg.norm(cert.factor_y @ T - cert.projector_t @ B, "fro")
    ok = vr.passed and incl <= 1e-8 * np.linalg.norm(B, "fro") and norm_y <= 1 / m + 1e-8
    rep.stat("reversed: certificates verify").record(ok, 1 / m + 1e-8 - norm_y, where)
    rep.stat("reversed: M >= m (P_T B)*(P_T B)").record(cert.residuals["form_dominance_slack"] >= -1e-8,
                                                        cert.residuals["form_dominance_slack"], where)

    raw = adjoint(B) @ T
    rng = rng_for(inst.spec, 20_000 + inst.index)
    n = T.shape[1]
    F = rng.standard_normal((n, 6)) + 1j * rng.standard_normal((n, 6))
    G = rng.standard_normal((n, 6)) + 1j * rng.standard_normal((n, 6))
    worst = math.inf
    cs_ok = True
    for f, g in zip(F.T, G.T):
        lhs = abs(np.vdot(f, raw @ g))
        rhs = math.sqrt(max(np.vdot(f, raw @ f).real, 0.0) * max(np.vdot(g, raw @ g).real, 0.0))
        slack = rhs * (1 + 1e-10) + 1e-12 * spectral_norm(raw) * np.linalg.norm(f) * np.linalg.norm(g) - lhs
        worst = min(worst, slack)
        cs_ok = cs_ok and slack >= 0
    rep.stat("reversed: cauchy-schwarz of (T., B.)").record(cs_ok, worst, where)

    NT = null_basis(T, tol)
    PB = cert.projector_t @ B
    leak = float(np.linalg.norm(PB @ NT)) if NT.shape[1] else 0.0
    rep.stat("reversed: Tf = 0 gives P_T B f = 0").record(leak <= tol.residual_rel * max(1.0, spectral_norm(B)),
                                                           -leak, where)

    # switched roles: (P_T B, T) satisfies the forward inequality with lambda <= 1/m
    fwd = sebestyen.check_forward(PB, T, tol)
    rep.stat("reversed: forward inequality for (P_T B, T)").record(
        fwd.feasible and fwd.lambda_min * m <= 1 + 1e-8, 1 + 1e-8 - fwd.lambda_min * m, where)


def _counterexample_props(rep: SuiteReport, index: int, seed: int, n_max: int, tol: Tolerance) -> None:
    # A = a [[1,1],[1,1]], M = b diag(1,0) embedded by a random unitary: m_max = 0
    spec = InstanceSpec("random", max(2, 1 + index % n_max), seed)
    rng = rng_for(spec, 30_000 + index)
    n = spec.n
    a, b = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
    A = np.zeros((n, n), dtype=complex)
    M = np.zeros((n, n), dtype=complex)
    A[:2, :2] = a * np.array([[1, 1], [1, 1]])
    M[0, 0] = b
    if n > 2:
        A[2:, 2:] = np.diag(rng.uniform(0.5, 2.0, n - 2))
        M[2:, 2:] = np.diag(rng.uniform(0.0, 0.5, n - 2))
    Q = haar_unitary(rng, n)
    A, M = Q @ A @ adjoint(Q), Q @ M @ adjoint(Q)
    res = rev.classify_pencil(A, M, tol)
    m = pencil_extremes(hermitize(A), hermitize(M), tol).m_max
    rep.stat("reversed: m_max = 0 family rejected").record(not res.feasible and m == 0.0, -m, f"pencil #{index}")


def property_suite(
    seed: int = 42,
    count: int = 500,
    n_max: int = 16,
    tol: Tolerance = DEFAULT_TOL,
    instances: Sequence[tuple] | None = None,
) -> SuiteReport:
    """Run the invariant sweep over ``count`` seeded instances per family.

    With ``instances`` (a sequence of ``(T, B)`` pairs) only the forward
    equivalences are evaluated on those pairs; the least ``lam`` of each is
    appended to ``lambdas``.
    """
    if count < 1:
        raise InvalidSpec("count must be at least 1")
    rep = SuiteReport()
    if instances is not None:
        for k, (T, B) in enumerate(instances):
            eq = _record_equivalences(rep, T, B, tol, f"given #{k}")
            rep.lambdas.append(float(eq["lambda"]))
        return rep

    def sweep(kind: str, fn: Callable) -> None:
        for i in range(count):
            inst = gen_instance(InstanceSpec(kind, 1 + i % n_max, seed), i)
            fn(rep, inst, tol)

    def feasible_with_equivalences(rep_, inst, tol_):
        _forward_feasible_props(rep_, inst, tol_)
        _record_equivalences(rep_, inst.T, inst.B, tol_, f"forward-feasible #{inst.index}")

    sweep("forward-feasible", feasible_with_equivalences)
    sweep("forward-infeasible", _forward_infeasible_props)
    for i in range(count):
        kind = "douglas-feasible" if i % 2 == 0 else "random"
        _douglas_props(rep, gen_instance(InstanceSpec(kind, 1 + i % n_max, seed), i), tol)
    sweep("reversed-feasible", _reversed_props)
    for i in range(count):
        _counterexample_props(rep, i, seed, n_max, tol)
    return rep


SCALING_COLUMNS = ("n", "lambda_min", "x_norm", "m_max", "douglas_lambda")


def scaling_report(n_list: Iterable[int], kind: str = "identity", tol: Tolerance = DEFAULT_TOL) -> list[dict]:
    """Forward, reversed and range-inclusion constants of the difference fixture for each ``n``.

    ``kind`` selects the Gram variant of the fixture (``identity`` or
    ``mass``).  Infeasible entries are reported as ``inf``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise InvalidSpec("n_list must not be empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidSpec("n_list must be strictly ascending")
    rows = []
    for n in n_list:
        inst = gen_instance(InstanceSpec("difference-operator", n, variant=kind))
        T, B = inst.T, inst.B
        row = {"n": n, "lambda_min": math.inf, "x_norm": math.inf, "m_max": math.inf, "douglas_lambda": math.inf}
        try:
            cert = sebestyen.construct_X(T, B, tol)
            row["lambda_min"] = cert.lambda_min
            row["x_norm"] = spectral_norm(cert.factor_x)
        except Infeasible:
            pass
        chk = rev.check_reversed(T, B, tol)
        if chk.feasible and chk.m_max != rev.UNCONSTRAINED:
            row["m_max"] = chk.m_max
        try:
            row["douglas_lambda"] = douglas.douglas_factor(T, B, tol).lambda_min
        except Infeasible:
            pass
        rows.append(row)
    return rows


def scaling_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SCALING_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(float(v)) if k != "n" else v) for k, v in row.items()})
    return buf.getvalue()
