"""Matrix files and versioned certificate files.

Matrices are stored either as CSV, one row per line with entries written
``a+bi`` (or ``a`` when the imaginary part is zero), or as JSON
``{"rows": r, "cols": c, "data": [[re, im], ...]}`` in row-major order.
Floats use the shortest repr that round-trips, so files reload bit-exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import CertificateFormatError, NonFinite
from .linalg import Tolerance, as_matrix

SCHEMA_VERSION = "opfactor-cert/1"
MODES = ("sebestyen", "douglas", "reversed")
VERDICTS = ("feasible", "infeasible", "unconstrained")

_TOP_KEYS = {"schema_version", "mode", "verdict", "tolerance", "t_matrix", "b_matrix", "certificate", "witness",
             "residuals"}
_PAYLOAD_KEYS = {
    "sebestyen": {"lambda_min": "number", "gram": "matrix", "factor_x": "matrix", "intermediate_h": "matrix"},
    "douglas": {"lambda_min": "number", "factor_c": "matrix"},
    "reversed": {"m_max": "m", "factor_y": "matrix", "projector_t": "matrix", "borderline": "bool"},
}
_WITNESS_KEYS = {"reason", "vector", "column"}


def format_complex(z: complex) -> str:
    re, im = float(z.real), float(z.imag)
    if im == 0.0 and math.copysign(1.0, im) > 0:
        return repr(re)
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{re!r}{sign}{abs(im)!r}i"


def parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "")
    if not s:
        raise CertificateFormatError("empty matrix entry")
    lowered = s.lower()
    if "inf" in lowered or "nan" in lowered:
        raise NonFinite(f"non-finite entry {text!r}")
    try:
        return complex(s.replace("i", "j").replace("I", "j"))
    except ValueError:
        raise CertificateFormatError(f"cannot parse complex entry {text!r}") from None


def matrix_to_csv(A) -> str:
    A = as_matrix(A)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in A:
        writer.writerow([format_complex(z) for z in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in r)]
    if not rows:
        raise CertificateFormatError("matrix file is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise CertificateFormatError("ragged CSV matrix")
    return np.array([[parse_complex(c) for c in r] for r in rows], dtype=complex)


def matrix_to_json(A) -> dict[str, Any]:
    A = as_matrix(A)
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in A.ravel()],
    }


def matrix_from_json(obj: Any) -> np.ndarray:
    if not isinstance(obj, dict) or set(obj) != {"rows", "cols", "data"}:
        raise CertificateFormatError("matrix object needs exactly the keys rows, cols, data")
    r, c, data = obj["rows"], obj["cols"], obj["data"]
    if not (isinstance(r, int) and isinstance(c, int) and r >= 1 and c >= 0) or isinstance(r, bool):
        raise CertificateFormatError("rows must be a positive integer and cols a nonnegative integer")
    if not isinstance(data, list) or len(data) != r * c:
        raise CertificateFormatError(f"data must hold rows*cols = {r * c} entries")
    vals = []
    for pair in data:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        ):
            raise CertificateFormatError("each entry must be a [re, im] pair of numbers")
        vals.append(complex(pair[0], pair[1]))
    A = np.array(vals, dtype=complex).reshape(r, c)
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix contains NaN or Inf")
    return A


def read_matrix(path: str | Path) -> np.ndarray:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CertificateFormatError(f"{path}: {exc}") from None
        return matrix_from_json(obj)
    return matrix_from_csv(text)


def write_matrix(path: str | Path, A) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(matrix_to_json(A)) + "\n")
    else:
        path.write_text(matrix_to_csv(A))


@dataclass(eq=False)
class CertificateFile:
    """In-memory form of a certificate file.

    ``payload`` maps the per-mode field names to floats, booleans,
    ``"unconstrained"`` or complex arrays; it is ``None`` for infeasible
    verdicts, in which case ``witness`` holds ``reason``, ``vector`` and
    (``douglas`` mode only) ``column``.
    """

    mode: str
    verdict: str
    t_matrix: np.ndarray
    b_matrix: np.ndarray
    tolerance: Tolerance
    payload: dict[str, Any] | None
    witness: dict[str, Any] | None = None
    residuals: dict[str, float] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CertificateFile):
            return NotImplemented
        simple = ("schema_version", "mode", "verdict", "tolerance", "residuals")
        if any(getattr(self, k) != getattr(other, k) for k in simple):
            return False
        if not (_same(self.t_matrix, other.t_matrix) and _same(self.b_matrix, other.b_matrix)):
            return False
        return _same_dict(self.payload, other.payload) and _same_dict(self.witness, other.witness)


def _same(a: Any, b: Any) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return isinstance(a, np.ndarray) and isinstance(b, np.ndarray) and a.shape == b.shape and bool(
            np.array_equal(a, b)
        )
    return a == b


def _same_dict(a: dict | None, b: dict | None) -> bool:
    if a is None or b is None:
        return a is b
    return a.keys() == b.keys() and all(_same(a[k], b[k]) for k in a)


def _finite_number(x: Any, what: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise CertificateFormatError(f"{what} must be a finite number")
    return float(x)


def certificate_to_dict(cf: CertificateFile) -> dict[str, Any]:
    payload = None
    if cf.payload is not None:
        payload = {}
        for key, kind in _PAYLOAD_KEYS[cf.mode].items():
            val = cf.payload[key]
            payload[key] = matrix_to_json(val) if kind == "matrix" else val
    witness = None
    if cf.witness is not None:
        witness = {
            "reason": cf.witness["reason"],
            "vector": matrix_to_json(np.asarray(cf.witness["vector"]).reshape(-1, 1)),
            "column": cf.witness.get("column"),
        }
    return {
        "schema_version": cf.schema_version,
        "mode": cf.mode,
        "verdict": cf.verdict,
        "tolerance": cf.tolerance.as_dict(),
        "t_matrix": matrix_to_json(cf.t_matrix),
        "b_matrix": matrix_to_json(cf.b_matrix),
        "certificate": payload,
        "witness": witness,
        "residuals": dict(cf.residuals),
    }


def serialize(cf: CertificateFile) -> str:
    return json.dumps(certificate_to_dict(cf), indent=1, allow_nan=False) + "\n"


def _reject_constant(name: str):
    raise CertificateFormatError(f"non-finite JSON constant {name}")


def parse(text: str) -> CertificateFile:
    """Parse and validate a certificate; unknown or missing fields are errors."""
    if not text.strip():
        raise CertificateFormatError("certificate file is empty")
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise CertificateFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise CertificateFormatError("certificate must be a JSON object")
    if set(obj) != _TOP_KEYS:
        extra, missing = set(obj) - _TOP_KEYS, _TOP_KEYS - set(obj)
        raise CertificateFormatError(f"bad top-level keys (unknown {sorted(extra)}, missing {sorted(missing)})")
    if obj["schema_version"] != SCHEMA_VERSION:
        raise CertificateFormatError(f"unsupported schema_version {obj['schema_version']!r}")
    mode, verdict = obj["mode"], obj["verdict"]
    if mode not in MODES:
        raise CertificateFormatError(f"unknown mode {mode!r}")
    if verdict not in VERDICTS or (verdict == "unconstrained" and mode != "reversed"):
        raise CertificateFormatError(f"verdict {verdict!r} is not valid for mode {mode!r}")

    tol_obj = obj["tolerance"]
    if not isinstance(tol_obj, dict) or set(tol_obj) != {"eig_rel", "rank_rel", "residual_rel"}:
        raise CertificateFormatError("tolerance needs exactly eig_rel, rank_rel, residual_rel")
    try:
        tol = Tolerance(**{k: _finite_number(v, k) for k, v in tol_obj.items()})
    except ValueError as exc:
        raise CertificateFormatError(str(exc)) from None

    T = matrix_from_json(obj["t_matrix"])
    B = matrix_from_json(obj["b_matrix"])

    residuals = obj["residuals"]
    if not isinstance(residuals, dict):
        raise CertificateFormatError("residuals must be an object")
    residuals = {str(k): _finite_number(v, f"residual {k}") for k, v in residuals.items()}

    payload = _parse_payload(mode, obj["certificate"])
    witness = _parse_witness(obj["witness"])
    if (verdict == "infeasible") != (payload is None):
        raise CertificateFormatError("infeasible verdicts carry no certificate; feasible ones must")
    if (verdict == "infeasible") != (witness is not None):
        raise CertificateFormatError("a witness is present exactly for infeasible verdicts")
    if mode == "reversed" and payload is not None:
        if (verdict == "unconstrained") != (payload["m_max"] == "unconstrained"):
            raise CertificateFormatError("m_max must be 'unconstrained' exactly for the unconstrained verdict")
    return CertificateFile(mode, verdict, T, B, tol, payload, witness, residuals, obj["schema_version"])


def _parse_payload(mode: str, obj: Any) -> dict[str, Any] | None:
    if obj is None:
        return None
    spec = _PAYLOAD_KEYS[mode]
    if not isinstance(obj, dict) or set(obj) != set(spec):
        raise CertificateFormatError(f"{mode} certificate needs exactly the keys {sorted(spec)}")
    out: dict[str, Any] = {}
    for key, kind in spec.items():
        val = obj[key]
        if kind == "matrix":
            out[key] = matrix_from_json(val)
        elif kind == "number":
            out[key] = _finite_number(val, key)
        elif kind == "bool":
            if not isinstance(val, bool):
                raise CertificateFormatError(f"{key} must be a boolean")
            out[key] = val
        else:
            out[key] = "unconstrained" if val == "unconstrained" else _finite_number(val, key)
    return out


def _parse_witness(obj: Any) -> dict[str, Any] | None:
    if obj is None:
        return None
    if not isinstance(obj, dict) or set(obj) != _WITNESS_KEYS:
        raise CertificateFormatError(f"witness needs exactly the keys {sorted(_WITNESS_KEYS)}")
    if not isinstance(obj["reason"], str):
        raise CertificateFormatError("witness reason must be a string")
    col = obj["column"]
    if col is not None and (isinstance(col, bool) or not isinstance(col, int)):
        raise CertificateFormatError("witness column must be an integer or null")
    vec = matrix_from_json(obj["vector"])
    if vec.shape[1] != 1:
        raise CertificateFormatError("witness vector must be a column")
    return {"reason": obj["reason"], "vector": vec[:, 0], "column": col}


def read_certificate(path: str | Path) -> CertificateFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CertificateFormatError(str(exc)) from None
    return parse(text)


def write_certificate(path: str | Path, cf: CertificateFile) -> None:
    Path(path).write_text(serialize(cf))
