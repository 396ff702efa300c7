"""Certified finite-dimensional operator factorizations.

Forward inequality ``||Tf||^2 <= lam (Tf, Bf)`` with factor ``T = XB``,
``X >= 0``; range inclusion ``T = BC``; and the reversed inequality
``||Tf||^2 >= m (Tf, Bf)`` with ``YT = P_T B``, ``Y >= 0``.
"""

from .douglas import (
    DouglasCertificate,
    douglas_equivalence_check,
    douglas_factor,
    range_inclusion,
    verify_douglas_certificate,
)
from .errors import (
    CertificateFormatError,
    DimensionMismatch,
    Infeasible,
    InvalidSpec,
    NonFinite,
    NonSquare,
    NotHermitianPsd,
    NotPsd,
    OpFactorError,
    RangeNotIncluded,
)
from .instances import Instance, InstanceSpec, gen_instance
from .io import CertificateFile, parse, read_certificate, serialize, write_certificate
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    loewner_leq,
    pencil_extremes,
    pseudoinverse,
    psd_min_eig,
    range_projection,
)
from .partial import PartialOperator, closure, compose, includes, quadratic_form_sign
from .reversed import (
    UNCONSTRAINED,
    ReversedCertificate,
    check_reversed,
    construct_Y,
    verify_reversed_certificate,
)
from .sebestyen import (
    SebestyenCertificate,
    check_forward,
    construct_X,
    gram_operator,
    intermediate_H,
    verify_forward_certificate,
)
from .suite import property_suite, scaling_report
from .certify import run_check, verify_file

__version__ = "0.1.0"
