"""Exception hierarchy for opfactor."""

from __future__ import annotations

import numpy as np


class OpFactorError(Exception):
    """Base class for every error raised by this package."""


class NonSquare(OpFactorError, ValueError):
    pass


class NonFinite(OpFactorError, ValueError):
    pass


class DimensionMismatch(OpFactorError, ValueError):
    pass


class NotHermitianPsd(OpFactorError, ValueError):
    pass


class NotPsd(OpFactorError, ValueError):
    pass


class InvalidSpec(OpFactorError, ValueError):
    pass


class CertificateFormatError(OpFactorError, ValueError):
    """A matrix or certificate file does not parse or violates the schema."""


class Infeasible(OpFactorError):
    """The requested factorization does not exist.

    ``witness`` is a vector certifying the failure; ``reason`` names the
    violated condition.
    """

    def __init__(self, message: str, witness: np.ndarray | None = None, reason: str = ""):
        super().__init__(message)
        self.witness = witness
        self.reason = reason


class RangeNotIncluded(Infeasible):
    """``ran T`` is not contained in ``ran B``; ``column`` indexes the offending column of T."""

    def __init__(self, message: str, witness: np.ndarray | None = None, column: int = -1):
        super().__init__(message, witness, reason="range")
        self.column = column
