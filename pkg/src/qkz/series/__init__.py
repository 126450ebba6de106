"""Exact series arithmetic."""

from qkz.series.dense import DenseSeries
from qkz.series.laurent import LaurentPolynomial
from qkz.series.ring import NonUnitError
from qkz.series.truncated import (
    TruncatedSeries,
    TruncationError,
    coefficient_identity_check,
    compose,
    euler_derive,
    exp_series,
    invert,
    lagrange_invert,
    log_series,
)

__all__ = [
    "DenseSeries",
    "LaurentPolynomial",
    "NonUnitError",
    "TruncatedSeries",
    "TruncationError",
    "coefficient_identity_check",
    "compose",
    "euler_derive",
    "exp_series",
    "invert",
    "lagrange_invert",
    "log_series",
]
