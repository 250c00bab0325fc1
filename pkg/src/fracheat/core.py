"""Fractional parameters and the space-time heat kernel.

The operator acts on u(x, t) through the kernel

    K(x - y, t - tau) = C(n, s) * (t - tau)^{-(n/2 + 1 + s)} * exp(-|x - y|^2 / (4 (t - tau)))

for 0 < s < 1, with C(n, s) = 1 / ((4 pi)^{n/2} |Gamma(-s)|).  Integrating the
kernel over all positive time lags collapses it to the purely spatial kernel
A(n, s) |x - y|^{-(n + 2 s)} with A(n, s) = 4^s Gamma(n/2 + s) / (pi^{n/2} |Gamma(-s)|);
both constants are exposed here together with the kernel evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainValidationError

# exp() overflow threshold for float64; used to fail loudly instead of
# returning inf when a lag is at machine-zero scale
_LOG_HUGE = 700.0


def gamma_abs_neg(s: float) -> float:
    """|Gamma(-s)| for s in (0, 1), computed as Gamma(1 - s) / s.

    The recurrence keeps every gamma evaluation on (0, 1] where the
    library implementation is accurate to full double precision, and
    sidesteps the pole/sign bookkeeping of negative arguments.
    """
    if not 0.0 < s < 1.0:
        raise DomainValidationError(f"order s must lie in (0, 1), got {s}")
    return math.gamma(1.0 - s) / s


@dataclass(frozen=True)
class FracParams:
    """Space dimension n >= 1 and fractional order s in (0, 1)."""

    n: int
    s: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise DomainValidationError(f"dimension n must be a positive integer, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise DomainValidationError(f"order s must lie strictly in (0, 1), got {self.s}")


@dataclass(frozen=True)
class KernelConstants:
    """Derived kernel normalizations for a given (n, s)."""

    c_ns: float
    a_ns: float
    gamma_abs_neg_s: float


@dataclass(frozen=True)
class SpaceTimePoint:
    """A point (x, t); x is a length-n vector."""

    x: np.ndarray
    t: float

    def __init__(self, x, t: float):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(x, dtype=float)))
        object.__setattr__(self, "t", float(t))

    def validate(self, p: FracParams) -> None:
        if self.x.shape != (p.n,):
            raise DomainValidationError(
                f"point has spatial dimension {self.x.shape}, expected ({p.n},)"
            )


def normalization_constant(p: FracParams) -> float:
    """C(n, s) = 1 / ((4 pi)^{n/2} |Gamma(-s)|)."""
    return 1.0 / ((4.0 * math.pi) ** (p.n / 2.0) * gamma_abs_neg(p.s))


def integrated_kernel_constant(p: FracParams) -> float:
    """A(n, s) = 4^s Gamma(n/2 + s) / (pi^{n/2} |Gamma(-s)|)."""
    return (
        4.0**p.s
        * math.gamma(p.n / 2.0 + p.s)
        / (math.pi ** (p.n / 2.0) * gamma_abs_neg(p.s))
    )


def kernel_constants(p: FracParams) -> KernelConstants:
    return KernelConstants(
        c_ns=normalization_constant(p),
        a_ns=integrated_kernel_constant(p),
        gamma_abs_neg_s=gamma_abs_neg(p.s),
    )


def heat_kernel(dx, r, p: FracParams):
    """Space-time kernel C(n,s) r^{-(n/2+1+s)} exp(-|dx|^2 / (4 r)) for lag r > 0.

    Evaluated in log space so extreme lags underflow cleanly to 0 instead of
    overflowing intermediate powers.  Accepts scalar or array ``r`` (with
    ``dx`` broadcast as rows of length n).
    """
    dx = np.atleast_1d(np.asarray(dx, dtype=float))
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0):
        raise DomainValidationError("time lag r must be positive")
    if dx.ndim == 1:
        sq = float(np.dot(dx, dx))
    else:
        sq = np.sum(dx * dx, axis=-1)
    log_c = math.log(normalization_constant(p))
    power = p.n / 2.0 + 1.0 + p.s
    log_k = log_c - power * np.log(r_arr) - sq / (4.0 * r_arr)
    if np.any(log_k > _LOG_HUGE):
        raise DomainValidationError("lag r is at machine-zero scale; kernel would overflow")
    out = np.exp(log_k)
    return float(out) if np.isscalar(r) and dx.ndim == 1 else out


def integrated_time_kernel(d, p: FracParams):
    """A(n,s) d^{-(n+2s)}: the kernel integrated over all lags at distance d > 0."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0.0):
        raise DomainValidationError("distance d must be positive")
    a = integrated_kernel_constant(p)
    log_k = math.log(a) - (p.n + 2.0 * p.s) * np.log(d_arr)
    if np.any(log_k > _LOG_HUGE):
        raise DomainValidationError("distance d is at machine-zero scale; kernel would overflow")
    out = np.exp(log_k)
    return float(out) if np.isscalar(d) else out
