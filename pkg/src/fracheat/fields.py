"""Evaluatable fields on R^n x R and their metadata.

Fields are supplied as vectorized callables plus declared metadata: an
exterior extension rule, a known sup bound used for truncation-tail
estimates, and (optionally) an essential-support box and a characteristic
feature length.  The quadrature module never samples fields onto grids of
its own; it only calls ``eval``.

Conventions for the callables:

* space-time  ``func(X, t)`` with ``X`` of shape (m, n) and ``t`` of shape (m,),
* space-only  ``func(X)`` with ``X`` of shape (m, n),
* time-only   ``func(t)`` with ``t`` of shape (m,),

each returning a float array of shape (m,).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AdmissibilityError, DomainValidationError

GLOBAL = "global"
ZERO_BALL = "zero-ball"


def _as_points(x, n: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, n) if n == 1 else pts.reshape(1, n)
    if pts.ndim != 2 or pts.shape[1] != n:
        raise DomainValidationError(f"points must have shape (m, {n}), got {pts.shape}")
    return pts


@dataclass(frozen=True)
class SpaceTimeField:
    """A bounded function u(x, t) with declared exterior behaviour.

    Parameters
    ----------
    func : callable
        Vectorized evaluation ``func(X, t)``.
    n : int
        Space dimension.
    exterior : str
        ``"global"`` (defined everywhere) or ``"zero-ball"`` (identically
        zero outside the ball of radius ``ball_radius``); the rule is
        enforced bit-exactly at evaluation time.
    sup_bound : float
        Known bound M with |u| <= M; ``math.inf`` marks an unbounded field
        (only the membership probe accepts those).
    smoothness_tag : str
        Declared Hoelder class metadata; not verified beyond the seminorm probe.
    ball_radius : float, optional
        Radius for the zero-ball rule.
    space_support : (lo, hi) arrays, optional
        Essential-support box: |u| is negligible outside it.  Enables the
        large-lag panel rule in the semigroup quadrature.
    space_scale : float
        Smallest spatial feature length (1/max frequency for oscillatory
        fields, bump width for localized ones, ``inf`` if constant in space).
    t_support : (a, b), optional
        u(., tau) vanishes for tau outside [a, b].
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    n: int
    exterior: str = GLOBAL
    sup_bound: float = 1.0
    smoothness_tag: str = "C^{2s+eps,s+eps}"
    ball_radius: Optional[float] = None
    space_support: Optional[tuple] = None
    space_scale: float = 1.0
    t_support: Optional[tuple] = None
    time_independent: bool = False

    def __post_init__(self):
        if self.exterior not in (GLOBAL, ZERO_BALL):
            raise DomainValidationError(f"unknown exterior rule {self.exterior!r}")
        if self.exterior == ZERO_BALL:
            if self.ball_radius is None or self.ball_radius <= 0:
                raise DomainValidationError("zero-ball exterior rule needs a positive ball_radius")
            if self.space_support is None:
                r = self.ball_radius
                object.__setattr__(
                    self, "space_support", (np.full(self.n, -r), np.full(self.n, r))
                )
        if self.sup_bound < 0:
            raise DomainValidationError("sup_bound must be nonnegative")

    def eval(self, x, t) -> np.ndarray:
        pts = _as_points(x, self.n)
        ts = np.broadcast_to(np.asarray(t, dtype=float), (pts.shape[0],))
        if self.exterior == ZERO_BALL:
            inside = np.einsum("ij,ij->i", pts, pts) < self.ball_radius**2
            out = np.zeros(pts.shape[0])
            if np.any(inside):
                out[inside] = self.func(pts[inside], ts[inside])
            return out
        return np.asarray(self.func(pts, ts), dtype=float)

    def at(self, x, t: float) -> float:
        return float(self.eval(np.asarray(x, dtype=float).reshape(1, -1), np.array([t]))[0])

    def require_bound(self) -> float:
        if not math.isfinite(self.sup_bound):
            raise AdmissibilityError("field has no finite sup_bound; tail cannot be bounded")
        return self.sup_bound


@dataclass(frozen=True)
class SpaceField:
    """A time-independent field g(x) with the same exterior metadata."""

    func: Callable[[np.ndarray], np.ndarray]
    n: int
    exterior: str = GLOBAL
    sup_bound: float = 1.0
    ball_radius: Optional[float] = None
    space_scale: float = 1.0
    space_support: Optional[tuple] = None

    def eval(self, x) -> np.ndarray:
        pts = _as_points(x, self.n)
        if self.exterior == ZERO_BALL:
            inside = np.einsum("ij,ij->i", pts, pts) < self.ball_radius**2
            out = np.zeros(pts.shape[0])
            if np.any(inside):
                out[inside] = self.func(pts[inside])
            return out
        return np.asarray(self.func(pts), dtype=float)

    def as_spacetime(self) -> SpaceTimeField:
        support = self.space_support
        if support is None and self.exterior == ZERO_BALL:
            r = self.ball_radius
            support = (np.full(self.n, -r), np.full(self.n, r))
        return SpaceTimeField(
            func=lambda X, t: self.func(X),
            n=self.n,
            exterior=self.exterior,
            sup_bound=self.sup_bound,
            ball_radius=self.ball_radius,
            space_support=support,
            space_scale=self.space_scale,
            time_independent=True,
        )


@dataclass(frozen=True)
class TimeField:
    """A function of time alone, h(t)."""

    func: Callable[[np.ndarray], np.ndarray]
    sup_bound: float = 1.0
    support: Optional[tuple] = None

    def eval(self, t) -> np.ndarray:
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)

    def as_spacetime(self, n: int) -> SpaceTimeField:
        return SpaceTimeField(
            func=lambda X, t: self.func(t),
            n=n,
            sup_bound=self.sup_bound,
            space_scale=math.inf,
            t_support=self.support,
        )


def spot_check(field: SpaceTimeField, rng: np.random.Generator, samples: int = 256,
               half_width: float = 3.0) -> None:
    """Spot-check the declared invariants on random sample points.

    Exterior points of a zero-ball field must evaluate to exactly zero,
    and no sampled magnitude may exceed the declared sup bound.
    """
    pts = rng.uniform(-half_width, half_width, size=(samples, field.n))
    ts = rng.uniform(-half_width, half_width, size=samples)
    vals = field.eval(pts, ts)
    if math.isfinite(field.sup_bound) and np.any(np.abs(vals) > field.sup_bound * (1 + 1e-12)):
        raise DomainValidationError("sampled |u| exceeds the declared sup_bound")
    if field.exterior == ZERO_BALL:
        outside = np.einsum("ij,ij->i", pts, pts) >= field.ball_radius**2
        if np.any(vals[outside] != 0.0):
            raise DomainValidationError("exterior rule violated on sampled points")


def constant_field(n: int, value: float = 1.0) -> SpaceTimeField:
    return SpaceTimeField(
        func=lambda X, t: np.full(X.shape[0], float(value)),
        n=n,
        sup_bound=abs(value),
        space_scale=math.inf,
        time_independent=True,
    )


def linear_combination(fields: Sequence[SpaceTimeField], coeffs: Sequence[float]) -> SpaceTimeField:
    """a1 u1 + a2 u2 + ...; metadata combined conservatively."""
    fs = list(fields)
    cs = [float(c) for c in coeffs]
    if len(fs) != len(cs) or not fs:
        raise DomainValidationError("need matching nonempty fields and coefficients")
    n = fs[0].n
    if any(f.n != n for f in fs):
        raise DomainValidationError("all fields must share the space dimension")

    def f(X, t):
        out = cs[0] * fs[0].eval(X, t)
        for c, fld in zip(cs[1:], fs[1:]):
            out += c * fld.eval(X, t)
        return out

    support = None
    if all(fld.space_support is not None for fld in fs):
        lo = np.min([np.asarray(fld.space_support[0]) for fld in fs], axis=0)
        hi = np.max([np.asarray(fld.space_support[1]) for fld in fs], axis=0)
        support = (lo, hi)
    t_support = None
    if all(fld.t_support is not None for fld in fs):
        t_support = (
            min(fld.t_support[0] for fld in fs),
            max(fld.t_support[1] for fld in fs),
        )
    return SpaceTimeField(
        func=f,
        n=n,
        sup_bound=sum(abs(c) * fld.sup_bound for c, fld in zip(cs, fs)),
        space_support=support,
        space_scale=min(fld.space_scale for fld in fs),
        t_support=t_support,
        time_independent=all(fld.time_independent for fld in fs),
    )


# ---------------------------------------------------------------------------
# smooth compactly supported profiles


def mollifier(x) -> np.ndarray:
    """The standard bump e^{1 + 1/(|x|^2 - 1)} inside the unit ball, 0 outside.

    Peaks at 1 at the origin and is C-infinity across the support boundary.
    """
    pts = np.asarray(x, dtype=float)
    sq = pts * pts if pts.ndim == 1 else np.sum(pts * pts, axis=-1)
    out = np.zeros_like(sq, dtype=float)
    inside = sq < 1.0
    with np.errstate(divide="ignore"):
        out[inside] = np.exp(1.0 + 1.0 / (sq[inside] - 1.0))
    return out


def _smooth_step(x: np.ndarray) -> np.ndarray:
    # C-infinity transition: 0 for x <= 0, 1 for x >= 1
    def psi(v):
        out = np.zeros_like(v)
        pos = v > 0
        out[pos] = np.exp(-1.0 / v[pos])
        return out

    a = psi(x)
    b = psi(1.0 - x)
    return a / (a + b)


def plateau_bump(t) -> np.ndarray:
    """C-infinity profile equal to 1 on [-1/2, 1/2], supported in (-1, 1)."""
    tau = np.abs(np.asarray(t, dtype=float))
    return _smooth_step(2.0 * (1.0 - tau))


def torsion_rhs_constant(n: int, s: float) -> float:
    """Value of the fractional Laplacian of (1 - |x|^2)_+^s inside the unit ball.

    Equals 2^{2s} Gamma(n/2 + s) Gamma(1 + s) / Gamma(n/2); for n = 1, s = 1/2
    the constant is exactly 1, so (1 - x^2)^{1/2} solves the unit-source
    problem in the ball.
    """
    return (
        2.0 ** (2.0 * s)
        * math.gamma(n / 2.0 + s)
        * math.gamma(1.0 + s)
        / math.gamma(n / 2.0)
    )


def torsion_profile(n: int, s: float, shift: Optional[Sequence[float]] = None) -> SpaceField:
    """(1 - |x - shift|^2)_+^s, zero outside the shifted unit ball.

    The unshifted profile is the closed-form benchmark for the unit-ball
    Dirichlet solver; the shifted variant is deliberately *not* a solution
    and is used to exercise asymmetry detection.
    """
    off = np.zeros(n) if shift is None else np.asarray(shift, dtype=float)

    def g(X):
        d = X - off
        sq = np.sum(d * d, axis=-1)
        return np.where(sq < 1.0, np.power(np.maximum(1.0 - sq, 0.0), s), 0.0)

    if shift is None or not np.any(off):
        return SpaceField(g, n=n, exterior=ZERO_BALL, sup_bound=1.0, ball_radius=1.0, space_scale=0.5)
    # shifted profile: clip against the ORIGINAL unit ball, like grid data would be
    return SpaceField(g, n=n, exterior=ZERO_BALL, sup_bound=1.0, ball_radius=1.0, space_scale=0.5)


def gaussian_bump(
    n: int,
    center: Sequence[float] | None = None,
    width: float = 1.0,
    t_center: float = 0.0,
    t_width: float | None = 1.0,
    amplitude: float = 1.0,
) -> SpaceTimeField:
    """Separable Gaussian bump; ``t_width=None`` makes it time-independent."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)

    def f(X, t):
        d = X - c
        val = np.exp(-np.sum(d * d, axis=-1) / width**2)
        if t_width is not None:
            val = val * np.exp(-((t - t_center) ** 2) / t_width**2)
        return amplitude * val

    half = 6.0 * width
    t_supp = None if t_width is None else (t_center - 10.0 * t_width, t_center + 10.0 * t_width)
    return SpaceTimeField(
        func=f,
        n=n,
        sup_bound=abs(amplitude),
        space_support=(c - half, c + half),
        space_scale=width,
        t_support=t_supp,
        time_independent=t_width is None,
    )


def plane_wave(n: int, xi: Sequence[float], rho: float) -> SpaceTimeField:
    """cos(xi . x + rho t); globally defined and bounded by 1."""
    xi_v = np.asarray(xi, dtype=float).reshape(n)
    xi_norm = float(np.linalg.norm(xi_v))

    def f(X, t):
        return np.cos(X @ xi_v + rho * t)

    return SpaceTimeField(
        func=f,
        n=n,
        sup_bound=1.0,
        space_scale=math.inf if xi_norm == 0.0 else 1.0 / xi_norm,
        time_independent=rho == 0.0,
    )


def polynomial_cutoff(n: int, coeffs: Sequence[float]) -> SpaceField:
    """(c0 + c1 |x|^2 + c2 |x|^4 + ...) times the unit-ball mollifier."""
    cs = list(coeffs)

    def g(X):
        sq = np.sum(X * X, axis=-1)
        poly = np.zeros_like(sq)
        for c in reversed(cs):
            poly = poly * sq + c
        return poly * mollifier(X)

    bound = sum(abs(c) for c in cs)
    return SpaceField(g, n=n, exterior=ZERO_BALL, sup_bound=bound, ball_radius=1.0, space_scale=0.5)


# ---------------------------------------------------------------------------
# seeded random fields for diagnostics


def random_space_bump(rng: np.random.Generator, n: int) -> SpaceField:
    """Sum of a few random Gaussians, compactly concentrated near the origin."""
    k = int(rng.integers(2, 4))
    centers = rng.uniform(-0.8, 0.8, size=(k, n))
    widths = rng.uniform(0.4, 0.9, size=k)
    amps = rng.uniform(-1.0, 1.0, size=k)

    def g(X):
        out = np.zeros(X.shape[0])
        for c, w, a in zip(centers, widths, amps):
            d = X - c
            out += a * np.exp(-np.sum(d * d, axis=-1) / w**2)
        return out

    bound = float(np.sum(np.abs(amps)))
    lo = np.min(centers - 6.0 * widths[:, None], axis=0)
    hi = np.max(centers + 6.0 * widths[:, None], axis=0)
    return SpaceField(g, n=n, sup_bound=bound, space_scale=float(widths.min()),
                      space_support=(lo, hi))


def random_time_field(rng: np.random.Generator) -> TimeField:
    """Sum of random Gaussians in time, supported (essentially) in [-6, 6]."""
    k = int(rng.integers(2, 4))
    centers = rng.uniform(-2.0, 2.0, size=k)
    widths = rng.uniform(0.5, 1.2, size=k)
    amps = rng.uniform(-1.0, 1.0, size=k)

    def h(t):
        out = np.zeros_like(t)
        for c, w, a in zip(centers, widths, amps):
            out += a * np.exp(-((t - c) ** 2) / w**2)
        return out

    bound = float(np.sum(np.abs(amps)))
    return TimeField(h, sup_bound=bound, support=(-12.0, 12.0))


def random_spacetime_bump(rng: np.random.Generator, n: int) -> SpaceTimeField:
    """Random space-time Gaussian packet, bounded, smooth, fast-decaying."""
    space = random_space_bump(rng, n)
    tc = float(rng.uniform(-0.5, 0.5))
    tw = float(rng.uniform(0.6, 1.2))

    def f(X, t):
        return space.func(X) * np.exp(-((t - tc) ** 2) / tw**2)

    lo, hi = space.space_support
    return SpaceTimeField(
        func=f,
        n=n,
        sup_bound=space.sup_bound,
        space_support=(lo, hi),
        space_scale=space.space_scale,
        t_support=(tc - 10.0 * tw, tc + 10.0 * tw),
    )


def antisymmetrize(field: SpaceTimeField, reflect_fn) -> SpaceTimeField:
    """w(x, t) = F(x, t) - F(x^lambda, t): exactly antisymmetric about the plane."""

    def f(X, t):
        return field.eval(X, t) - field.eval(reflect_fn(X), t)

    support = None
    if field.space_support is not None:
        lo, hi = field.space_support
        lo_r = np.minimum(lo, np.min(reflect_fn(np.vstack([lo, hi])), axis=0))
        hi_r = np.maximum(hi, np.max(reflect_fn(np.vstack([lo, hi])), axis=0))
        support = (lo_r, hi_r)
    return SpaceTimeField(
        func=f,
        n=field.n,
        sup_bound=2.0 * field.sup_bound,
        space_support=support,
        space_scale=field.space_scale,
        t_support=field.t_support,
    )


# ---------------------------------------------------------------------------
# named registry used by the CLI


def build_field(name: str, n: int, s: float, params: dict | None = None,
                rng: np.random.Generator | None = None):
    """Construct a named field; raises DomainValidationError for unknown names."""
    params = dict(params or {})
    if name == "gaussian-bump":
        return gaussian_bump(
            n,
            center=params.get("center"),
            width=float(params.get("width", 1.0)),
            t_center=float(params.get("t_center", 0.0)),
            t_width=params.get("t_width", 1.0),
        )
    if name == "plane-wave":
        xi = params.get("xi", [1.0] * n)
        rho = float(params.get("rho", 1.0))
        return plane_wave(n, xi, rho)
    if name == "torsion-profile":
        return torsion_profile(n, s).as_spacetime()
    if name == "shifted-torsion":
        shift = params.get("shift", [0.2] + [0.0] * (n - 1))
        return torsion_profile(n, s, shift=shift).as_spacetime()
    if name == "custom-polynomial-cutoff":
        coeffs = params.get("coeffs", [1.0, -0.5])
        return polynomial_cutoff(n, coeffs).as_spacetime()
    raise DomainValidationError(f"unknown field name {name!r}")


FIELD_NAMES = (
    "gaussian-bump",
    "plane-wave",
    "torsion-profile",
    "shifted-torsion",
    "custom-polynomial-cutoff",
)
