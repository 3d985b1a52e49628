"""Finite time scales and the delta-calculus primitives built on them.

A time scale is a finite, strictly increasing grid of real points.  Purely
discrete scales (integer grids, h-spaced grids, geometric "quantum" grids,
arbitrary point sets) are exact: every identity below holds on them up to
floating-point roundoff.  The real line is represented by a uniform fine
mesh tagged as a continuum approximation; results on such a grid carry an
O(h) discretisation error and are meant to be checked by mesh refinement,
not by absolute tolerances.

Conventions used throughout:

* ``sigma(i) = i + 1`` (next grid point) and graininess
  ``mu[i] = points[i+1] - points[i]``.
* The last grid point has no forward jump; operations that need ``sigma``
  are restricted to indices ``< n - 1`` (written "kappa" below), and
  second differences to ``< n - 2`` ("kappa2").
* Delta integrals are left Riemann sums ``sum f[i] * mu[i]``; the signed
  convention ``int_a^b = -int_b^a`` holds for reversed index order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from .errors import (
    BadFamilyParam,
    GridMismatch,
    NonIncreasingPoints,
    NotRegressive,
    OutOfKappa,
    TooFewPoints,
)

__all__ = [
    "EXACT_DISCRETE",
    "CONTINUUM_APPROX",
    "REG_TOL",
    "TimeScale",
    "GridFn",
    "RegressiveFn",
    "make_timescale",
    "integers",
    "h_integers",
    "quantum",
    "reals",
    "explicit",
    "sigma",
    "delta_derivative",
    "delta_integral",
    "cumulative_integral",
    "circle_plus",
    "ominus",
    "exp_delta",
    "check_regressive",
]

EXACT_DISCRETE = "exact-discrete"
CONTINUUM_APPROX = "continuum-approx"

# |1 + mu*g| below this counts as a regressivity violation.
REG_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeScale:
    """Strictly increasing grid of at least three real points.

    ``mode`` is ``EXACT_DISCRETE`` for grids that *are* the time scale and
    ``CONTINUUM_APPROX`` for uniform meshes standing in for an interval of
    the real line.  Instances are immutable and safe to share.
    """

    points: np.ndarray
    mode: str = EXACT_DISCRETE

    def __post_init__(self):
        pts = _readonly(self.points)
        if pts.ndim != 1:
            raise BadFamilyParam("grid points must form a 1-d sequence")
        if pts.size < 3:
            raise TooFewPoints(f"need at least 3 grid points, got {pts.size}")
        if not np.all(np.isfinite(pts)):
            raise BadFamilyParam("grid points must be finite")
        gaps = np.diff(pts)
        if np.any(gaps <= 0.0):
            i = int(np.argmax(gaps <= 0.0))
            raise NonIncreasingPoints(
                f"points must be strictly increasing; violation between "
                f"index {i} ({pts[i]!r}) and {i + 1} ({pts[i + 1]!r})"
            )
        if self.mode not in (EXACT_DISCRETE, CONTINUUM_APPROX):
            raise BadFamilyParam(f"unknown mode {self.mode!r}")
        if self.mode == CONTINUUM_APPROX:
            h = gaps.mean()
            if np.max(np.abs(gaps - h)) > 1e-12 * h:
                raise BadFamilyParam(
                    "continuum-approximation grids must be uniform to 1e-12 relative"
                )
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.size

    def __len__(self) -> int:
        return self.points.size

    @cached_property
    def mu(self) -> np.ndarray:
        """Graininess mu[i] = points[i+1] - points[i], defined on kappa."""
        return _readonly(np.diff(self.points))

    @property
    def is_continuum(self) -> bool:
        return self.mode == CONTINUUM_APPROX

    @property
    def mesh(self) -> float:
        """Mean gap; the nominal h of a continuum-approximation grid."""
        return float(self.mu.mean())

    def index_of(self, t: float, rel_tol: float = 1e-9) -> int:
        """Index of the grid point equal to ``t`` (within a relative tolerance)."""
        i = int(np.argmin(np.abs(self.points - t)))
        scale = max(1.0, abs(t), abs(float(self.points[i])))
        if abs(float(self.points[i]) - t) > rel_tol * scale:
            raise KeyError(f"t={t!r} is not a grid point")
        return i

    def same_grid(self, other: "TimeScale") -> bool:
        return self is other or (
            self.mode == other.mode and np.array_equal(self.points, other.points)
        )


@dataclass(frozen=True, eq=False)
class GridFn:
    """Real values sampled on (a leading stretch of) a time scale's points.

    Carrier functions (coefficients, solutions) have one value per grid
    point.  Delta derivatives lose the trailing point, so values arrays of
    length ``n - 1`` (kappa) and ``n - 2`` (kappa2) are also allowed; they
    stay aligned with ``points[0:len(values)]``.
    """

    ts: TimeScale
    values: np.ndarray

    def __post_init__(self):
        vals = _readonly(self.values)
        n = self.ts.n
        if vals.ndim != 1 or not (n - 2 <= vals.size <= n):
            raise GridMismatch(
                f"values length {vals.size} does not fit a grid of {n} points"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, ts: TimeScale, c: float) -> "GridFn":
        return cls(ts, np.full(ts.n, float(c)))

    @classmethod
    def from_callable(cls, ts: TimeScale, f: Callable[[np.ndarray], np.ndarray]) -> "GridFn":
        return cls(ts, np.asarray(f(ts.points), dtype=float))

    def __len__(self) -> int:
        return self.values.size

    @property
    def kappa_order(self) -> int:
        """How many trailing grid points this function is missing (0, 1 or 2)."""
        return self.ts.n - self.values.size

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True, eq=False)
class RegressiveFn:
    """A grid function certified to satisfy ``|1 + mu*g| >= reg_tol`` on kappa.

    Produced by :func:`check_regressive`; consumed by :func:`exp_delta`.
    """

    fn: GridFn
    reg_tol: float = REG_TOL

    @property
    def ts(self) -> TimeScale:
        return self.fn.ts

    @property
    def values(self) -> np.ndarray:
        return self.fn.values


# ---------------------------------------------------------------------------
# grid families


def integers(a: int, b: int) -> TimeScale:
    """The integer grid {a, a+1, ..., b}."""
    if a != int(a) or b != int(b):
        raise BadFamilyParam("integer grid bounds must be whole numbers")
    if b - a < 2:
        raise TooFewPoints("integer grid needs b >= a + 2")
    return TimeScale(np.arange(int(a), int(b) + 1, dtype=float))

def h_integers(h: float, a: float, b: float) -> TimeScale:
    """The h-spaced grid {a, a+h, a+2h, ...} up to b."""
    if h <= 0:
        raise BadFamilyParam("h must be positive")
    if b <= a:
        raise BadFamilyParam("need a < b")
    count = int(np.floor((b - a) / h + 1e-9)) + 1
    if count < 3:
        raise TooFewPoints("h-grid has fewer than 3 points on [a, b]")
    return TimeScale(a + h * np.arange(count, dtype=float))


def quantum(h: float, a: float, k_max: int) -> TimeScale:
    """The geometric grid {a, a*h, a*h^2, ..., a*h^k_max} with h > 1, a > 0."""
    if h <= 1.0:
        raise BadFamilyParam("quantum grid needs h > 1")
    if a <= 0.0:
        raise BadFamilyParam("quantum grid needs a > 0")
    if k_max < 2:
        raise TooFewPoints("quantum grid needs k_max >= 2")
    return TimeScale(a * h ** np.arange(int(k_max) + 1, dtype=float))


def reals(a: float, b: float, h: float) -> TimeScale:
    """Uniform mesh of width h on [a, b], tagged as a continuum approximation."""
    if b <= a:
        raise BadFamilyParam("need a < b")
    if h <= 0:
        raise BadFamilyParam("mesh width must be positive")
    steps = (b - a) / h
    n = int(round(steps))
    if n < 2 or abs(steps - n) > 1e-6 * max(1.0, steps):
        raise BadFamilyParam("mesh width must divide the interval (>= 2 steps)")
    return TimeScale(np.linspace(a, b, n + 1), mode=CONTINUUM_APPROX)


def explicit(points: Sequence[float]) -> TimeScale:
    """An arbitrary strictly increasing point set, taken as exact."""
    return TimeScale(np.asarray(points, dtype=float))


_FAMILIES = {
    "integers": integers,
    "hz": h_integers,
    "quantum": quantum,
    "reals": reals,
    "explicit": explicit,
}


def make_timescale(family: str, **params) -> TimeScale:
    """Build a grid by family name; see the individual constructors.

    Families and parameters: ``integers(a, b)``, ``hz(h, a, b)``,
    ``quantum(h, a, k_max)``, ``reals(a, b, h)``, ``explicit(points)``.
    """
    try:
        ctor = _FAMILIES[family.lower()]
    except KeyError:
        raise BadFamilyParam(f"unknown grid family {family!r}") from None
    try:
        return ctor(**params)
    except TypeError as exc:
        raise BadFamilyParam(f"bad parameters for family {family!r}: {exc}") from None


# ---------------------------------------------------------------------------
# delta calculus


def sigma(ts: TimeScale, i: int) -> int:
    """Index of the forward jump of grid point ``i``."""
    n = ts.n
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for {n} points")
    if i == n - 1:
        raise OutOfKappa("the final grid point has no forward jump")
    return i + 1


def _same_grid(*fns: GridFn) -> TimeScale:
    ts = fns[0].ts
    for f in fns[1:]:
        if not ts.same_grid(f.ts):
            raise GridMismatch("grid functions live on different time scales")
    return ts


def delta_derivative(f: GridFn) -> GridFn:
    """Forward difference quotient (f[i+1] - f[i]) / mu[i], one point shorter."""
    m = len(f) - 1
    vals = np.diff(f.values) / f.ts.mu[:m]
    return GridFn(f.ts, vals)


def _integrand_prefix(f: GridFn) -> np.ndarray:
    """Prefix sums of f*mu: prefix[j] = sum_{i<j} f[i]*mu[i].

    Length is m+1 where m = number of usable integrand values (at most
    kappa); entry 0 is 0.
    """
    m = min(len(f), f.ts.n - 1)
    prefix = np.empty(m + 1)
    prefix[0] = 0.0
    np.cumsum(f.values[:m] * f.ts.mu[:m], out=prefix[1:])
    return prefix


def delta_integral(f: GridFn, a_idx: int, b_idx: int) -> float:
    """Delta integral of f from grid index a to grid index b.

    Equals ``sum_{i=a}^{b-1} f[i]*mu[i]`` for a <= b, is 0 for a == b, and
    changes sign when the limits are swapped.
    """
    prefix = _integrand_prefix(f)
    m = prefix.size - 1
    for name, idx in (("a_idx", a_idx), ("b_idx", b_idx)):
        if not 0 <= idx <= m:
            raise IndexError(f"{name}={idx} outside integrable range [0, {m}]")
    return float(prefix[b_idx] - prefix[a_idx])


def cumulative_integral(f: GridFn, a_idx: int) -> GridFn:
    """Antiderivative F(t) = int_a^t f, with F == 0 at the anchor index."""
    prefix = _integrand_prefix(f)
    if not 0 <= a_idx < prefix.size:
        raise IndexError(f"a_idx={a_idx} outside range [0, {prefix.size - 1}]")
    return GridFn(f.ts, prefix - prefix[a_idx])


def circle_plus(z, w, mu):
    """Circle-plus group operation z + w + mu*z*w (scalars or arrays)."""
    return z + w + mu * z * w


def ominus(p, mu, reg_tol: float = REG_TOL):
    """Additive inverse -p / (1 + mu*p) under circle-plus (scalars or arrays)."""
    denom = 1.0 + np.asarray(mu, dtype=float) * p
    if np.any(np.abs(denom) < reg_tol):
        raise NotRegressive(
            f"1 + mu*p vanishes (|1+mu*p| < {reg_tol:g}); ominus undefined"
        )
    out = -np.asarray(p, dtype=float) / denom
    return float(out) if out.ndim == 0 else out


def check_regressive(g: GridFn, reg_tol: float = REG_TOL) -> RegressiveFn:
    """Certify ``|1 + mu*g| >= reg_tol`` at every kappa point, or raise."""
    m = min(len(g), g.ts.n - 1)
    factors = 1.0 + g.ts.mu[:m] * g.values[:m]
    bad = np.abs(factors) < reg_tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NotRegressive(
            f"regressivity fails at index {i} (t={g.ts.points[i]:g}): "
            f"1 + mu*g = {factors[i]:.3e}",
            index=i,
            value=float(factors[i]),
        )
    return RegressiveFn(g, reg_tol)


def exp_delta(p: Union[GridFn, RegressiveFn], a_idx: int) -> GridFn:
    """Grid exponential: the solution of phi_delta = p*phi with phi(a) = 1.

    Built by the product recurrence ``E[i+1] = E[i] * (1 + mu[i]*p[i])``
    forward of the anchor and by division behind it; regressivity makes the
    divisor nonzero.  On an exact discrete grid this *is* the time-scale
    exponential; on a continuum-approximation mesh it is the first-order
    discretisation of exp(int p).
    """
    if isinstance(p, GridFn):
        p = check_regressive(p)
    ts = p.ts
    m = min(p.values.size, ts.n - 1)
    if m < ts.n - 1:
        raise GridMismatch("exponential needs its exponent on all of kappa")
    if not 0 <= a_idx < ts.n:
        raise IndexError(f"a_idx={a_idx} out of range")
    running = np.empty(ts.n)
    running[0] = 1.0
    np.cumprod(1.0 + ts.mu * p.values[: ts.n - 1], out=running[1:])
    return GridFn(ts, running / running[a_idx])
