"""Particular solutions from one or two homogeneous solutions.

Two independent constructions are provided and cross-checked against each
other throughout the test suite:

* reduction of order, which needs a single nonvanishing homogeneous
  solution ``yi`` and a nested pair of delta antiderivatives, and
* variation of parameters, the classical two-integral formula over a
  fundamental pair.

Both anchor every antiderivative at the index ``a`` with integration
constant 0, so their outputs satisfy ``y_d(a) = 0`` and ``y_d_delta(a) = 0``
and differ from each other only by roundoff when built with the same
anchor; with different anchors they differ by a homogeneous solution.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    GridMismatch,
    NotRegressive,
    SingularWronskian,
    ZeroDenominator,
)
from .solver import (
    ProblemSpec,
    SolutionBundle,
    require_homogeneous,
    residual,
    wronskian,
)
from .timescale import (
    GridFn,
    TimeScale,
    check_regressive,
    delta_derivative,
    exp_delta,
)

__all__ = [
    "reduction_order_particular",
    "reduction_with_fallback",
    "second_solution",
    "variation_particular",
    "assemble_general",
    "convert_sigma_form",
    "sigma_form_residual",
]

# |yi * yi^sigma| below DENOM_TOL * max|yi|^2 is treated as a zero denominator.
DENOM_TOL = 1e-12


def _anchored_prefix(ts: TimeScale, integrand: np.ndarray, a_idx: int) -> np.ndarray:
    """Antiderivative values on the full grid from a kappa-length integrand."""
    prefix = np.empty(integrand.size + 1)
    prefix[0] = 0.0
    np.cumsum(integrand * ts.mu[: integrand.size], out=prefix[1:])
    return prefix - prefix[a_idx]


def _pair_product(yi: GridFn) -> np.ndarray:
    """yi(t) * yi(sigma(t)) on kappa, guarded against (near-)zeros."""
    v = yi.values
    pair = v[:-1] * v[1:]
    guard = DENOM_TOL * max(float(np.max(v * v)), 1e-300)
    small = np.abs(pair) < guard
    if np.any(small):
        i = int(np.argmax(small))
        raise ZeroDenominator(
            f"yi(t)*yi(sigma(t)) = {pair[i]:.3e} at index {i} "
            f"(t={yi.ts.points[i]:g}) is below the guard {guard:.3e}",
            index=i,
        )
    return pair


def reduction_order_particular(
    spec: ProblemSpec,
    yi: GridFn,
    a_idx: int | None = None,
    homog_tol: float = 1e-8,
) -> GridFn:
    """Particular solution from a single homogeneous solution ``yi``.

    With g = -p + mu*q and E = e_g(., a) the construction is the nested
    pair of delta antiderivatives

        y_d(t) = yi(t) * int_a^t  E(s) * I(s) / (yi(s) yi(sigma(s)))  ds,
        I(s)   = int_a^s  r(u) * yi(sigma(u)) / E(sigma(u))  du,

    where 1/E realises the reciprocal exponential of the negated exponent
    exactly, and both integration constants are 0 at the anchor.
    """
    if not spec.ts.same_grid(yi.ts):
        raise GridMismatch("yi lives on a different grid")
    if a_idx is None:
        a_idx = spec.a_idx
    require_homogeneous(spec, yi, homog_tol)
    pair = _pair_product(yi)

    ts = spec.ts
    m = ts.n - 1
    E = exp_delta(check_regressive(spec.composite, spec.reg_tol), a_idx).values
    inner_integrand = spec.r.values[:m] * yi.values[1:] / E[1:]
    inner = _anchored_prefix(ts, inner_integrand, a_idx)
    outer_integrand = E[:m] * inner[:m] / pair
    outer = _anchored_prefix(ts, outer_integrand, a_idx)
    return GridFn(ts, yi.values * outer)


def reduction_with_fallback(
    spec: ProblemSpec, y1: GridFn, y2: GridFn
) -> tuple[GridFn, str]:
    """Reduction-of-order particular over the first usable basis solution.

    The construction divides by yi(t)*yi(sigma(t)), so a basis solution
    with a zero in the window is unusable; combinations of the pair are
    tried in turn (each combination is again an exact homogeneous
    solution).  Returns the particular solution and a label for the basis
    that produced it.
    """
    candidates = [
        (y1, "y1"),
        (y2, "y2"),
        (GridFn(spec.ts, y1.values + y2.values), "y1+y2"),
        (GridFn(spec.ts, y1.values - y2.values), "y1-y2"),
    ]
    last_exc: Exception | None = None
    for yi, label in candidates:
        try:
            return reduction_order_particular(spec, yi), label
        except ZeroDenominator as exc:
            last_exc = exc
    raise last_exc


def second_solution(
    spec: ProblemSpec,
    y1: GridFn,
    a_idx: int | None = None,
    homog_tol: float = 1e-8,
) -> GridFn:
    """A second, independent homogeneous solution grown out of ``y1``.

        y2(t) = y1(t) * int_a^t  e_g(s, a) / (y1(s) y1(sigma(s)))  ds

    with g = -p + mu*q.  The inner integral of the driven construction is
    replaced by the constant 1 (a choice of integration constant), which is
    what reduces the order.  The output satisfies ``y2(a) = 0`` and
    ``W(y1, y2) = e_g(., a)``, nonzero everywhere, hence independence.
    """
    homog = spec.homogeneous()
    if not homog.ts.same_grid(y1.ts):
        raise GridMismatch("y1 lives on a different grid")
    if a_idx is None:
        a_idx = homog.a_idx
    require_homogeneous(homog, y1, homog_tol)
    pair = _pair_product(y1)

    ts = homog.ts
    m = ts.n - 1
    E = exp_delta(check_regressive(homog.composite, homog.reg_tol), a_idx).values
    outer = _anchored_prefix(ts, E[:m] / pair, a_idx)
    return GridFn(ts, y1.values * outer)


def _extended_wronskian(spec: ProblemSpec, y1: GridFn, y2: GridFn) -> np.ndarray:
    """Wronskian on the full grid.

    On kappa it is computed directly; the value at the final point is the
    one exact product step ``W * (1 + mu*g)`` of its first-order dynamic
    equation, which is what any continuation of the grid would give.
    """
    W = wronskian(y1, y2).values
    g = spec.composite.values
    mu = spec.ts.mu
    last = W[-1] * (1.0 + mu[-1] * g[-1])
    return np.append(W, last)


def variation_particular(
    spec: ProblemSpec,
    y1: GridFn,
    y2: GridFn,
    a_idx: int | None = None,
    homog_tol: float = 1e-8,
) -> GridFn:
    """Two-integral particular solution over a fundamental pair.

        y_d(t) = y2(t) * int_a^t y1(sigma(s)) r(s) / W(sigma(s)) ds
               - y1(t) * int_a^t y2(sigma(s)) r(s) / W(sigma(s)) ds

    Anchoring both integrals at ``a`` gives ``y_d(a) = y_d_delta(a) = 0``.
    Serves as the independent cross-check for the reduction-of-order route.
    """
    if a_idx is None:
        a_idx = spec.a_idx
    require_homogeneous(spec, y1, homog_tol)
    require_homogeneous(spec, y2, homog_tol)

    ts = spec.ts
    m = ts.n - 1
    W = _extended_wronskian(spec, y1, y2)
    scale = max(float(np.max(np.abs(W))), 1e-300)
    small = np.abs(W) < DENOM_TOL * scale
    if np.any(small):
        i = int(np.argmax(small))
        raise SingularWronskian(
            f"Wronskian {W[i]:.3e} at index {i} (t={ts.points[i]:g}) is "
            f"numerically singular",
            index=i,
        )
    w_sigma = W[1:]
    rr = spec.r.values[:m]
    c1 = _anchored_prefix(ts, y1.values[1:] * rr / w_sigma, a_idx)
    c2 = _anchored_prefix(ts, y2.values[1:] * rr / w_sigma, a_idx)
    return GridFn(ts, y2.values * c1 - y1.values * c2)


def assemble_general(
    spec: ProblemSpec, y1: GridFn, y2: GridFn, yd: GridFn
) -> SolutionBundle:
    """Fit c1*y1 + c2*y2 + yd to the initial conditions at t0.

    Solves the 2x2 system whose determinant is W(t0); a vanishing
    determinant means the pair is not fundamental there.
    """
    y1d = delta_derivative(y1)
    y2d = delta_derivative(y2)
    ydd = delta_derivative(yd)
    t0 = spec.t0_idx
    a11, a12 = y1.values[t0], y2.values[t0]
    a21, a22 = y1d.values[t0], y2d.values[t0]
    det = a11 * a22 - a12 * a21
    scale = max(abs(a11 * a22) + abs(a12 * a21), 1.0)
    if abs(det) < 1e-12 * scale:
        raise SingularWronskian(
            f"W(t0) = {det:.3e} at index {t0}; basis is not fundamental there",
            index=t0,
        )
    b1 = spec.A - yd.values[t0]
    b2 = spec.B - ydd.values[t0]
    c1 = (b1 * a22 - b2 * a12) / det
    c2 = (b2 * a11 - b1 * a21) / det
    y = GridFn(spec.ts, c1 * y1.values + c2 * y2.values + yd.values)
    return SolutionBundle(
        y1=y1,
        y2=y2,
        y1d=y1d,
        y2d=y2d,
        W=wronskian(y1, y2),
        yd=yd,
        c1=float(c1),
        c2=float(c2),
        y=y,
        residual=residual(spec, y),
    )


def convert_sigma_form(
    alpha: GridFn, beta: GridFn, reg_tol: float = 1e-12
) -> tuple[GridFn, GridFn]:
    """Rewrite coefficients of the jumped-argument equation form.

    The equation  y_dd + alpha * y_d(sigma) + beta * y(sigma) = r  becomes
    the plain form  y_dd + p*y_d + q*y = r  with

        p = (alpha + mu*beta) / (1 + mu*alpha),   q = beta / (1 + mu*alpha),

    valid where 1 + mu*alpha is nonzero.  The converted composite satisfies
    -p + mu*q == ominus(alpha) pointwise, so regressivity of alpha carries
    over.  At the final grid point, where mu is undefined and the values
    are never consumed, the mu -> 0 collapse (p, q) = (alpha, beta) is used.
    """
    if not alpha.ts.same_grid(beta.ts):
        raise GridMismatch("alpha and beta live on different grids")
    ts = alpha.ts
    mu = ts.mu
    m = ts.n - 1
    denom = 1.0 + mu * alpha.values[:m]
    bad = np.abs(denom) < reg_tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NotRegressive(
            f"1 + mu*alpha = {denom[i]:.3e} at index {i} (t={ts.points[i]:g})",
            index=i,
            value=float(denom[i]),
        )
    p = np.append((alpha.values[:m] + mu * beta.values[:m]) / denom, alpha.values[m])
    q = np.append(beta.values[:m] / denom, beta.values[m])
    return GridFn(ts, p), GridFn(ts, q)


def sigma_form_residual(
    alpha: GridFn, beta: GridFn, r: GridFn, y: GridFn
) -> GridFn:
    """Defect of y against the jumped-argument form, evaluated directly."""
    ts = alpha.ts
    if not (ts.same_grid(beta.ts) and ts.same_grid(r.ts) and ts.same_grid(y.ts)):
        raise GridMismatch("operands live on different grids")
    yd = delta_derivative(y).values
    mu = ts.mu
    ydd = np.diff(yd) / mu[: yd.size - 1]
    m = ydd.size
    vals = (
        ydd
        + alpha.values[:m] * yd[1 : m + 1]
        + beta.values[:m] * y.values[1 : m + 1]
        - r.values[:m]
    )
    return GridFn(ts, vals)
