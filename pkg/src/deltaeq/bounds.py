"""Energy norms, exponential growth envelopes, and uniqueness checks.

For a homogeneous solution y the solution norm is
``norm(t) = sqrt(y(t)^2 + y_d(t)^2)``.  With k = 1 + |p| + |q| (constant
coefficients) or k1 = 1 + p1 + q1 for bounds p1 >= max|p|, q1 >= max|q|,
the norm is dominated for t >= t0 by the envelope

    norm(t) <= norm(t0) * e_k(t, t0),

a discrete Gronwall consequence of the pointwise energy inequality
``u_delta <= (k (+) k) * u`` for u = norm^2, where (+) is circle-plus.
Uniqueness of the IVP solution right of t0 follows, and is checked here
numerically by building the same solution along three independent routes
and measuring the spread.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, NotRegressive
from .particular import (
    assemble_general,
    reduction_with_fallback,
    variation_particular,
)
from .solver import (
    ProblemSpec,
    fundamental_pair,
    require_homogeneous,
    step_ivp,
)
from .timescale import (
    GridFn,
    RegressiveFn,
    circle_plus,
    delta_derivative,
    exp_delta,
)

__all__ = [
    "BoundReport",
    "GronwallReport",
    "NonmultiplicityReport",
    "sol_norm2",
    "gronwall_check",
    "growth_bound_check",
    "nonmultiplicity_check",
]

# Multiplicative slack absorbing roundoff in envelope comparisons; a genuine
# violation is orders of magnitude beyond this.
VERDICT_SLACK = 1e-10


def sol_norm2(y: GridFn, ydelta: GridFn) -> GridFn:
    """Euclidean norm sqrt(y^2 + y_d^2) on kappa."""
    if not y.ts.same_grid(ydelta.ts):
        raise GridMismatch("y and y_d live on different grids")
    m = min(len(y), len(ydelta), y.ts.n - 1)
    return GridFn(y.ts, np.hypot(y.values[:m], ydelta.values[:m]))


@dataclass(frozen=True, eq=False)
class GronwallReport:
    """Pointwise check of a differential inequality and its integral form.

    ``hypothesis_ok[i]`` records ``v_d <= ell*v`` at kappa index i >= t0;
    ``conclusion_ok[j]`` records ``v <= v(t0) * e_ell(t, t0)`` at grid
    index j >= t0.  ``first_violation`` is ("hypothesis"|"conclusion",
    grid index) for the earliest failure, or None.
    """

    t0_idx: int
    hypothesis_ok: np.ndarray
    conclusion_ok: np.ndarray
    hypothesis_margin: np.ndarray
    conclusion_margin: np.ndarray

    @property
    def first_violation(self):
        bad_h = np.flatnonzero(~self.hypothesis_ok)
        bad_c = np.flatnonzero(~self.conclusion_ok)
        cands = []
        if bad_h.size:
            cands.append((self.t0_idx + int(bad_h[0]), "hypothesis"))
        if bad_c.size:
            cands.append((self.t0_idx + int(bad_c[0]), "conclusion"))
        if not cands:
            return None
        idx, kind = min(cands)
        return kind, idx

    @property
    def passed(self) -> bool:
        return bool(np.all(self.hypothesis_ok) and np.all(self.conclusion_ok))


def gronwall_check(v: GridFn, ell: RegressiveFn, t0_idx: int) -> GronwallReport:
    """Verify ``v_d <= ell*v`` for t >= t0 and then ``v <= v(t0)*e_ell``.

    ``ell`` must be positively regressive (1 + mu*ell > 0), which is what
    makes the step-by-step multiplication of the inequality legitimate.
    """
    ts = v.ts
    mu = ts.mu
    m = min(len(v) - 1, ts.n - 1)
    ell_vals = ell.values
    m_ell = min(ell_vals.size, ts.n - 1)
    factors = 1.0 + mu[:m_ell] * ell_vals[:m_ell]
    if np.any(factors <= 0.0):
        i = int(np.argmax(factors <= 0.0))
        raise NotRegressive(
            f"ell is not positively regressive at index {i}: 1 + mu*ell = "
            f"{factors[i]:.3e}",
            index=i,
            value=float(factors[i]),
        )
    if not 0 <= t0_idx < len(v):
        raise IndexError(f"t0_idx={t0_idx} out of range")

    vd = np.diff(v.values) / mu[: len(v) - 1]
    vv = v.values
    scale_h = 1.0 + np.abs(ell_vals[:m] * vv[:m])
    hyp_margin = ell_vals[:m] * vv[:m] - vd[:m]
    hyp_ok = hyp_margin >= -VERDICT_SLACK * scale_h

    env = vv[t0_idx] * exp_delta(ell, t0_idx).values[: len(v)]
    scale_c = 1.0 + np.abs(env)
    conc_margin = env - vv
    conc_ok = conc_margin >= -VERDICT_SLACK * scale_c

    return GronwallReport(
        t0_idx=t0_idx,
        hypothesis_ok=hyp_ok[t0_idx:],
        conclusion_ok=conc_ok[t0_idx:],
        hypothesis_margin=hyp_margin[t0_idx:],
        conclusion_margin=conc_margin[t0_idx:],
    )


@dataclass(frozen=True, eq=False)
class BoundReport:
    """Norm-versus-envelope comparison for one homogeneous solution.

    ``norm`` and ``envelope`` are kappa-length grid functions; ``verdict``
    and ``margin`` are aligned with them.  The guarantee applies to grid
    indices >= t0 only; entries left of t0 are informational.  The energy
    fields record the pointwise slope inequality ``u_delta <= (k(+)k)*u``
    on kappa2 for u = norm^2.
    """

    t0_idx: int
    k: float
    norm: GridFn
    envelope: GridFn
    verdict: np.ndarray
    margin: np.ndarray
    energy_ok: np.ndarray
    energy_margin: np.ndarray

    @property
    def passed(self) -> bool:
        t0 = self.t0_idx
        return bool(np.all(self.verdict[t0:]) and np.all(self.energy_ok[t0:]))

    @property
    def worst_margin(self) -> float:
        return float(np.min(self.margin[self.t0_idx:]))


def growth_bound_check(
    spec: ProblemSpec,
    y: GridFn,
    mode: str = "var",
    p1: float | None = None,
    q1: float | None = None,
    homog_tol: float = 1e-8,
) -> BoundReport:
    """Check the exponential envelope on a homogeneous solution.

    ``mode="const"`` requires constant coefficients and uses
    k = 1 + |p| + |q|; ``mode="var"`` uses k = 1 + p1 + q1 with the bounds
    defaulting to the exact coefficient maxima over the checked window
    (kappa2 indices >= t0).  Verdicts are expected true for t >= t0.
    """
    require_homogeneous(spec, y, homog_tol)
    ts = spec.ts
    n = ts.n
    t0 = spec.t0_idx
    win = slice(t0, n - 2)
    p_max = float(np.max(np.abs(spec.p.values[win]), initial=0.0))
    q_max = float(np.max(np.abs(spec.q.values[win]), initial=0.0))
    if mode == "const":
        if np.ptp(spec.p.values) > 1e-12 * (1.0 + p_max) or np.ptp(
            spec.q.values
        ) > 1e-12 * (1.0 + q_max):
            raise ValueError("mode='const' needs constant coefficients")
        k = 1.0 + abs(float(spec.p.values[0])) + abs(float(spec.q.values[0]))
    elif mode == "var":
        p1 = p_max if p1 is None else float(p1)
        q1 = q_max if q1 is None else float(q1)
        if p1 < 0 or q1 < 0:
            raise ValueError("coefficient bounds must be nonnegative")
        if p1 < p_max - 1e-12 or q1 < q_max - 1e-12:
            raise ValueError("supplied bounds do not dominate the coefficients")
        k = 1.0 + p1 + q1
    else:
        raise ValueError(f"unknown mode {mode!r}")

    ydelta = delta_derivative(y)
    norm = sol_norm2(y, ydelta)
    k_fn = GridFn.constant(ts, k)
    env_vals = norm.values[t0] * exp_delta(k_fn, t0).values[: n - 1]
    envelope = GridFn(ts, env_vals)
    margin = env_vals - norm.values
    verdict = norm.values <= env_vals * (1.0 + VERDICT_SLACK) + VERDICT_SLACK

    u = norm.values**2
    ud = np.diff(u) / ts.mu[: u.size - 1]
    kk = circle_plus(k, k, ts.mu[: ud.size])
    energy_margin = kk * u[: ud.size] - ud
    energy_ok = energy_margin >= -VERDICT_SLACK * (1.0 + np.abs(kk * u[: ud.size]))

    return BoundReport(
        t0_idx=t0,
        k=k,
        norm=norm,
        envelope=envelope,
        verdict=verdict,
        margin=margin,
        energy_ok=energy_ok,
        energy_margin=energy_margin,
    )


@dataclass(frozen=True)
class NonmultiplicityReport:
    """Spread between independent constructions of the same IVP solution.

    Deviations are maxima of |difference| over grid indices >= t0; ``scale``
    is max(1, max|y|) over the same window, so ``max_relative_deviation``
    is a relative figure.  Uniqueness right of t0 predicts it vanishes.
    """

    deviation_reduction: float
    deviation_variation: float
    scale: float

    @property
    def max_relative_deviation(self) -> float:
        return max(self.deviation_reduction, self.deviation_variation) / self.scale

    def passed(self, tol: float = 1e-9) -> bool:
        return self.max_relative_deviation <= tol


def nonmultiplicity_check(spec: ProblemSpec) -> NonmultiplicityReport:
    """Build the IVP solution three ways and measure the spread for t >= t0.

    Route 1 steps the IVP directly; route 2 assembles a general solution
    around the reduction-of-order particular (falling back to the second
    basis solution if the first vanishes somewhere); route 3 does the same
    around the variation-of-parameters particular.  Any two solutions with
    identical initial data may differ only by a homogeneous solution that
    starts at zero, which the growth envelope pins at zero for t >= t0.
    """
    y_step, _ = step_ivp(spec)
    y1, y2 = fundamental_pair(spec)
    yd_ro, _ = reduction_with_fallback(spec, y1, y2)
    bundle_ro = assemble_general(spec, y1, y2, yd_ro)
    yd_vp = variation_particular(spec, y1, y2)
    bundle_vp = assemble_general(spec, y1, y2, yd_vp)

    sl = slice(spec.t0_idx, None)
    ref = y_step.values[sl]
    dev_ro = float(np.max(np.abs(ref - bundle_ro.y.values[sl])))
    dev_vp = float(np.max(np.abs(ref - bundle_vp.y.values[sl])))
    scale = max(1.0, float(np.max(np.abs(ref))))
    return NonmultiplicityReport(dev_ro, dev_vp, scale)
