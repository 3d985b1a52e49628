"""Integer-grid specialisations: shift-form recurrences and closed forms.

Everything here works on plain sequences over a window of consecutive
integers, indexed 0..N-1; the formulas only involve index differences, so
any actual starting time is a harmless shift.  The product-sum particular
solution is implemented by direct accumulation, independent of the general
grid machinery, so that the two routes can be compared as oracles for each
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ComplexRoots, DegenerateRoots, NotRegressive, ZeroBeta, ZeroDenominator

__all__ = [
    "ShiftFormSpec",
    "shift_to_delta",
    "product_sum_particular",
    "const_coeff_roots",
    "const_coeff_particular",
]


@dataclass(frozen=True, eq=False)
class ShiftFormSpec:
    """The recurrence y(t+2) + alpha(t) y(t+1) + beta(t) y(t) = r(t).

    Sequences run over a window of consecutive integers starting at
    ``t_start``; the recurrence applies at the first N-2 offsets.  A zero
    of beta collapses the two-term history and is rejected outright.
    """

    alpha: np.ndarray
    beta: np.ndarray
    r: np.ndarray
    t_start: int = 0

    def __post_init__(self):
        for name in ("alpha", "beta", "r"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.alpha.size
        if self.beta.size != n or self.r.size != n:
            raise ValueError("alpha, beta, r must have equal length")
        if n < 3:
            raise ValueError("window needs at least 3 points")
        if np.any(self.beta == 0.0):
            i = int(np.argmax(self.beta == 0.0))
            raise ZeroBeta(f"beta vanishes at offset {i} (t={self.t_start + i})")

    @property
    def n(self) -> int:
        return self.alpha.size

    def step(self, y0: float, y1: float) -> np.ndarray:
        """Run the raw recurrence forward from the first two values."""
        y = np.empty(self.n)
        y[0], y[1] = y0, y1
        for t in range(self.n - 2):
            y[t + 2] = self.r[t] - self.alpha[t] * y[t + 1] - self.beta[t] * y[t]
        return y


def shift_to_delta(alpha, beta) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of the equivalent forward-difference form.

    Expanding the second difference of y gives p = alpha + 2 and
    q = alpha + beta + 1, with the identity 1 - p + q == beta tying the
    two regressivity conditions together.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    return alpha + 2.0, alpha + beta + 1.0


def product_sum_particular(p, q, r, a: int, y_i) -> np.ndarray:
    """Particular solution of the difference equation as a nested product-sum.

    For the forward-difference form with coefficients p, q and forcing r
    over indices 0..N-1, one nonvanishing homogeneous solution ``y_i``
    yields

        y_d(t) = y_i(t) * sum_{x=a}^{t-1} P(x) * S(x) / (y_i(x) y_i(x+1)),
        S(x)   = sum_{s=a}^{x-1} r(s) * y_i(s+1) / (P(s) * (1 - p(s) + q(s))),

    where P(x) is the running product of (1 - p + q) from a to x-1.  Both
    sums are anchored at ``a`` with constant 0.  Evaluation is by direct
    accumulation, deliberately independent of the grid machinery.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    y_i = np.asarray(y_i, dtype=float)
    n = y_i.size
    if not (p.size == q.size == r.size == n):
        raise ValueError("p, q, r, y_i must have equal length")
    if not 0 <= a < n:
        raise IndexError(f"anchor a={a} out of range")

    factors = 1.0 - p[: n - 1] + q[: n - 1]
    if np.any(np.abs(factors) < 1e-12):
        i = int(np.argmax(np.abs(factors) < 1e-12))
        raise NotRegressive(
            f"1 - p + q = {factors[i]:.3e} at offset {i}", index=i, value=float(factors[i])
        )
    pair = y_i[: n - 1] * y_i[1:]
    guard = 1e-12 * max(float(np.max(y_i * y_i)), 1e-300)
    if np.any(np.abs(pair) < guard):
        i = int(np.argmax(np.abs(pair) < guard))
        raise ZeroDenominator(f"y_i(t)*y_i(t+1) vanishes at offset {i}", index=i)

    # Running products P[x] = prod_{j=a}^{x-1} factors[j], signed-anchored at a.
    prods = np.empty(n)
    prods[0] = 1.0
    np.cumprod(factors, out=prods[1:])
    prods = prods / prods[a]

    inner = np.empty(n)
    inner[0] = 0.0
    np.cumsum(r[: n - 1] * y_i[1:] / prods[1:], out=inner[1:])
    inner = inner - inner[a]

    outer = np.empty(n)
    outer[0] = 0.0
    np.cumsum(prods[: n - 1] * inner[: n - 1] / pair, out=outer[1:])
    outer = outer - outer[a]
    return y_i * outer


def const_coeff_roots(alpha: float, beta: float) -> tuple[float, float]:
    """Real characteristic roots of y(t+2) + 2*alpha*y(t+1) + beta*y(t) = r(t).

    Note the convention: the middle coefficient of the recurrence is
    ``2*alpha``.  Requires beta != 0 and alpha^2 > beta, so the roots
    -alpha -+ sqrt(alpha^2 - beta) are real, distinct and nonzero (their
    product is beta).
    """
    if beta == 0.0:
        raise ZeroBeta("beta must be nonzero")
    disc = alpha * alpha - beta
    if disc == 0.0:
        raise DegenerateRoots("alpha^2 == beta gives a double root")
    if disc < 0.0:
        raise ComplexRoots("alpha^2 < beta gives complex roots")
    root = math.sqrt(disc)
    lam1 = -alpha - root
    lam2 = -alpha + root
    return lam1, lam2


def const_coeff_particular(
    alpha: float, beta: float, r, a: int, which_root: int = 1
) -> np.ndarray:
    """Closed-form particular solution of the constant-coefficient recurrence.

        y_d(t) = sum_{x=a}^{t-1} sum_{s=a}^{x-1} r(s) * lam^(t+s-2x) * beta^(x-1-s)

    with lam one of the two characteristic roots.  Either root gives a
    solution; the two differ by a homogeneous sequence.  Evaluated by the
    direct double sum over the window (anchored sums are empty for t <= a).
    """
    if which_root not in (1, 2):
        raise ValueError("which_root must be 1 or 2")
    lam = const_coeff_roots(alpha, beta)[which_root - 1]
    r = np.asarray(r, dtype=float)
    n = r.size
    if not 0 <= a < n:
        raise IndexError(f"anchor a={a} out of range")
    out = np.zeros(n)
    for t in range(a, n):
        acc = 0.0
        for x in range(a, t):
            for s in range(a, x):
                acc += r[s] * lam ** (t + s - 2 * x) * beta ** (x - 1 - s)
        out[t] = acc
    return out
