"""Weights omega: (0, 1] -> (0, inf) and their diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "Weight",
    "evaluate",
    "dyadic_grid",
    "moderateness_constant",
    "fast_majorant_ratio",
    "classify",
    "KINDS",
]

KINDS = ("power", "constant", "log_growth", "power_growth", "tabulated")

# log substitution t = delta * exp(-u), truncated at u = FM_CUTOFF
FM_CUTOFF = 40.0
FM_NODES = 4096
# tail integrand relative to omega(delta) above which the integral is declared divergent
FM_TAIL_TOL = 1e-6
# relative change of the decay rate tolerated when adding the exponential tail
FM_RATE_TOL = 1e-6


@dataclass(frozen=True)
class Weight:
    """A weight from one of the built-in families, or a tabulated callable.

    ``power``: t**alpha; ``constant``: 1; ``log_growth``: log(e/t)**beta;
    ``power_growth``: t**(-beta); ``tabulated``: ``func(t)``.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown weight kind {self.kind!r}")
        if self.kind == "tabulated" and self.func is None:
            raise DomainError("tabulated weight needs a callable")

    @classmethod
    def power(cls, alpha):
        return cls("power", alpha=float(alpha))

    @classmethod
    def constant(cls):
        return cls("constant")

    @classmethod
    def log_growth(cls, beta):
        return cls("log_growth", beta=float(beta))

    @classmethod
    def power_growth(cls, beta):
        return cls("power_growth", beta=float(beta))

    @classmethod
    def tabulated(cls, func):
        return cls("tabulated", func=func)

    def _raw(self, t):
        if self.kind == "power":
            return t**self.alpha
        if self.kind == "constant":
            return np.ones_like(t)
        if self.kind == "log_growth":
            return (1.0 - np.log(t)) ** self.beta
        if self.kind == "power_growth":
            return t ** (-self.beta)
        return np.asarray(self.func(t), dtype=float)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(~(arr > 0.0)) or np.any(arr > 1.0):
            raise DomainError(f"weight argument must lie in (0, 1], got {t!r}")
        out = self._raw(arr)
        return float(out) if np.ndim(out) == 0 else out

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "power":
            d["alpha"] = self.alpha
        elif self.kind in ("log_growth", "power_growth"):
            d["beta"] = self.beta
        return d


def evaluate(w: Weight, t):
    return w(t)


def dyadic_grid(k_max: int) -> np.ndarray:
    """{2^-j (1 + i/8): 0 <= j <= k_max, 0 <= i <= 8} intersected with (0, 1], sorted."""
    j = np.arange(k_max + 1)[:, None]
    i = np.arange(9)[None, :]
    pts = (2.0 ** (-j) * (1.0 + i / 8.0)).ravel()
    return np.unique(pts[pts <= 1.0])


def moderateness_constant(w: Weight, k_max: int) -> float:
    """Empirical sup of max(w(a)/w(b), w(b)/w(a)) over grid pairs with 1/2 <= a/b <= 2.

    A lower bound for the true moderateness constant; nondecreasing in ``k_max``
    because the grids are nested.
    """
    if k_max < 2:
        raise DomainError("k_max must be >= 2")
    t = dyadic_grid(k_max)
    v = np.asarray(w(t), dtype=float)
    ratio_t = t[:, None] / t[None, :]
    # grid points are exact binary fractions, so a/b == 2 is exact
    admissible = (ratio_t >= 0.5) & (ratio_t <= 2.0)
    ratio_w = v[:, None] / v[None, :]
    return float(np.max(np.where(admissible, ratio_w, 1.0)))


def fast_majorant_ratio(w: Weight, delta: float) -> float:
    """(int_0^delta w(t)/t dt) / w(delta); ``math.inf`` flags divergence.

    With t = delta*exp(-u) the integral becomes int_0^U w(delta e^{-u}) du,
    computed by the composite trapezoid rule on FM_NODES intervals plus one
    Richardson step against the half-resolution rule.  If the integrand has
    not decayed below FM_TAIL_TOL at u = U but decays at a steady exponential
    rate there (as t^alpha does), the tail beyond U is added in closed form;
    otherwise the integral is flagged divergent.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    u = np.linspace(0.0, FM_CUTOFF, FM_NODES + 1)
    wd = w(delta)
    g = np.asarray(w(delta * np.exp(-u)), dtype=float) / wd
    if not np.all(np.isfinite(g)):
        return math.inf
    h = u[1] - u[0]
    fine = h * (g.sum() - 0.5 * (g[0] + g[-1]))
    gc = g[::2]
    coarse = 2 * h * (gc.sum() - 0.5 * (gc[0] + gc[-1]))
    body = (4.0 * fine - coarse) / 3.0
    if g[-1] <= FM_TAIL_TOL:
        return float(body)
    # decay rates over the last two unit intervals of u
    step = int(round(1.0 / h))
    g0, g1, g2 = g[-1 - 2 * step], g[-1 - step], g[-1]
    if min(g0, g1, g2) <= 0:
        return math.inf
    span = step * h
    rate_prev, rate = math.log(g0 / g1) / span, math.log(g1 / g2) / span
    if rate <= 0 or abs(rate - rate_prev) > FM_RATE_TOL * rate:
        return math.inf
    return float(body + g2 / rate)


def classify(w: Weight) -> str:
    """Coarse label of the space B_omega for the built-in families."""
    if w.kind == "constant":
        return "bloch"
    if w.kind == "power":
        if w.alpha > 0:
            return "lipschitz_type"
        return "bloch" if w.alpha == 0 else "growth"
    if w.kind == "power_growth":
        if w.beta > 0:
            return "growth"
        return "bloch" if w.beta == 0 else "lipschitz_type"
    if w.kind == "log_growth":
        if w.beta > 0:
            return "negative_smoothness"
        if w.beta == 0:
            return "bloch"
    return "unclassified"
