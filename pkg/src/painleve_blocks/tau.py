"""Truncated tau-function expansions built from K-restricted conformal blocks.

``tau(t) = f(t) * sum_n C(a; sigma+n) s^n t^{(sigma+n)^2} B(a; sigma+n; t)``
with ``n`` running over ``[-n_range, n_range]`` and ``B`` replaced by the
K-restricted partial sum ``B_K`` from one of the routes in
:mod:`painleve_blocks.matrixmodel`.
"""
from __future__ import annotations

import cmath
import enum
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .blocks import BlockParams
from .errors import MissingParameterError, PoleError, TruncationWarning
from .matrixmodel import RouteResult, partial_sum_direct, partial_sum_hankel, partition_function_balanced
from .specfun import is_nonpositive_integer, log_barnes_g


class Equation(str, enum.Enum):
    PVI = "PVI"
    PV = "PV"
    PIII1 = "PIII1"
    PIII2 = "PIII2"
    PIII3 = "PIII3"


# theta_star is the first starred parameter, theta_star2 the second one of PIII1
REQUIRED_THETAS: dict[Equation, tuple[str, ...]] = {
    Equation.PVI: ("theta_0", "theta_t", "theta_1", "theta_inf"),
    Equation.PV: ("theta_star", "theta_0", "theta_t"),
    Equation.PIII1: ("theta_star", "theta_star2"),
    Equation.PIII2: ("theta_star",),
    Equation.PIII3: (),
}

ROUTES = ("direct", "hankel", "balanced")
TRUNCATION_REL = 1e-8


def max_workers() -> int:
    """Thread cap from ``BLOCKS_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("BLOCKS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class TauConfig:
    equation: Equation
    thetas: dict = field(default_factory=dict)
    sigma: complex = 0.25
    s: complex = 1.0
    n_range: int = 2
    K: int = 2
    route: str = "direct"
    max_weight: int = 20

    def __post_init__(self):
        object.__setattr__(self, "equation", Equation(self.equation))
        object.__setattr__(self, "thetas", {k: complex(v) for k, v in self.thetas.items()})
        if self.route not in ROUTES:
            raise ValueError(f"route must be one of {ROUTES}")
        if self.n_range < 0 or self.K < 1:
            raise ValueError("n_range must be >= 0 and K >= 1")

    def theta(self, name: str) -> complex:
        try:
            return self.thetas[name]
        except KeyError:
            raise MissingParameterError(f"{self.equation.value} needs parameter {name!r}") from None


def derive_a(cfg: TauConfig) -> tuple[complex, ...]:
    th = cfg.theta
    eq = cfg.equation
    if eq is Equation.PVI:
        return (th("theta_t") - th("theta_0"), th("theta_t") + th("theta_0"),
                th("theta_1") - th("theta_inf"), th("theta_1") + th("theta_inf"))
    if eq is Equation.PV:
        return (th("theta_star"), th("theta_0") - th("theta_t"), -th("theta_0") - th("theta_t"))
    if eq is Equation.PIII1:
        return (th("theta_star"), th("theta_star2"))
    if eq is Equation.PIII2:
        return (th("theta_star"),)
    return ()


def prefactor_f(cfg: TauConfig, t: complex) -> complex:
    t = complex(t)
    eq = cfg.equation
    if eq is Equation.PVI:
        th = cfg.theta
        expo_1t = 2 * th("theta_t") * th("theta_1")
        expo_t = -th("theta_0") ** 2 - th("theta_t") ** 2
        if t == 0:
            raise ValueError("the PVI prefactor is singular at t = 0")
        one_minus = (1 - t) ** expo_1t if expo_1t != 0 else 1
        return one_minus * (t**expo_t if expo_t != 0 else 1)
    if eq is Equation.PV:
        return cmath.exp(-cfg.theta("theta_t") * t)
    if eq is Equation.PIII1:
        return cmath.exp(-t / 2)
    return 1 + 0j


def log_structure_constant(a, sigma: complex) -> complex:
    """``log C(a; sigma)`` modulo 2 pi i."""
    sigma = complex(sigma)
    for z in (1 + 2 * sigma, 1 - 2 * sigma):
        if is_nonpositive_integer(z):
            raise PoleError(f"C(a; sigma) has a pole: G({z}) = 0 in the denominator")
    out = -log_barnes_g(1 + 2 * sigma) - log_barnes_g(1 - 2 * sigma)
    for ai in a:
        for z in (1 + sigma + ai, 1 - sigma + ai):
            if is_nonpositive_integer(z):
                return complex("-inf")
            out += log_barnes_g(z)
    return out


def structure_constant(a, sigma: complex) -> complex:
    """``C(a; sigma) = G(a; 1+sigma) G(a; 1-sigma) / (G(1+2 sigma) G(1-2 sigma))``."""
    lc = log_structure_constant(a, sigma)
    if lc.real == -math.inf:
        return 0j
    return cmath.exp(lc)


@dataclass
class TauTerm:
    n: int
    value: complex
    block: complex
    block_tail: float
    structure_constant: complex

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass
class TauResult:
    value: complex
    terms: list[TauTerm]
    truncation_estimate: float
    prefactor: complex
    warnings: list[str] = field(default_factory=list)


def block_partial_sum(t: complex, p: BlockParams, route: str, max_weight: int = 20, **kw):
    """B_K(a; sigma; t) from the named route."""
    if route == "direct":
        return partial_sum_direct(t, p, max_weight)
    if route == "balanced":
        return partition_function_balanced(t, p, max_weight)
    if route == "hankel":
        if t == 0:
            # only the empty configuration survives; log t does not exist
            return RouteResult(1 + 0j, "hankel", extra={"samples": 0})
        return partial_sum_hankel(cmath.log(complex(t)), p, **kw)
    raise ValueError(f"unknown route {route!r}")


def _term(cfg: TauConfig, a, t: complex, n: int) -> TauTerm:
    sig = cfg.sigma + n
    p = BlockParams(a, sig, cfg.K)
    lc = log_structure_constant(a, sig)
    if lc.real == -math.inf:
        return TauTerm(n, 0j, 0j, 0.0, 0j)
    if cfg.s == 0 and n != 0:
        return TauTerm(n, 0j, 0j, 0.0, cmath.exp(lc))
    blk = block_partial_sum(t, p, cfg.route, cfg.max_weight)
    s_pow = 1 if n == 0 else cfg.s**n
    # t^{(sigma+n)^2} on the principal branch, folded into the log to avoid overflow
    value = cmath.exp(lc + sig * sig * cmath.log(t)) * s_pow * blk.value
    return TauTerm(n, value, blk.value, blk.tail_estimate, cmath.exp(lc))


def _next_shell_estimate(terms: list[TauTerm], n_range: int) -> float:
    """Magnitude of the n = +-(n_range + 1) terms, extrapolated quadratically in log|term|."""
    if n_range == 0:
        return math.inf
    mags = {tm.n: tm.magnitude for tm in terms}
    est = 0.0
    for side in (1, -1):
        ns = [side * (n_range - 2), side * (n_range - 1), side * n_range]
        vals = [mags.get(n, 0.0) for n in ns]
        if vals[-1] == 0:
            continue
        if min(vals) == 0:
            return math.inf
        l0, l1, l2 = (math.log(v) for v in vals)
        est += math.exp(min(3 * l2 - 3 * l1 + l0, l2))
    return est


def tau_series(cfg: TauConfig, t: complex) -> TauResult:
    """Truncated tau expansion at ``t`` with its per-``n`` breakdown.

    ``truncation_estimate`` predicts the size of the first omitted terms
    ``n = +-(n_range + 1)`` by extrapolating ``log|term|`` quadratically in
    ``n`` (the leading behaviour is ``t^{(sigma+n)^2}``).  With ``s = 0``
    only ``n = 0`` contributes.
    """
    t = complex(t)
    if t == 0:
        raise ValueError("tau_series needs t != 0")
    notes: list[str] = []
    if t.imag != 0 or t.real <= 0:
        notes.append("complex or negative t: principal branches of t^(sigma+n)^2 are used")
    a = derive_a(cfg)
    ns = [0] if cfg.s == 0 else list(range(-cfg.n_range, cfg.n_range + 1))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        workers = min(max_workers(), len(ns))
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                terms = list(pool.map(lambda n: _term(cfg, a, t, n), ns))
        else:
            terms = [_term(cfg, a, t, n) for n in ns]
    notes.extend(str(w.message) for w in caught)
    total = 0j
    for term in sorted(terms, key=lambda tm: tm.n):
        total += term.value
    f = prefactor_f(cfg, t)
    total *= f
    trunc = 0.0 if cfg.s == 0 else abs(f) * _next_shell_estimate(terms, cfg.n_range)
    if trunc > TRUNCATION_REL * abs(total):
        msg = f"outermost tau terms are not negligible (next-shell estimate {trunc:.3g})"
        notes.append(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=2)
    return TauResult(total, sorted(terms, key=lambda tm: tm.n), trunc, f, notes)
