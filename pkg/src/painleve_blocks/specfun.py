"""Complex special functions: log-gamma, reciprocal gamma, Barnes G and pFq.

Everything here works on Python ``complex`` scalars.  Gamma is evaluated by
the Stirling series after an upward shift; the left half-plane goes through
the reflection formula with an argument-reduced ``sin(pi z)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import NonConvergenceError, PoleError

LOG_2PI = math.log(2 * math.pi)
HALF_LOG_2PI = 0.5 * LOG_2PI
LOG_PI = math.log(math.pi)
EULER_GAMMA = 0.57721566490153286061
# zeta'(-1) = 1/12 - log(Glaisher's constant)
ZETA_PRIME_M1 = -0.16542114370045092921

# B_{2k} / (2k (2k-1)), k = 1..9
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
)
# B_{2k+2} / (4k (k+1)), k = 1..7
_BARNES = (
    (-1.0 / 30.0) / 8.0,
    (1.0 / 42.0) / 24.0,
    (-1.0 / 30.0) / 48.0,
    (5.0 / 66.0) / 80.0,
    (-691.0 / 2730.0) / 120.0,
    (7.0 / 6.0) / 168.0,
    (-3617.0 / 510.0) / 224.0,
)

_STIRLING_MIN = 15.0
_BARNES_MIN = 20.0

ParamList = Sequence[complex]


def is_nonpositive_integer(z: complex) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


# relative distance below which a reciprocal-gamma argument counts as a nonpositive integer
TRUNCATION_TOL = 1e-9


def near_integer(z: complex, tol: float = TRUNCATION_TOL) -> int | None:
    """The integer within ``tol * max(1, |z|)`` of ``z``, or None."""
    z = complex(z)
    n = round(z.real)
    if abs(complex(z.real - n, z.imag)) <= tol * max(1.0, abs(z)):
        return n
    return None


def snap_nonpositive_integer(z: complex, tol: float = TRUNCATION_TOL) -> complex:
    """``z`` rounded to the nearest nonpositive integer when within rounding distance of it.

    Truncation of the lattice measures depends on arguments such as
    ``K - sigma + a`` hitting an integer exactly, which floating-point input
    cannot guarantee; this is the one place where a near-hit is promoted.
    """
    n = near_integer(z, tol)
    return complex(n) if n is not None and n <= 0 else complex(z)


def sinpi(z: complex) -> complex:
    """``sin(pi z)`` with the real part reduced exactly to [-1/2, 1/2]."""
    z = complex(z)
    n = round(z.real)
    r = cmath.sin(math.pi * complex(z.real - n, z.imag))
    return -r if n % 2 else r


def _stirling(z: complex) -> complex:
    # log Gamma(z) for |z| >= _STIRLING_MIN, Re z > 0
    w = 1.0 / z
    w2 = w * w
    acc = 0j
    for c in reversed(_STIRLING):
        acc = acc * w2 + c
    return (z - 0.5) * cmath.log(z) - z + HALF_LOG_2PI + acc * w


def _log_gamma_right(z: complex) -> complex:
    # principal log Gamma for Re z >= 1/2 (continuous, no 2 pi i jumps)
    if abs(z.imag) >= _STIRLING_MIN:
        return _stirling(z)
    shift = 0j
    while abs(z) < _STIRLING_MIN:
        shift += cmath.log(z)
        z += 1
    return _stirling(z) - shift


def _log_gamma_right_mod(z: complex) -> complex:
    # log Gamma for Re z >= 1/2 modulo 2 pi i: the shift is one product and one log
    if abs(z.imag) >= _STIRLING_MIN:
        return _stirling(z)
    prod = 1 + 0j
    while abs(z) < _STIRLING_MIN:
        prod *= z
        z += 1
    return _stirling(z) - cmath.log(prod)


def log_gamma(z: complex) -> complex:
    """Principal branch of ``log Gamma(z)`` (analytic on the plane cut along (-inf, 0])."""
    z = complex(z)
    if is_nonpositive_integer(z):
        raise PoleError(f"log_gamma has a pole at {z}")
    if z.real >= 0.5:
        return _log_gamma_right(z)
    # shift into the right half-plane term by term so that every log stays principal
    n = math.ceil(0.5 - z.real)
    shift = math.fsum(cmath.log(z + k).real for k in range(n)) + 1j * math.fsum(
        cmath.phase(z + k) for k in range(n)
    )
    return _log_gamma_right(z + n) - shift


def _log_abs_gamma_mod(z: complex) -> complex:
    """``log Gamma(z)`` modulo 2 pi i; cheaper than :func:`log_gamma` off the right half-plane."""
    if z.real >= 0.5:
        return _log_gamma_right_mod(z)
    return LOG_PI - cmath.log(sinpi(z)) - _log_gamma_right_mod(1 - z)


def _real_gamma(x: float) -> float | None:
    # stdlib gamma for real arguments (about 1 ulp); None outside its range
    try:
        return math.gamma(x)
    except (OverflowError, ValueError):
        return None


def gamma(z: complex) -> complex:
    z = complex(z)
    if is_nonpositive_integer(z):
        raise PoleError(f"gamma has a pole at {z}")
    if z.imag == 0.0 and -170.0 < z.real < 171.0:
        g = _real_gamma(z.real)
        if g is not None and g != 0.0:
            return complex(g)
    if z.real >= 0.5:
        return cmath.exp(_log_gamma_right_mod(z))
    return math.pi / (sinpi(z) * cmath.exp(_log_gamma_right_mod(1 - z)))


def recip_gamma(z: complex) -> complex:
    """``1/Gamma(z)``; entire, exactly zero at 0, -1, -2, ..."""
    z = complex(z)
    if is_nonpositive_integer(z):
        return 0j
    if z.imag == 0.0 and -170.0 < z.real < 171.0:
        g = _real_gamma(z.real)
        if g is not None and g != 0.0 and math.isfinite(1.0 / g):
            return complex(1.0 / g)
    if z.real >= 0.5:
        return cmath.exp(-_log_gamma_right_mod(z))
    return sinpi(z) / math.pi * cmath.exp(_log_gamma_right_mod(1 - z))


def gamma_prod(a: ParamList, z: complex) -> complex:
    """``prod_i Gamma(z + a_i)``; 1 for an empty list."""
    out = 1 + 0j
    for ai in a:
        out *= gamma(z + ai)
    return out


def recip_gamma_prod(a: ParamList, z: complex) -> complex:
    out = 1 + 0j
    for ai in a:
        out *= recip_gamma(z + ai)
    return out


def poly_prod(a: ParamList, z: complex) -> complex:
    """``prod_i (z + a_i)``; 1 for an empty list."""
    out = 1 + 0j
    for ai in a:
        out *= z + ai
    return out


def _log_barnes_g_asym(z: complex) -> complex:
    # log G(z + 1) for large |z|
    w2 = 1.0 / (z * z)
    acc = 0j
    for c in reversed(_BARNES):
        acc = acc * w2 + c
    logz = cmath.log(z)
    return (
        0.5 * z * z * logz
        - 0.75 * z * z
        + 0.5 * z * LOG_2PI
        - logz / 12.0
        + ZETA_PRIME_M1
        + acc * w2
    )


def log_barnes_g(z: complex) -> complex:
    """``log G(z)``, determined modulo 2 pi i.

    The argument is pushed up with ``G(z) = G(z + 1) / Gamma(z)`` until
    ``Re z >= 20``, where the asymptotic expansion of ``log G`` converges
    to double precision.
    """
    z = complex(z)
    if is_nonpositive_integer(z):
        raise PoleError(f"log G is -infinity at the zero {z}")
    n = max(0, math.ceil(_BARNES_MIN - z.real))
    corr = 0j
    for k in range(n):
        corr += _log_abs_gamma_mod(z + k)
    return _log_barnes_g_asym(z + n - 1) - corr


def barnes_g(z: complex) -> complex:
    """Barnes G-function; exactly 0 at the zeros 0, -1, -2, ..."""
    z = complex(z)
    if is_nonpositive_integer(z):
        return 0j
    if z.imag == 0.0 and z.real == math.floor(z.real) and z.real <= 30:
        # G(n) = prod_{k=1}^{n-2} k!  (exact integers)
        n = int(z.real)
        return complex(math.prod(math.factorial(k) for k in range(1, n - 1)))
    return cmath.exp(log_barnes_g(z))


def barnes_g_prod(a: ParamList, z: complex) -> complex:
    """``G(a; z) = prod_i G(z + a_i)``."""
    out = 1 + 0j
    for ai in a:
        out *= barnes_g(z + ai)
    return out


def barnes_g_ratio_int(a: ParamList, base: complex, K: int) -> complex:
    """``G(a; base + K) / G(a; base)`` as the finite product ``prod_{i<K} Gamma(a; base + i)``."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    out = 1 + 0j
    for i in range(K):
        out *= gamma_prod(a, base + i)
    return out


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-14
    max_terms: int = 1_000_000
    consecutive_small: int = 3

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.max_terms < 1 or self.consecutive_small < 1:
            raise ValueError("max_terms and consecutive_small must be positive")


DEFAULT_CONTROL = SeriesControl()


class SeriesResult(NamedTuple):
    value: complex
    tail: float
    terms: int


class _Summer:
    """Exact (fsum-based) accumulation of complex terms."""

    __slots__ = ("re", "im")

    def __init__(self):
        self.re: list[float] = []
        self.im: list[float] = []

    def add(self, z: complex):
        self.re.append(z.real)
        self.im.append(z.imag)

    def total(self) -> complex:
        return complex(math.fsum(self.re), math.fsum(self.im))


def _truncation_order(num: ParamList) -> int | None:
    # smallest m with -m in num, i.e. the series stops after m + 1 terms
    orders = [int(-complex(a).real) for a in num if is_nonpositive_integer(a)]
    return min(orders) if orders else None


def pfq(num: ParamList, den: ParamList, x: complex, ctl: SeriesControl = DEFAULT_CONTROL) -> SeriesResult:
    """Generalized hypergeometric series ``pFq(num; den; x)``.

    Terms are generated by the ratio recurrence and summed exactly. The
    sum stops after ``ctl.consecutive_small`` successive terms below
    ``rel_tol * |partial sum|`` once the term ratio is below one, or as
    soon as a nonpositive-integer numerator parameter truncates the series
    (a terminating series is always summed to its last term).
    The returned ``tail`` bounds the omitted remainder by a geometric
    majorant.
    """
    num = [complex(a) for a in num]
    den = [complex(b) for b in den]
    x = complex(x)
    trunc = _truncation_order(num)
    for b in den:
        if is_nonpositive_integer(b):
            if trunc is None or trunc >= int(-b.real):
                raise PoleError(f"denominator parameter {b} is a nonpositive integer")
    p, q = len(num), len(den)
    if trunc is None and x != 0:
        if p > q + 1:
            raise NonConvergenceError(f"{p}F{q} series diverges for x != 0 unless it truncates")
        if p == q + 1 and abs(x) >= 1:
            raise NonConvergenceError(f"{p}F{q} series needs |x| < 1, got |x| = {abs(x):.6g}")
    limit_ratio = abs(x) if p == q + 1 else 0.0

    acc = _Summer()
    term = 1 + 0j
    acc.add(term)
    running = term
    small = 0
    ratio = math.inf
    k = 0
    while True:
        if trunc is not None and k >= trunc:
            return SeriesResult(acc.total(), 0.0, k + 1)
        if k + 1 >= ctl.max_terms:
            raise NonConvergenceError(f"pfq: no convergence after {ctl.max_terms} terms")
        fac = x / (k + 1)
        for a in num:
            fac *= a + k
        for b in den:
            fac /= b + k
        new = term * fac
        k += 1
        if new == 0:
            # x == 0 or an exactly vanishing factor: nothing further contributes
            return SeriesResult(acc.total(), 0.0, k)
        ratio = abs(fac)
        term = new
        acc.add(term)
        running += term
        if trunc is None and abs(term) <= ctl.rel_tol * abs(running) and ratio < 1:
            small += 1
            if small >= ctl.consecutive_small:
                break
        else:
            small = 0
    r = max(ratio, limit_ratio)
    tail = abs(term) * r / (1 - r) if r < 1 else math.inf
    return SeriesResult(acc.total(), tail, k + 1)
