"""Discrete matrix model on the two shifted half-lattices N0 + sigma and N0 - sigma.

The bookkeeping variable ``q`` is never given a numerical value in the
final answers: moments are stored as their two lattice components (the
coefficients of ``q`` and ``1/q``), and the balanced part of the Hankel
determinant is read off as the constant Fourier coefficient over roots of
unity.  Since the determinant is a Laurent polynomial of degree at most
``2K`` in ``q`` and ``1/q``, that average is exact.
"""
from __future__ import annotations

import cmath
import math
import threading
import warnings
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .blocks import BlockParams, coeff_direct, log_q_factor, q_factor, weight_w
from .errors import DivergenceWarning, IllConditionedWarning, NonConvergenceError
from .partitions import shell_pairs, vandermonde
from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    is_nonpositive_integer,
    near_integer,
    pfq,
    recip_gamma,
    snap_nonpositive_integer,
)

STOP_RATIO = 0.9
CONDITION_SPREAD = 1e12
# digits we insist on keeping after cancellation in the Hankel route
TARGET_DIGITS = 11
DOUBLE_DIGITS = 15.6


class LaurentPoly:
    """A Laurent polynomial in ``q`` with complex (or mpmath) coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[int, complex] | None = None):
        self.coeffs = {int(e): c for e, c in (coeffs or {}).items() if c != 0}

    @classmethod
    def constant(cls, c) -> "LaurentPoly":
        return cls({0: c})

    def coeff(self, e: int):
        return self.coeffs.get(e, 0)

    def __add__(self, other):
        other = _as_laurent(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_as_laurent(other))

    def __rsub__(self, other):
        return _as_laurent(other) - self

    def __mul__(self, other):
        other = _as_laurent(other)
        out: dict[int, complex] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __call__(self, q):
        return sum((c * q**e for e, c in self.coeffs.items()), 0)

    @property
    def degree_range(self) -> tuple[int, int]:
        if not self.coeffs:
            return (0, 0)
        return min(self.coeffs), max(self.coeffs)

    def __repr__(self):
        terms = " + ".join(f"({c})q^{e}" for e, c in sorted(self.coeffs.items()))
        return f"LaurentPoly({terms or '0'})"


def _as_laurent(x) -> LaurentPoly:
    return x if isinstance(x, LaurentPoly) else LaurentPoly.constant(x)


def laurent_det(matrix: Sequence[Sequence[LaurentPoly]]) -> LaurentPoly:
    """Symbolic determinant by the Leibniz formula; only meant for tiny matrices."""
    n = len(matrix)
    total = LaurentPoly()
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = LaurentPoly.constant(sign)
        for i, j in enumerate(perm):
            term = term * matrix[i][j]
        total = total + term
    return total


@dataclass(frozen=True)
class MeasureSpec:
    """The measure ``q sum_k w(k+sigma) delta_{k+sigma} + q^{-1} sum_k w(k-sigma) delta_{k-sigma}``."""

    params: BlockParams

    def point(self, k: int, side: int) -> complex:
        """Lattice point ``k + side*sigma``; ``side = +1`` carries ``q``, ``-1`` carries ``1/q``."""
        return k + side * self.params.sigma

    def mass(self, k: int, side: int) -> complex:
        return weight_w(self.point(k, side), self.params)

    def cutoff(self, side: int) -> int | None:
        """First ``k`` from which every mass on this lattice vanishes, or None if none does.

        The weight carries ``1/Gamma(c_i - k)`` with ``c_i = K - side*sigma + a_i``;
        when some ``c_i`` is an integer ``n`` (up to rounding) the masses vanish for
        all ``k >= max(n, 0)``.
        """
        base = self.params.K - side * self.params.sigma
        best = None
        for a in self.params.a:
            n = near_integer(base + a)
            if n is not None:
                k = max(n, 0)
                best = k if best is None else min(best, k)
        return best

    def truncates(self, side: int) -> bool:
        """True if the weight on this lattice vanishes identically beyond some point."""
        return self.cutoff(side) is not None

    def check_regime(self, u: complex, side: int):
        p = self.params.p
        if self.truncates(side):
            return
        if p > 4:
            raise NonConvergenceError(f"moments of the p={p} measure diverge unless the parameters truncate them")
        if p == 4 and abs(cmath.exp(u)) >= 1:
            raise NonConvergenceError("p=4 moments need |e^u| < 1")


@dataclass
class MgfValue:
    """``psi(u) = q * plus + q^{-1} * minus`` with absolute tail bounds per component."""

    plus: complex
    minus: complex
    tail_plus: float = 0.0
    tail_minus: float = 0.0

    def laurent(self) -> LaurentPoly:
        return LaurentPoly({1: self.plus, -1: self.minus})

    def at(self, q: complex) -> complex:
        return q * self.plus + self.minus / q


def mgf(u: complex, p: BlockParams, ctl: SeriesControl = DEFAULT_CONTROL) -> MgfValue:
    """Moment generating function through the two pF3 series in ``(-1)^p e^u``."""
    u = complex(u)
    measure = MeasureSpec(p)
    x = (-1) ** p.p * cmath.exp(u)
    out = {}
    for side in (1, -1):
        measure.check_regime(u, side)
        s = side * p.sigma
        pre = cmath.exp(u * s) * recip_gamma(1 + 2 * s) ** 2
        for a in p.a:
            pre *= recip_gamma(snap_nonpositive_integer(p.K - s + a))
        if pre == 0:
            out[side] = (0j, 0.0)
            continue
        num = [snap_nonpositive_integer(-a - p.K + 1 + s) for a in p.a]
        res = pfq(num, [1 + 2 * s, 1 + 2 * s, 1], x, ctl)
        out[side] = (pre * res.value, abs(pre) * res.tail)
    return MgfValue(out[1][0], out[-1][0], out[1][1], out[-1][1])


class _Double:
    dps = None

    @staticmethod
    def weight(z: complex, p: BlockParams):
        return weight_w(z, p)

    @staticmethod
    def exp(z):
        return cmath.exp(z)

    @staticmethod
    def eps() -> float:
        return 2.0**-52


_local = threading.local()


def _mp_context(dps: int) -> mpmath.ctx_mp.MPContext:
    """A private mpmath context per (thread, dps); the global ``mpmath.mp`` is never touched."""
    cache = getattr(_local, "contexts", None)
    if cache is None:
        cache = _local.contexts = {}
    ctx = cache.get(dps)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.dps = dps
        cache[dps] = ctx
    return ctx


class _Mp:
    def __init__(self, dps: int):
        self.dps = int(dps)
        self.ctx = _mp_context(self.dps)

    def weight(self, z, p: BlockParams):
        rg = self.ctx.rgamma
        out = rg(z + 1 + p.sigma) ** 2 * rg(z + 1 - p.sigma) ** 2
        for a in p.a:
            if is_nonpositive_integer(snap_nonpositive_integer(complex(p.K - z + a))):
                return self.ctx.mpc(0)
            out *= rg(p.K - z + a)
        return out

    def exp(self, z):
        return self.ctx.exp(z)

    def eps(self):
        return self.ctx.mpf(10) ** (-self.dps)


def _backend(precision) -> _Double | _Mp:
    if precision is None or precision == "double":
        return _Double()
    return _Mp(int(precision))


@dataclass
class MomentTable:
    """Moments ``M_k = q * plus[k] + q^{-1} * minus[k]`` of ``e^{uz} d nu``."""

    u: complex
    plus: list
    minus: list
    tails_plus: list[float]
    tails_minus: list[float]
    dps: int | None = None
    terms: dict[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.plus)

    def laurent(self, k: int) -> LaurentPoly:
        return LaurentPoly({1: self.plus[k], -1: self.minus[k]})


def _lattice_moments(u, p: BlockParams, side: int, count: int, ctl: SeriesControl, be):
    """``sum_k w(x_k) e^{u x_k} x_k^j`` for j < count over one lattice, with tail bounds."""
    if be.dps is None:
        s = p.sigma
        point = lambda k: k + side * s  # noqa: E731
        zero = 0j
        rel_tol = ctl.rel_tol
    else:
        s = be.ctx.mpc(p.sigma)
        u = be.ctx.mpc(u)
        point = lambda k: k + side * s  # noqa: E731
        zero = be.ctx.mpc(0)
        rel_tol = be.eps()
    sums = [zero] * count
    small = 0
    prev_mag = None
    ratio = math.inf
    last = [zero] * count
    k = 0
    while True:
        if k >= ctl.max_terms:
            raise NonConvergenceError(f"lattice sum did not converge within {ctl.max_terms} terms")
        x = point(k)
        c = be.weight(x, p) * be.exp(u * x)
        if c == 0:
            # reciprocal-gamma zero of Gamma(a; K - x): every later mass vanishes too
            return sums, [0.0] * count, k
        xp = 1
        for j in range(count):
            last[j] = c * xp
            sums[j] += last[j]
            xp *= x
        mag = abs(c)
        if prev_mag is not None and prev_mag > 0:
            ratio = float(mag / prev_mag)
        prev_mag = mag
        k += 1
        negligible = all(abs(last[j]) <= rel_tol * abs(sums[j]) for j in range(count))
        if negligible and ratio < STOP_RATIO:
            small += 1
            if small >= ctl.consecutive_small:
                break
        else:
            small = 0
    # remaining terms are dominated by a geometric series in the observed ratio;
    # the factor x^j grows by at most ((k+1+|s|)/(k+|s|))^j per step
    tails = []
    for j in range(count):
        growth = ((k + 1 + abs(complex(s))) / max(k - abs(complex(s)), 1e-300)) ** j
        r = ratio * growth
        tails.append(float(abs(last[j])) * r / (1 - r) if r < 1 else math.inf)
    return sums, tails, k


def moments(
    u: complex,
    p: BlockParams,
    count: int | None = None,
    ctl: SeriesControl = DEFAULT_CONTROL,
    precision=None,
) -> MomentTable:
    """Moments ``psi^{(k)}(u)``, k < count, by direct weighted lattice summation.

    ``count`` defaults to ``4K - 1`` (enough for the 2K x 2K Hankel matrix).
    ``precision`` is ``None`` for double precision or a number of decimal
    digits for the mpmath backend.
    """
    if count is None:
        count = 4 * p.K - 1
    if count < 1:
        raise ValueError("count must be positive")
    u = complex(u)
    measure = MeasureSpec(p)
    be = _backend(precision)
    comps = {}
    for side in (1, -1):
        measure.check_regime(u, side)
        comps[side] = _lattice_moments(u, p, side, count, ctl, be)
    return MomentTable(
        u=u,
        plus=comps[1][0],
        minus=comps[-1][0],
        tails_plus=comps[1][1],
        tails_minus=comps[-1][1],
        dps=be.dps,
        terms={1: comps[1][2], -1: comps[-1][2]},
    )


@dataclass
class HankelQ0:
    value: complex
    sample_dets: list
    samples: int
    lost_digits: float
    dps: int | None
    notes: list[str] = field(default_factory=list)


def _sample_points(M: int, dps):
    if dps is None:
        return [cmath.exp(2j * math.pi * m / M) for m in range(M)]
    ctx = _mp_context(dps)
    return [ctx.expjpi(ctx.mpf(2 * m) / M) for m in range(M)]


def _hankel_samples(mt: MomentTable, K: int, M: int) -> tuple[list, list[float]]:
    n = 2 * K
    dets = []
    row_logs = []
    if mt.dps is None:
        A = np.asarray(mt.plus[: 2 * n - 1], dtype=complex)
        B = np.asarray(mt.minus[: 2 * n - 1], dtype=complex)
        idx = np.add.outer(np.arange(n), np.arange(n))
        q = np.asarray(_sample_points(M, None))[:, None]
        mom = q * A[None, :] + B[None, :] / q
        H = mom[:, idx]
        dets = list(np.linalg.det(H))
        with np.errstate(divide="ignore"):
            row_logs = list(np.sum(np.log10(np.linalg.norm(H, axis=2)), axis=1))
        return dets, row_logs
    ctx = _mp_context(mt.dps)
    for q in _sample_points(M, mt.dps):
        mom = [q * mt.plus[k] + mt.minus[k] / q for k in range(2 * n - 1)]
        H = ctx.matrix(n, n)
        for i in range(n):
            for j in range(n):
                H[i, j] = mom[i + j]
        dets.append(ctx.det(H))
        row_logs.append(
            float(sum(0.5 * ctx.log10(ctx.fsum(abs(mom[i + j]) ** 2 for j in range(n))) for i in range(n)))
        )
    return dets, row_logs


def hankel_laurent_coeffs(mt: MomentTable, K: int, samples: int | None = None) -> dict[int, complex]:
    """All DFT coefficients ``e in (-M/2, M/2]`` of ``q -> det(M_{i+j})``."""
    M = samples or 4 * K + 1
    dets, _ = _hankel_samples(mt, K, M)
    dets = np.asarray([complex(d) for d in dets])
    coeffs = np.fft.fft(dets) / M
    out = {}
    for e in range(-(M // 2), M - M // 2):
        # coefficient of q^e sits at DFT index -e mod M
        out[e] = complex(coeffs[(-e) % M])
    return out


def hankel_det_q0(mt: MomentTable, K: int, samples: int | None = None) -> HankelQ0:
    """Coefficient of ``q^0`` in ``det(M_{i+j-2})_{i,j=1..2K}``.

    The determinant is sampled at ``samples`` (default ``4K + 1``) roots of
    unity and averaged.  Warns with :class:`IllConditionedWarning` when the
    sampled determinants span more than twelve orders of magnitude.
    """
    h = _hankel_q0(mt, K, samples)
    for note in h.notes:
        warnings.warn(note, IllConditionedWarning, stacklevel=2)
    return h


def _hankel_q0(mt: MomentTable, K: int, samples: int | None) -> HankelQ0:
    n_mom = 4 * K - 1
    if len(mt) < n_mom:
        raise ValueError(f"need {n_mom} moments for K={K}, table has {len(mt)}")
    M = samples or 4 * K + 1
    if M < 2 * K + 1:
        raise ValueError("too few samples to isolate the q^0 coefficient")
    dets, row_logs = _hankel_samples(mt, K, M)
    log10 = _mp_context(mt.dps).log10 if mt.dps else math.log10
    notes = []
    q0 = sum(dets, 0 * dets[0]) / M
    mags = [abs(d) for d in dets]
    top, low = max(mags), min(mags)
    if low == 0 or top / low > CONDITION_SPREAD:
        notes.append(f"Hankel determinants span {float(top):.3g} .. {float(low):.3g} over the q-samples")
    # digits lost: Hadamard ratio of each sample plus cancellation in the average
    if q0 == 0:
        lost = math.inf
    else:
        had = max(r - float(log10(m)) if m else math.inf for r, m in zip(row_logs, mags))
        lost = max(had, 0.0) + max(float(log10(top / abs(q0))), 0.0)
    return HankelQ0(value=q0, sample_dets=dets, samples=M, lost_digits=float(lost), dps=mt.dps, notes=notes)


@dataclass
class RouteResult:
    """Value of B_K(a; sigma; t) from one route, with its error bookkeeping."""

    value: complex
    route: str
    tail_estimate: float = 0.0
    warnings: list[str] = field(default_factory=list)
    shells: list[complex] = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def partial_sum_hankel(
    u: complex,
    p: BlockParams,
    ctl: SeriesControl = DEFAULT_CONTROL,
    precision="auto",
    samples: int | None = None,
) -> RouteResult:
    """B_K(a; sigma; e^u) from the q^0 part of the 2K x 2K Hankel determinant of moments.

    ``precision="auto"`` starts in double precision and switches to mpmath,
    raising the working digits until the estimated cancellation leaves at
    least ``TARGET_DIGITS`` significant digits.
    """
    u = complex(u)
    K = p.K
    notes: list[str] = []
    if precision == "auto":
        dps = None
        for _ in range(6):
            mt = moments(u, p, 4 * K - 1, ctl, precision=dps)
            h = _hankel_q0(mt, K, samples)
            avail = DOUBLE_DIGITS if dps is None else dps
            if h.lost_digits + TARGET_DIGITS <= avail:
                break
            need = h.lost_digits if math.isfinite(h.lost_digits) else 2 * (avail or 16)
            dps = int(math.ceil(need + TARGET_DIGITS + 8))
        else:
            notes.append("precision escalation did not reach the target digit count")
        notes.extend(h.notes)
    else:
        mt = moments(u, p, 4 * K - 1, ctl, precision=None if precision in (None, "double") else precision)
        h = _hankel_q0(mt, K, samples)
        notes.extend(h.notes)
        avail = DOUBLE_DIGITS if h.dps is None else h.dps
        if h.lost_digits + TARGET_DIGITS > avail:
            notes.append(
                f"about {h.lost_digits:.1f} of {avail:.0f} digits lost to cancellation; "
                "use precision='auto' or more digits"
            )
    for w in notes:
        warnings.warn(w, IllConditionedWarning, stacklevel=2)
    if h.value == 0:
        value = 0j
    else:
        log_det = complex(_mp_context(h.dps).log(h.value)) if h.dps else cmath.log(h.value)
        value = cmath.exp(log_q_factor(p) - u * K * (K - 1) + log_det)
    return RouteResult(
        value=value,
        route="hankel",
        warnings=notes,
        extra={"dps": h.dps, "lost_digits": float(h.lost_digits), "samples": h.samples},
    )


def _shell_tail(shells: list[complex], notes: list[str]) -> float:
    mags = [abs(s) for s in shells]
    if len(mags) < 2 or mags[-1] == 0:
        return 0.0
    ratios = [mags[i] / mags[i - 1] for i in range(max(1, len(mags) - 2), len(mags)) if mags[i - 1] > 0]
    if not ratios:
        return 0.0
    r = max(ratios)
    if r >= 1:
        msg = f"weight-shell sums are not decaying (ratio {r:.3g})"
        notes.append(msg)
        warnings.warn(msg, DivergenceWarning, stacklevel=3)
        return math.inf
    return mags[-1] * r / (1 - r)


def _fsum_c(values) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def partial_sum_direct(t: complex, p: BlockParams, max_weight: int) -> RouteResult:
    """B_K truncated at |lambda| + |mu| <= max_weight, summed shell by shell over partition pairs."""
    t = complex(t)
    if max_weight < 0:
        raise ValueError("max_weight must be nonnegative")
    shells = []
    for n in range(max_weight + 1):
        if t == 0 and n > 0:
            shells.append(0j)
            continue
        coeff = _fsum_c(coeff_direct(lam, mu, p) for lam, mu in shell_pairs(p.K, n))
        shells.append(coeff * t**n)
    notes: list[str] = []
    tail = _shell_tail(shells, notes)
    return RouteResult(_fsum_c(shells), "direct", tail, notes, shells)


def decreasing_tuples(K: int, max_sum: int, floor: int = 0) -> Iterator[tuple[int, ...]]:
    """Strictly decreasing K-tuples of integers >= floor with sum <= max_sum."""
    if K == 0:
        yield ()
        return
    # the smallest possible tail below a first entry is floor + (K-2) + ... + floor
    tail_min = (K - 1) * floor + (K - 1) * (K - 2) // 2
    first = floor + K - 1
    while first + tail_min <= max_sum:
        for rest in decreasing_tuples(K - 1, max_sum - first, floor):
            if rest and rest[0] >= first:
                break
            yield (first,) + rest
        first += 1


def partition_function_balanced(t: complex, p: BlockParams, max_weight: int) -> RouteResult:
    """B_K as the balanced configuration sum of the discrete log-gas.

    Sums ``Delta(x)^2 prod w(x_i) t^{sum x_i}`` over K strictly decreasing
    points ``L_i - sigma`` and K points ``M_i + sigma``, restricted to
    ``sum x_i - K(K-1) <= max_weight``, and multiplies by ``Q / t^{K(K-1)}``.
    """
    t = complex(t)
    K, s = p.K, p.sigma
    base = K * (K - 1) // 2
    top = base + max_weight
    w_minus = [weight_w(L - s, p) for L in range(top + 1)]
    w_plus = [weight_w(M + s, p) for M in range(top + 1)]
    by_sum: dict[int, list[tuple[int, ...]]] = {}
    for tup in decreasing_tuples(K, top):
        by_sum.setdefault(sum(tup), []).append(tup)
    shell_coeffs: list[list[complex]] = [[] for _ in range(max_weight + 1)]
    for sl, Ls in by_sum.items():
        for sm, Ms in by_sum.items():
            n = sl + sm - 2 * base
            if n > max_weight:
                continue
            for L in Ls:
                xl = [Li - s for Li in L]
                wl = math.prod(w_minus[Li] for Li in L)
                if wl == 0:
                    continue
                for M in Ms:
                    x = xl + [Mi + s for Mi in M]
                    shell_coeffs[n].append(vandermonde(x) ** 2 * wl * math.prod(w_plus[Mi] for Mi in M))
    Q = q_factor(p)
    shells = []
    for n, cs in enumerate(shell_coeffs):
        shells.append(Q * _fsum_c(cs) * t**n if (n == 0 or t != 0) else 0j)
    notes: list[str] = []
    tail = _shell_tail(shells, notes)
    value = _fsum_c(shells)
    raw = value / Q * t ** (K * (K - 1)) if Q != 0 else 0j
    return RouteResult(value, "balanced", tail, notes, shells, extra={"raw_sum": raw, "Q": Q})
