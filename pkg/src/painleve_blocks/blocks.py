"""Conformal-block coefficients B_{lambda,mu}(a; sigma) and their product form."""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache

from .errors import DegenerateParameterError
from .partitions import Partition, particle_coords, vandermonde
from .specfun import (
    barnes_g_ratio_int,
    gamma,
    is_nonpositive_integer,
    log_gamma,
    poly_prod,
    recip_gamma,
    recip_gamma_prod,
    snap_nonpositive_integer,
)

SIGMA_GUARD = 1e-6
DENOM_GUARD = 1e-12
LOG_SPACE_WEIGHT = 20


def _dist_to_integers(z: complex) -> float:
    return abs(complex(z.real - round(z.real), z.imag))


@dataclass(frozen=True)
class BlockParams:
    """Parameter list ``a``, the shift ``sigma`` and the length cap ``K``.

    ``sigma`` must be generic: ``2 sigma`` at distance more than 1e-6 from
    the integers.
    """

    a: tuple[complex, ...] = ()
    sigma: complex = 0.25
    K: int = 1

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(x) for x in self.a))
        object.__setattr__(self, "sigma", complex(self.sigma))
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        object.__setattr__(self, "K", int(self.K))
        if _dist_to_integers(2 * self.sigma) <= SIGMA_GUARD:
            raise DegenerateParameterError(f"2*sigma = {2 * self.sigma} is (too close to) an integer")

    @property
    def p(self) -> int:
        return len(self.a)

    def with_sigma(self, sigma: complex) -> "BlockParams":
        return BlockParams(self.a, sigma, self.K)

    def with_K(self, K: int) -> "BlockParams":
        return BlockParams(self.a, self.sigma, K)


@dataclass(frozen=True)
class ParticleSystem:
    """Coordinates ``x_i = L_i - sigma`` (i <= K) and ``x_{K+i} = M_i + sigma``."""

    x: tuple[complex, ...]
    K: int
    sigma: complex

    def partitions(self) -> tuple[Partition, Partition]:
        K, s = self.K, self.sigma
        L = [round((xi + s).real) for xi in self.x[:K]]
        M = [round((xi - s).real) for xi in self.x[K:]]
        lam = Partition(tuple(L[i - 1] + i - K for i in range(1, K + 1)))
        mu = Partition(tuple(M[i - 1] + i - K for i in range(1, K + 1)))
        return lam, mu


def particle_system(lam: Partition, mu: Partition, K: int, sigma: complex) -> ParticleSystem:
    L = particle_coords(lam, K).L
    M = particle_coords(mu, K).L
    sigma = complex(sigma)
    return ParticleSystem(tuple(Li - sigma for Li in L) + tuple(Mi + sigma for Mi in M), K, sigma)


def _check_denominator(d: complex):
    if abs(d) <= DENOM_GUARD:
        raise DegenerateParameterError(f"vanishing denominator factor {d}")


def _box_factors(lam: Partition, mu: Partition, p: BlockParams):
    """Numerator and denominator factors of every box, lambda first."""
    a, s = p.a, p.sigma
    lt, mt = lam.transpose(), mu.transpose()
    for i, j in lam.boxes():
        h = lam[i] - i + lt[j] - j + 1
        c = lt[j] + mu[i] - i - j + 1 + 2 * s
        _check_denominator(c)
        yield poly_prod(a, i - j + s), h * c
    for i, j in mu.boxes():
        h = mu[i] - i + mt[j] - j + 1
        c = lam[i] + mt[j] - i - j + 1 - 2 * s
        _check_denominator(c)
        yield poly_prod(a, i - j - s), h * c


def coeff_direct(lam: Partition, mu: Partition, p: BlockParams) -> complex:
    """B_{lambda,mu}(a; sigma) evaluated box by box from its defining double product."""
    if lam.weight + mu.weight > LOG_SPACE_WEIGHT:
        acc = 0j
        for num, den in _box_factors(lam, mu, p):
            if num == 0:
                return 0j
            acc += cmath.log(num) - 2 * cmath.log(den)
        return cmath.exp(acc)
    out = 1 + 0j
    for num, den in _box_factors(lam, mu, p):
        out *= num / (den * den)
    return out


def dress_factor(lam: Partition, mu: Partition, p: BlockParams) -> complex:
    a, s = p.a, p.sigma
    out = 1 + 0j
    for i, j in lam.boxes():
        out *= poly_prod(a, i - j + s)
    for i, j in mu.boxes():
        out *= poly_prod(a, i - j - s)
    return out


def dress_factor_gamma(lam: Partition, p: BlockParams, mirrored: bool = False) -> complex:
    """The lambda-half of the dressing as a Barnes-G ratio over gamma products.

    ``mirrored=True`` gives the mu-half (sigma replaced by -sigma).
    """
    s = -p.sigma if mirrored else p.sigma
    l = particle_coords(lam, p.K).l
    out = barnes_g_ratio_int(p.a, 1 + s, p.K)
    for li in l:
        out *= recip_gamma_prod(p.a, -li + s)
    return out


def interaction_lhs(lam: Partition, mu: Partition, x: complex) -> complex:
    lt = lam.transpose()
    out = 1 + 0j
    for i, j in lam.boxes():
        out *= lt[j] + mu[i] - i - j + 1 + x
    return out


def interaction_rhs(lam: Partition, mu: Partition, K: int, x: complex) -> complex:
    l = particle_coords(lam, K).l
    m = particle_coords(mu, K).l
    out = 1 + 0j
    for i in range(K):
        out *= gamma(m[i] + K + 1 + x) * recip_gamma(m[i] - l[i] + x)
        for j in range(i, K):
            out /= m[i] - l[j] + x
    return out


def full_interaction_lhs(lam: Partition, mu: Partition, x: complex) -> complex:
    return 1 / (interaction_lhs(lam, mu, x) ** 2 * interaction_lhs(mu, lam, -x) ** 2)


def full_interaction_rhs(lam: Partition, mu: Partition, K: int, x: complex) -> complex:
    l = particle_coords(lam, K).l
    m = particle_coords(mu, K).l
    reflect = gamma(x) * gamma(1 - x)
    out = 1 + 0j
    for i in range(K):
        out *= (reflect * recip_gamma(m[i] + K + 1 + x) * recip_gamma(l[i] + K + 1 - x)) ** 2
        for j in range(K):
            out *= (m[i] - l[j] + x) ** 2
    return out


def v_weight(z: complex, sigma: complex) -> complex:
    """``1 / (Gamma(z+1+sigma)^2 Gamma(z+1-sigma)^2)``."""
    return (recip_gamma(z + 1 + sigma) * recip_gamma(z + 1 - sigma)) ** 2


def weight_w(z: complex, p: BlockParams) -> complex:
    """Matrix-model weight ``w(z) = v(z) / Gamma(a; K - z)``; entire in z.

    Arguments of ``1/Gamma(a; K - z)`` within rounding distance of a
    nonpositive integer are treated as exact zeros, so that parameter
    choices which truncate the measure do so in floating point too.
    """
    z = complex(z)
    out = v_weight(z, p.sigma)
    for a in p.a:
        out *= recip_gamma(snap_nonpositive_integer(p.K - z + a))
    return out


_weight_cached = lru_cache(maxsize=1 << 14)(weight_w)


def _reflection_power(sigma: complex, K: int) -> complex:
    # Gamma(2 sigma)^{2K} Gamma(1 - 2 sigma)^{2K} = (pi / sin(2 pi sigma))^{2K}
    return (gamma(2 * sigma) * gamma(1 - 2 * sigma)) ** (2 * K)


def bare_product_form(lam: Partition, mu: Partition, p: BlockParams) -> complex:
    ps = particle_system(lam, mu, p.K, p.sigma)
    out = _reflection_power(p.sigma, p.K) * vandermonde(ps.x) ** 2
    for xi in ps.x:
        out *= v_weight(xi, p.sigma)
    return out


def q_factor(p: BlockParams) -> complex:
    """Normalisation Q(a, K, sigma), with its Barnes-G ratios reduced to finite gamma products."""
    s = p.sigma
    return (
        _reflection_power(s, p.K)
        * barnes_g_ratio_int(p.a, 1 + s, p.K)
        * barnes_g_ratio_int(p.a, 1 - s, p.K)
    )


def log_q_factor(p: BlockParams) -> complex:
    """``log Q`` modulo 2 pi i; stays finite where Q itself would overflow."""
    s, K = p.sigma, p.K
    out = 2 * K * (log_gamma(2 * s) + log_gamma(1 - 2 * s))
    for i in range(1, K + 1):
        for ai in p.a:
            for z in (i + s + ai, i - s + ai):
                if is_nonpositive_integer(z):
                    raise DegenerateParameterError(f"Q(a, K, sigma) has a pole: Gamma({z})")
                out += log_gamma(z)
    return out


def coeff_product_form(lam: Partition, mu: Partition, p: BlockParams) -> complex:
    """B_{lambda,mu}(a; sigma) as ``Q * Delta(x)^2 * prod w(x_i)`` over the 2K particles."""
    ps = particle_system(lam, mu, p.K, p.sigma)
    out = q_factor(p) * vandermonde(ps.x) ** 2
    for xi in ps.x:
        out *= _weight_cached(xi, p)
    return out

