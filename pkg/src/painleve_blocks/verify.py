"""Randomised sweep over the combinatorial identities behind the product form."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .blocks import (
    BlockParams,
    bare_product_form,
    coeff_direct,
    coeff_product_form,
    dress_factor,
    dress_factor_gamma,
    full_interaction_lhs,
    full_interaction_rhs,
    interaction_lhs,
    interaction_rhs,
)
from .partitions import partitions_up_to, hook_product_identity_check

IDENTITIES = (
    "dressing",
    "product_form",
    "k_stability",
    "interaction_half",
    "full_interaction",
    "dressing_gamma",
    "bare_product_form",
    "hook_product",
    "sigma_symmetry",
)


def rel_err(a: complex, b: complex) -> float:
    if a == b:
        return 0.0
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale


def random_generic(rng: random.Random, margin: float = 0.05, imag: float = 0.3) -> complex:
    """A complex number at distance > margin from the half-integers (so 2z is generic)."""
    while True:
        z = complex(rng.uniform(-1, 1), rng.uniform(-imag, imag))
        two = 2 * z
        if abs(complex(two.real - round(two.real), two.imag)) > margin:
            return z


def random_params(rng: random.Random, K: int, max_p: int = 4) -> BlockParams:
    p = rng.randint(0, max_p)
    a = []
    for _ in range(p):
        while True:
            c = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            if abs(c) <= 1:
                a.append(c)
                break
    return BlockParams(tuple(a), random_generic(rng), K)


@dataclass
class IdentityReport:
    name: str
    tolerance: float
    max_rel_error: float = 0.0
    checks: int = 0
    worst: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance

    def record(self, err: float, context: dict):
        self.checks += 1
        if err > self.max_rel_error or not self.worst:
            self.max_rel_error = max(err, self.max_rel_error)
            self.worst = context


def _checks(lam, mu, p: BlockParams, x: complex):
    """(identity name, thunk returning the relative error) for one pair."""
    bare = BlockParams((), p.sigma, p.K)
    K = p.K

    def hook_exact():
        lhs, rhs = hook_product_identity_check(lam, K)
        return 0.0 if lhs == rhs else 1.0

    return (
        ("dressing", lambda: rel_err(coeff_direct(lam, mu, p), coeff_direct(lam, mu, bare) * dress_factor(lam, mu, p))),
        ("product_form", lambda: rel_err(coeff_product_form(lam, mu, p), coeff_direct(lam, mu, p))),
        ("k_stability", lambda: rel_err(coeff_product_form(lam, mu, p.with_K(K + 1)), coeff_product_form(lam, mu, p))),
        ("interaction_half", lambda: rel_err(interaction_rhs(lam, mu, K, x), interaction_lhs(lam, mu, x))),
        ("full_interaction", lambda: rel_err(full_interaction_rhs(lam, mu, K, x), full_interaction_lhs(lam, mu, x))),
        (
            "dressing_gamma",
            lambda: rel_err(
                dress_factor_gamma(lam, p) * dress_factor_gamma(mu, p, mirrored=True), dress_factor(lam, mu, p)
            ),
        ),
        ("bare_product_form", lambda: rel_err(bare_product_form(lam, mu, p), coeff_direct(lam, mu, bare))),
        ("hook_product", hook_exact),
        ("sigma_symmetry", lambda: rel_err(coeff_direct(mu, lam, p.with_sigma(-p.sigma)), coeff_direct(lam, mu, p))),
    )


def check_pair(lam, mu, p: BlockParams, x: complex, reports: dict[str, IdentityReport]):
    """Run the identities named in ``reports`` on one (lambda, mu) pair."""
    ctx = {"lambda": str(lam), "mu": str(mu), "sigma": repr(p.sigma), "a": [repr(c) for c in p.a], "K": p.K}
    for name, check in _checks(lam, mu, p, x):
        if name in reports:
            reports[name].record(check(), ctx)


def run_identity_suite(
    seed: int = 0,
    max_weight: int = 6,
    K: int = 3,
    trials: int = 10,
    tolerance: float = 1e-9,
    identities=IDENTITIES,
) -> dict[str, IdentityReport]:
    """Check all identities for random parameters on every pair with |lambda|, |mu| <= max_weight.

    Each trial draws a length cap in 1..K, a parameter list with p <= 4 and
    |a_i| <= 1, a generic sigma and an independent generic ``x`` for the
    interaction identities.  The sweep is a pure function of ``seed``.
    """
    rng = random.Random(seed)
    unknown = set(identities) - set(IDENTITIES)
    if unknown:
        raise ValueError(f"unknown identities: {sorted(unknown)}")
    reports = {name: IdentityReport(name, tolerance) for name in identities}
    for _ in range(trials):
        k = rng.randint(1, K)
        p = random_params(rng, k)
        x = 2 * random_generic(rng)
        parts = partitions_up_to(k, max_weight)
        for lam in parts:
            for mu in parts:
                check_pair(lam, mu, p, x, reports)
    return reports
