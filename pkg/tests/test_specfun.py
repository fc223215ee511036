from __future__ import annotations

import cmath
import math
import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from painleve_blocks.errors import NonConvergenceError, PoleError
from painleve_blocks.specfun import (
    SeriesControl,
    barnes_g,
    barnes_g_prod,
    barnes_g_ratio_int,
    gamma,
    gamma_prod,
    log_barnes_g,
    log_gamma,
    pfq,
    poly_prod,
    recip_gamma,
    recip_gamma_prod,
    sinpi,
)

mpmath.mp.dps = 40


def rel(a, b):
    return abs(a - b) / abs(b)


def mod_2pi_i(d: complex) -> complex:
    """Reduce the imaginary part of a log difference to (-pi, pi]."""
    return complex(d.real, math.remainder(d.imag, 2 * math.pi))


def random_disc(rng, R, avoid_poles=0.1):
    while True:
        z = cmath.rect(R * math.sqrt(rng.random()), rng.uniform(-math.pi, math.pi))
        if z.real < avoid_poles / 2 and abs(z - round(z.real)) < avoid_poles:
            continue
        return z


finite = st.floats(-6, 6, allow_nan=False)
complexes = st.builds(complex, finite, finite)


class TestLogGamma:
    def test_examples(self):
        assert log_gamma(1) == 0
        assert abs(log_gamma(5) - math.log(24)) < 1e-14
        assert abs(log_gamma(0.5) - 0.5 * math.log(math.pi)) < 1e-14

    @pytest.mark.parametrize("R", [10, 60, 1000])
    def test_against_mpmath(self, R):
        # error relative to max(1, |log Gamma|): absolute near the zeros of log Gamma
        rng = random.Random(R)
        for _ in range(400):
            z = random_disc(rng, R)
            ref = complex(mpmath.loggamma(z))
            assert abs(log_gamma(z) - ref) <= 1e-13 * max(1.0, abs(ref)), z

    def test_principal_branch_across_negative_axis(self):
        for x in (-0.5, -3.3, -10.7):
            for eps in (1e-9, -1e-9):
                z = complex(x, eps)
                assert abs(log_gamma(z) - complex(mpmath.loggamma(z))) < 1e-12

    @pytest.mark.parametrize("z", [0, -1, -7])
    def test_poles(self, z):
        with pytest.raises(PoleError):
            log_gamma(z)


class TestGamma:
    def test_examples(self):
        assert recip_gamma(0) == 0
        assert recip_gamma(-2) == 0
        assert abs(recip_gamma(3) - 0.5) < 1e-14
        assert gamma_prod([], 17.3) == 1
        assert abs(gamma_prod([1, 2], 1) - 2) < 1e-14
        assert abs(gamma_prod([0.5], 0) - math.sqrt(math.pi)) < 1e-14
        with pytest.raises(PoleError):
            gamma(-3)

    def test_against_mpmath(self):
        rng = random.Random(5)
        for _ in range(500):
            z = random_disc(rng, 60)
            ref = complex(mpmath.gamma(z))
            if not 1e-300 < abs(ref) < 1e300:
                continue
            assert rel(gamma(z), ref) < 1e-13, z
            assert abs(recip_gamma(z) - complex(mpmath.rgamma(z))) <= 1e-13 * abs(complex(mpmath.rgamma(z))), z

    def test_recip_times_gamma(self):
        rng = random.Random(11)
        for _ in range(10_000):
            z = random_disc(rng, 20)
            assert abs(recip_gamma(z) * gamma(z) - 1) < 1e-12, z

    @pytest.mark.parametrize("n", range(21))
    def test_reflection_shift_identity(self, n):
        rng = random.Random(n)
        for _ in range(20):
            x = complex(rng.uniform(0.05, 0.95), rng.uniform(-1, 1))
            lhs = gamma(n + x) * gamma(-n - x)
            rhs = (-1) ** (n + 1) / (n + x) * gamma(x) * gamma(1 - x)
            assert rel(lhs, rhs) < 1e-10

    @given(complexes)
    def test_recurrence(self, z):
        if abs(z - round(z.real)) < 0.05 and z.real < 0.5:
            return
        assert rel(gamma(z + 1), z * gamma(z)) < 1e-12

    @given(st.lists(complexes, min_size=1, max_size=4), complexes, st.randoms(use_true_random=False))
    def test_product_permutation_invariance(self, a, z, rnd):
        shuffled = list(a)
        rnd.shuffle(shuffled)
        p1, p2 = recip_gamma_prod(a, z), recip_gamma_prod(shuffled, z)
        assert abs(p1 - p2) <= 1e-13 * abs(p1)
        assert abs(poly_prod(a, z) - poly_prod(shuffled, z)) <= 1e-13 * max(abs(poly_prod(a, z)), 1e-300)
        if all(abs(ai + z - round((ai + z).real)) > 0.05 for ai in a):
            g1, g2 = gamma_prod(a, z), gamma_prod(shuffled, z)
            assert abs(g1 - g2) <= 1e-13 * abs(g1)

    def test_sinpi_exact_zeros(self):
        for n in range(-30, 30):
            assert sinpi(n) == 0
        assert abs(sinpi(0.5) - 1) < 1e-16


class TestBarnesG:
    def test_integer_values(self):
        assert barnes_g(1) == 1
        assert barnes_g(2) == 1
        assert barnes_g(4) == 2
        assert barnes_g(6) == 288
        assert barnes_g(0) == 0 and barnes_g(-3) == 0
        # through the analytic path as well
        assert abs(cmath.exp(log_barnes_g(4)) - 2) < 2e-12
        assert abs(cmath.exp(log_barnes_g(6)) - 288) / 288 < 1e-12

    def test_against_mpmath(self):
        rng = random.Random(2)
        for _ in range(200):
            z = random_disc(rng, 12)
            ref = complex(mpmath.barnesg(z))
            if abs(ref) < 1e-250:
                continue
            assert rel(barnes_g(z), ref) < 1e-11, z

    def test_log_against_mpmath_large(self):
        rng = random.Random(3)
        for _ in range(200):
            z = random_disc(rng, 50)
            ref = complex(mpmath.log(mpmath.barnesg(z)))
            assert abs(mod_2pi_i(log_barnes_g(z) - ref)) <= 1e-13 * max(1.0, abs(ref)), z

    def test_half_integer(self):
        # G(3/2) = Gamma(1/2) G(1/2)
        assert rel(barnes_g(1.5), gamma(0.5) * barnes_g(0.5)) < 1e-13

    def test_ratio_int(self):
        assert barnes_g_ratio_int([], 0.3, 4) == 1
        assert abs(barnes_g_ratio_int([0], 1, 3) - 2) < 1e-13
        v = barnes_g_ratio_int([0.3], 1.2, 2)
        assert rel(v, gamma(1.5) * gamma(2.5)) < 1e-14
        assert rel(v, barnes_g_prod([0.3], 3.2) / barnes_g_prod([0.3], 1.2)) < 1e-10

    def test_poles(self):
        with pytest.raises(PoleError):
            log_barnes_g(-2)


class TestPfq:
    def test_exponential(self):
        assert abs(pfq([], [], 1).value - math.e) < 1e-15

    def test_geometric(self):
        res = pfq([1], [], 0.5)
        assert abs(res.value - 2) < 1e-14
        assert res.tail < 1e-13

    def test_against_mpmath(self):
        rng = random.Random(4)
        for p in range(5):
            for _ in range(10):
                num = [complex(rng.uniform(-2, 2), rng.uniform(-1, 1)) for _ in range(p)]
                den = [complex(rng.uniform(0.5, 3), rng.uniform(-1, 1)) for _ in range(3)]
                x = cmath.rect(rng.uniform(0, 0.9 if p == 4 else 5), rng.uniform(-3, 3))
                ref = complex(mpmath.hyper(num, den, x))
                got = pfq(num, den, x)
                assert abs(got.value - ref) <= 1e-13 * max(1.0, abs(ref)) + got.tail

    @given(st.integers(0, 8), complexes, st.floats(-3, 3))
    def test_truncation_is_finite_sum(self, m, b, x):
        b = complex(abs(b.real) + 0.5, b.imag)
        res = pfq([-m, 0.7], [b], x)
        assert res.tail == 0.0
        # explicit finite sum along the same arithmetic path
        term, out = 1 + 0j, [1 + 0j]
        for k in range(m):
            term = term * (x / (k + 1) * (-m + k) * (0.7 + k) / (b + k))
            out.append(term)
        expect = complex(math.fsum(t.real for t in out), math.fsum(t.imag for t in out))
        assert res.value == expect

    def test_regime_checks(self):
        with pytest.raises(NonConvergenceError):
            pfq([1, 1, 1, 1, 1], [1, 1, 1], 0.1)
        with pytest.raises(NonConvergenceError):
            pfq([0.5, 0.5, 0.5, 0.5], [1, 1, 1], 1.0)
        with pytest.raises(PoleError):
            pfq([0.5], [-2], 0.1)
        # a truncating numerator keeps a divergent-type series finite
        assert pfq([-2, 1, 1, 1, 1], [1, 1, 1], 3.0).tail == 0.0

    def test_max_terms(self):
        with pytest.raises(NonConvergenceError):
            pfq([1], [], 0.999, SeriesControl(max_terms=50))

    @settings(max_examples=30)
    @given(st.floats(0.05, 0.45), st.floats(-6, 0))
    def test_first_lattice_sum(self, sigma, u):
        # 0F3(;1+2s,1+2s,1; e^u) e^{us}/Gamma(1+2s)^2 is the sum of w(k+s) e^{u(k+s)} over k >= 0
        lhs = cmath.exp(u * sigma) * recip_gamma(1 + 2 * sigma) ** 2 * pfq([], [1 + 2 * sigma] * 2 + [1], cmath.exp(u)).value
        terms = [
            cmath.exp(u * (k + sigma)) * (recip_gamma(k + 1 + 2 * sigma) * recip_gamma(k + 1)) ** 2 for k in range(40)
        ]
        assert rel(lhs, sum(terms)) < 1e-13
