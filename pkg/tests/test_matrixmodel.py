from __future__ import annotations

import cmath
import itertools
import math
import random
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from painleve_blocks.blocks import BlockParams, coeff_direct, weight_w
from painleve_blocks.errors import IllConditionedWarning, NonConvergenceError
from painleve_blocks.matrixmodel import (
    LaurentPoly,
    MeasureSpec,
    MomentTable,
    decreasing_tuples,
    hankel_det_q0,
    hankel_laurent_coeffs,
    laurent_det,
    mgf,
    moments,
    partial_sum_direct,
    partial_sum_hankel,
    partition_function_balanced,
)
from painleve_blocks.partitions import shell_pairs
from painleve_blocks.specfun import recip_gamma
from painleve_blocks.verify import random_generic, rel_err

PV_A = (0.4, -0.1, 0.7)


def lattice_oracle(u, p: BlockParams, side: int, terms: int = 80, power: int = 0):
    """Plain mpmath sum of w(x) e^{ux} x^power over the first lattice points."""
    with mpmath.workdps(40):
        s = mpmath.mpc(p.sigma)
        total = mpmath.mpc(0)
        for k in range(terms):
            x = k + side * s
            w = mpmath.rgamma(x + 1 + s) ** 2 * mpmath.rgamma(x + 1 - s) ** 2
            for a in p.a:
                w *= mpmath.rgamma(p.K - x + a)
            total += w * mpmath.exp(u * x) * x**power
        return complex(total)


def hankel_oracle(t, p: BlockParams, max_weight: int):
    return partial_sum_direct(t, p, max_weight)


class TestLaurentPoly:
    def test_arithmetic(self):
        a = LaurentPoly({1: 2, -1: 3})
        b = LaurentPoly({0: 1, 1: -1})
        prod = a * b
        assert prod.coeff(2) == -2 and prod.coeff(1) == 2 and prod.coeff(0) == -3 and prod.coeff(-1) == 3
        assert (a - a).coeffs == {} or all(c == 0 for c in (a - a).coeffs.values())
        assert (a + 1).coeff(0) == 1
        assert a(2.0) == 2 * 2 + 3 / 2
        assert prod.degree_range == (-1, 2)

    def test_det_matches_numeric(self):
        rng = random.Random(0)
        mat = [[LaurentPoly({1: rng.random(), -1: rng.random()}) for _ in range(3)] for _ in range(3)]
        q = 0.7 + 0.2j
        num = np.linalg.det(np.array([[m(q) for m in row] for row in mat]))
        assert abs(laurent_det(mat)(q) - num) < 1e-12


class TestMeasure:
    def test_cutoff(self):
        K, s = 2, 0.3
        assert MeasureSpec(BlockParams((0.2,), s, K)).cutoff(1) is None
        # K - sigma + a = 3 kills the +sigma masses from k = 3 on
        p = BlockParams((1 + s,), s, K)
        assert MeasureSpec(p).cutoff(1) == 3
        assert weight_w(3 + s, p) == 0 and weight_w(2 + s, p) != 0
        # K + sigma + a = -1: the -sigma lattice is empty
        assert MeasureSpec(BlockParams((-3 - s,), s, K)).cutoff(-1) == 0

    def test_regime(self):
        with pytest.raises(NonConvergenceError):
            mgf(0.0, BlockParams((0.1, 0.2, 0.3, 0.4, 0.5), 0.3, 1))
        with pytest.raises(NonConvergenceError):
            moments(0.1, BlockParams((0.1, 0.2, 0.3, 0.4), 0.3, 1))
        mgf(-0.1, BlockParams((0.1, 0.2, 0.3, 0.4), 0.3, 1))


class TestMgf:
    def test_zero_f_three_example(self):
        p = BlockParams((), 0.25, 1)
        u = math.log(0.1)
        v = mgf(u, p)
        expect = 0.1**0.25 / complex(mpmath.gamma(1.5)) ** 2 * complex(mpmath.hyper([], [1.5, 1.5, 1], 0.1))
        assert rel_err(v.plus, expect) < 1e-13
        lattice = lattice_oracle(u, p, 1, terms=40)
        assert rel_err(v.plus, lattice) < 1e-12

    def test_u_to_minus_infinity(self):
        p = BlockParams((0.3, -0.2j), 0.26 + 0.1j, 2)
        u = -40.0
        v = mgf(u, p)
        s = p.sigma
        for side, comp in ((1, v.plus), (-1, v.minus)):
            lead = cmath.exp(u * side * s) * recip_gamma(1 + 2 * side * s) ** 2
            for a in p.a:
                lead *= recip_gamma(p.K - side * s + a)
            assert rel_err(comp, lead) < 1e-14

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_against_mpmath_lattice(self, seed):
        rng = random.Random(seed)
        n = rng.randint(0, 4)
        a = tuple(complex(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)) for _ in range(n))
        p = BlockParams(a, random_generic(rng), rng.randint(1, 3))
        u = complex(rng.uniform(-4, math.log(0.5) if n == 4 else 1.5), rng.uniform(-1, 1))
        v = mgf(u, p)
        for side, comp in ((1, v.plus), (-1, v.minus)):
            ref = lattice_oracle(u, p, side, terms=120)
            assert abs(comp - ref) <= 1e-12 * max(abs(ref), 1e-300) + 2 * (v.tail_plus + v.tail_minus)

    def test_odd_p_alternating_argument(self):
        p = BlockParams((0.35,), 0.2, 1)
        v = mgf(0.5, p)
        assert rel_err(v.plus, lattice_oracle(0.5, p, 1)) < 1e-12
        assert rel_err(v.minus, lattice_oracle(0.5, p, -1)) < 1e-12


class TestMoments:
    def test_against_mgf_and_oracle(self):
        p = BlockParams(PV_A, 0.26 + 0.1j, 2)
        u = math.log(0.05)
        mt = moments(u, p)
        assert len(mt) == 7
        v = mgf(u, p)
        assert rel_err(mt.plus[0], v.plus) < 1e-13 and rel_err(mt.minus[0], v.minus) < 1e-13
        for j in (1, 4, 6):
            assert rel_err(mt.plus[j], lattice_oracle(u, p, 1, power=j)) < 1e-12
            assert rel_err(mt.minus[j], lattice_oracle(u, p, -1, power=j)) < 1e-12

    def test_derivatives_by_finite_differences(self):
        p = BlockParams((0.3,), 0.27, 2)
        u = -1.2
        exact = moments(u, p, count=3)

        def m0(x):
            return moments(x, p, count=1).laurent(0)(1.0)

        def d1(h):
            return (m0(u + h) - m0(u - h)) / (2 * h)

        def d2(h):
            return (m0(u + h) - 2 * m0(u) + m0(u - h)) / h**2

        target1 = exact.laurent(1)(1.0)
        target2 = exact.laurent(2)(1.0)
        for h in (1e-4, 1e-5):
            assert rel_err(d1(h), target1) < 1e-6
        # Richardson extrapolation cancels the O(h^2) term
        rich = (4 * d1(5e-4) - d1(1e-3)) / 3
        assert rel_err(rich, target1) < 1e-9
        assert rel_err(d2(1e-3), target2) < 1e-5

    def test_extended_precision_agrees(self):
        p = BlockParams(PV_A, 0.3, 2)
        dbl = moments(-2.0, p)
        mp = moments(-2.0, p, precision=30)
        assert mp.dps == 30
        for j in range(len(dbl)):
            assert rel_err(complex(mp.plus[j]), dbl.plus[j]) < 1e-13
            assert rel_err(complex(mp.minus[j]), dbl.minus[j]) < 1e-13

    def test_truncated_lattice_terminates(self):
        p = BlockParams((1.3,), 0.3, 2)
        mt = moments(-1.0, p)
        assert mt.terms[1] == 3
        assert all(t == 0 for t in mt.tails_plus)


class TestHankelQ0:
    @pytest.mark.parametrize("sigma", [0.3, 0.26 + 0.1j])
    def test_symbolic_K1(self, sigma):
        p = BlockParams((), sigma, 1)
        mt = moments(math.log(0.1), p)
        sym = laurent_det([[mt.laurent(0), mt.laurent(1)], [mt.laurent(1), mt.laurent(2)]])
        assert rel_err(hankel_det_q0(mt, 1).value, sym.coeff(0)) < 1e-12

    @pytest.mark.parametrize("K", [1, 2, 3])
    def test_degree_bound_and_doubling(self, K):
        p = BlockParams((0.2 - 0.1j,), 0.3, K)
        mt = moments(math.log(0.1), p, precision=40)
        base = hankel_det_q0(mt, K)
        doubled = hankel_det_q0(mt, K, samples=2 * base.samples)
        assert abs(complex(doubled.value) - complex(base.value)) <= 1e-12 * abs(complex(base.value))
        coeffs = hankel_laurent_coeffs(mt, K, samples=4 * K + 5)
        scale = max(abs(complex(c)) for c in coeffs.values())
        for e, c in coeffs.items():
            if abs(e) > 2 * K:
                assert abs(complex(c)) <= 1e-13 * scale

    def test_only_balanced_part_survives(self):
        # every q^{-1} component zero: no configuration with K points on each lattice
        mt = moments(-1.0, BlockParams((-2 - 0.3,), 0.3, 2))
        assert all(m == 0 for m in mt.minus)
        q0 = hankel_det_q0(mt, 2).value
        scale = max(abs(m) for m in mt.plus) ** 4
        assert abs(q0) <= 1e-12 * scale

    def test_handmade_table(self):
        # q-independence: rescaling the minus components by c and the plus ones by 1/c leaves q^0 unchanged
        p = BlockParams((), 0.3, 1)
        mt = moments(-1.0, p)
        c = 3.7
        scaled = MomentTable(mt.u, [x / c for x in mt.plus], [x * c for x in mt.minus], mt.tails_plus, mt.tails_minus)
        assert rel_err(hankel_det_q0(scaled, 1).value, hankel_det_q0(mt, 1).value) < 1e-13


class TestRoutes:
    def test_direct_examples(self):
        for K in (1, 2):
            p = BlockParams((0.3,), 0.27, K)
            assert partial_sum_direct(0, p, 10).value == 1
        s, t = 0.3, 0.1
        r = partial_sum_direct(t, BlockParams((), s, 1), 1)
        assert rel_err(r.value, 1 + t / (2 * s * s)) < 1e-14
        p = BlockParams((), 0.3, 2)
        assert rel_err(partial_sum_direct(0.1, p, 20).value, partial_sum_direct(0.1, p, 30).value) < 1e-9

    def test_direct_tail_bounds_truncation(self):
        p = BlockParams((), 0.3, 2)
        lo, hi = partial_sum_direct(0.1, p, 12), partial_sum_direct(0.1, p, 30)
        assert abs(lo.value - hi.value) <= lo.tail_estimate

    @pytest.mark.parametrize(
        "a,K,sigma,t,mw,tol",
        [
            ((), 1, 0.3, 0.1, 30, 1e-8),
            (PV_A, 2, 0.26, 0.05, 24, 1e-7),
            ((), 2, 0.27, 0.08, 30, 1e-8),
        ],
    )
    def test_hankel_examples(self, a, K, sigma, t, mw, tol):
        p = BlockParams(a, sigma, K)
        h = partial_sum_hankel(math.log(t), p)
        d = partial_sum_direct(t, p, mw)
        assert abs(h.value - d.value) <= tol * abs(d.value) + d.tail_estimate

    def test_hankel_small_t_limit(self):
        p = BlockParams((0.2,), 0.3, 2)
        assert abs(partial_sum_hankel(math.log(1e-6), p).value - 1) < 1e-5

    def test_taylor_coefficients(self):
        p = BlockParams((0.3, -0.1), 0.27, 2)
        ts = [1e-3 * 2**k for k in range(5)]
        vals = [partial_sum_hankel(math.log(t), p).value for t in ts]
        V = np.vander(ts, 5, increasing=True)
        fit = np.linalg.solve(V, np.array(vals))
        for n in range(3):
            shell = sum(coeff_direct(lam, mu, p) for lam, mu in shell_pairs(2, n))
            assert rel_err(fit[n], shell) < 1e-6

    def test_precision_escalation(self):
        p = BlockParams((), 0.3, 3)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            auto = partial_sum_hankel(math.log(0.02), p)
        assert auto.extra["dps"] is not None
        d = partial_sum_direct(0.02, p, 24)
        assert rel_err(auto.value, d.value) < 1e-9
        with pytest.warns(IllConditionedWarning):
            partial_sum_hankel(math.log(0.02), p, precision="double")

    def test_balanced_matches_direct(self):
        p = BlockParams(PV_A, 0.26 + 0.1j, 2)
        b = partition_function_balanced(0.05, p, 16)
        d = partial_sum_direct(0.05, p, 16)
        for sb, sd in zip(b.shells, d.shells):
            assert abs(sb - sd) <= 1e-11 * max(abs(sd), 1e-300) + 1e-300
        assert rel_err(b.value, d.value) < 1e-12

    def test_truncating_measure_beyond_p4(self):
        # p = 5 with both lattices truncated: B_K is a polynomial in t and every route agrees
        K, s = 2, 0.3 + 0.05j
        p = BlockParams((3 - K + s, 2 - K - s, 0.3, -0.2j, 0.5), s, K)
        t = 0.7
        d = partial_sum_direct(t, p, 30)
        assert d.shells[-1] == 0 and d.tail_estimate == 0
        h = partial_sum_hankel(math.log(t), p)
        b = partition_function_balanced(t, p, 30)
        assert rel_err(h.value, d.value) < 1e-9
        assert rel_err(b.value, d.value) < 1e-12

    @settings(max_examples=12, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_route_equivalence(self, seed):
        rng = random.Random(seed)
        K = rng.randint(1, 3)
        n = rng.randint(0, 4)
        a = tuple(complex(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)) for _ in range(n))
        p = BlockParams(a, random_generic(rng, margin=0.1), K)
        t = cmath.rect(rng.uniform(0.01, 0.2), rng.uniform(-0.5, 0.5))
        mw = 22 if K < 3 else 16
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            d = partial_sum_direct(t, p, mw)
            h = partial_sum_hankel(cmath.log(t), p)
            b = partition_function_balanced(t, p, mw)
        assert abs(h.value - d.value) <= 1e-7 * abs(d.value) + d.tail_estimate
        assert abs(b.value - d.value) <= 1e-7 * abs(d.value) + d.tail_estimate + b.tail_estimate


def test_decreasing_tuples_brute_force():
    for K in (1, 2, 3):
        for top in range(8):
            got = list(decreasing_tuples(K, top))
            brute = [
                tup
                for tup in itertools.product(range(top + 1), repeat=K)
                if all(x > y for x, y in zip(tup, tup[1:])) and sum(tup) <= top
            ]
            assert sorted(got) == sorted(brute)
            assert len(set(got)) == len(got)
