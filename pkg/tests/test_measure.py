import math

import numpy as np
import pytest

from bclab.errors import ArgumentError, ResourceError
from bclab.measure import (
    exact_expectation, interval_mass_bounds, mc_expectation, small_union_check, small_union_constants,
    word_average,
)
from bclab.observables import plateau_bump, polynomial, ramp_observable, sample_gbm, weierstrass
from bclab.piecewise import PiecewisePolynomial
from bclab.observables import Observable, PiecewiseComponent
from bclab.symbolic import cylinder_of, series_coefficients, support_radius


def indicator(lo, hi):
    pp = PiecewisePolynomial([lo, hi], [[1.0]], 0.0, 0.0)
    return Observable([PiecewiseComponent(pp, 0)])


class TestExact:
    def test_constant(self):
        r = exact_expectation(polynomial(1.0), 0.37, 12)
        assert r.value == 1.0 and r.error_bound == 0.0

    def test_odd_moment_vanishes(self):
        assert abs(exact_expectation(polynomial(0, 1), 0.61, 20).value) <= 1e-12

    def test_second_moment(self):
        r = exact_expectation(polynomial(0, 0, 1), 0.4, 22)
        assert abs(r.value - 1 / 0.84) <= r.error_bound
        assert r.value == pytest.approx(1 / 0.84, abs=1e-12)

    @pytest.mark.parametrize("lam", [0.2, 0.55, 0.8])
    def test_fourth_moment(self, lam):
        # E X^4 = 3 (sum q^2)^2 - 2 sum q^4 with q_m = lam^(m-1)
        s2 = 1 / (1 - lam ** 2)
        s4 = 1 / (1 - lam ** 4)
        ref = 3 * s2 ** 2 - 2 * s4
        r = exact_expectation(polynomial(0, 0, 0, 0, 1), lam, 22)
        assert abs(r.value - ref) <= r.error_bound + 1e-12

    def test_depth_cap(self):
        with pytest.raises(ResourceError):
            exact_expectation(polynomial(1.0), 0.4, 27)

    def test_error_bound_covers_depth_change(self):
        phi = plateau_bump(-0.5, 1.5, 0.3)
        for lam in (0.3, 0.7):
            a = exact_expectation(phi, lam, 12)
            b = exact_expectation(phi, lam, 22)
            assert abs(a.value - b.value) <= a.error_bound + b.error_bound

    def test_holder_bound_for_weierstrass(self):
        w = weierstrass(3, 2, 12)
        a = exact_expectation(w, 0.45, 10)
        b = exact_expectation(w, 0.45, 22)
        assert abs(a.value - b.value) <= a.error_bound + b.error_bound
        alpha, c = w.holder()
        assert a.error_bound == pytest.approx(c * (0.45 ** 10 / 0.55) ** alpha)

    def test_order_independent(self):
        lam, depth = 0.43, 16
        coef = series_coefficients(lam, depth)[:1]
        phi = plateau_bump(-1, 2, 0.25)
        a = word_average(coef, lambda v: phi.value(v[0]), chunk_words=1 << 16)
        b = word_average(coef, lambda v: phi.value(v[0]), chunk_words=1 << 20)
        rng = np.random.default_rng(0)
        vals = []
        for_w = word_average(coef, lambda v: vals.append(v[0].copy()) or np.zeros(v.shape[1]))
        x = np.concatenate(vals)
        rng.shuffle(x)
        c = math.ldexp(math.fsum(phi.value(x).tolist()), -depth)
        assert a == b == c

    def test_linearity(self):
        lam = 0.58
        f, g = plateau_bump(-1, 1, 0.4), ramp_observable(-1, 2)
        lhs = exact_expectation(2.5 * f - 0.75 * g, lam, 18).value
        rhs = 2.5 * exact_expectation(f, lam, 18).value - 0.75 * exact_expectation(g, lam, 18).value
        assert lhs == pytest.approx(rhs, abs=1e-13)


class TestMonteCarlo:
    def test_second_moment(self):
        r = mc_expectation(polynomial(0, 0, 1), 0.4, 10 ** 6, seed=12)
        assert abs(r.value - 1 / 0.84) <= r.error_bound
        assert r.error_bound == pytest.approx(4 * r.std / 1000, rel=1e-6)

    def test_constant_exact(self):
        for seed in range(3):
            assert mc_expectation(polynomial(1.0), 0.7, 1000, seed).value == 1.0

    def test_half_cylinder(self):
        r = mc_expectation(indicator(1 / 3, 5 / 3), 0.4, 10 ** 6, seed=3)
        assert abs(r.value - 0.5) <= r.error_bound

    def test_reproducible(self):
        phi = plateau_bump(-1, 1, 0.3)
        a = mc_expectation(phi, 0.6, 200_000, seed=99)
        b = mc_expectation(phi, 0.6, 200_000, seed=99)
        assert a == b

    def test_minimum_samples(self):
        with pytest.raises(ArgumentError):
            mc_expectation(polynomial(1.0), 0.5, 99, 0)

    @pytest.mark.parametrize("build", [
        lambda: polynomial(0, 0, 1),
        lambda: plateau_bump(-0.3, 1.4, 0.3),
        lambda: sample_gbm(64, 0.1, 0.2, 0.5, seed=1).observable(),
    ])
    def test_agreement_over_seeds(self, build):
        phi, lam = build(), 0.45
        ex = exact_expectation(phi, lam, 20)
        hits = 0
        for seed in range(100):
            mc = mc_expectation(phi, lam, 4000, seed)
            hits += abs(mc.value - ex.value) <= mc.error_bound + ex.error_bound
        assert hits >= 99


class TestIntervalMass:
    def test_full_support(self):
        r = support_radius(0.3)
        b = interval_mass_bounds(0.3, (-r, r), 8)
        assert (b.lower, b.upper) == (1.0, 1.0)

    @pytest.mark.parametrize("level", [1, 5, 20])
    def test_first_cylinder(self, level):
        b = interval_mass_bounds(0.4, (1 / 3, 5 / 3), level)
        assert (b.lower, b.upper) == (0.5, 0.5)

    def test_central_gap(self):
        b = interval_mass_bounds(0.4, (-1 / 3, 1 / 3), 12)
        assert (b.lower, b.upper) == (0.0, 0.0)

    def test_monotone_and_dyadic(self):
        lam = 0.37
        prev = (0.0, 1.0)
        for level in range(0, 25):
            b = interval_mass_bounds(lam, (0.1, 0.9), level)
            assert prev[0] <= b.lower <= b.upper <= prev[1]
            for v in (b.lower, b.upper):
                assert (v * 2 ** level).is_integer()
            prev = (b.lower, b.upper)

    def test_brute_force(self):
        lam, level = 0.31, 10
        c = series_coefficients(lam, level)[0]
        from bclab import kernels
        centers = kernels.signed_sums(c)
        half = lam ** level / (1 - lam)
        lo, hi = -0.2, 1.1
        inside = np.sum((centers - half >= lo) & (centers + half <= hi))
        meet = np.sum((centers - half < hi) & (centers + half > lo))
        b = interval_mass_bounds(lam, (lo, hi), level)
        assert b.lower == inside / 2 ** level and b.upper == meet / 2 ** level

    def test_contains_mc_mass(self):
        b = interval_mass_bounds(0.35, (0.2, 0.8), 18)
        r = exact_expectation(indicator(0.2, 0.8), 0.35, 18)
        assert b.lower <= r.value <= b.upper

    def test_level_cap(self):
        with pytest.raises(ResourceError):
            interval_mass_bounds(0.3, (0, 1), 27)


class TestSmallUnion:
    def test_constants(self):
        L, l, rp = small_union_constants(0.1)
        assert (L, l) == (6, 5)
        assert rp == pytest.approx(0.5 * 6 * 1e-5)

    def test_gap_piece(self):
        lam = 0.35
        base = cylinder_of(lam, (1, -1))
        left, right = cylinder_of(lam, (1, -1, -1)), cylinder_of(lam, (1, -1, 1))
        mid = 0.5 * (left.hi + right.lo)
        rep = small_union_check(0.1, lam, base, [(mid - 1e-9, mid + 1e-9)])
        assert rep.hypothesis_met and rep.mass_upper == 0.0 and rep.verdict

    def test_base_itself_rejected(self):
        lam = 0.35
        base = cylinder_of(lam, (1,))
        rep = small_union_check(0.1, lam, base, [(base.lo, base.hi)])
        assert not rep.hypothesis_met and rep.verdict is None

    def test_random_admissible(self):
        delta, lam = 0.1, 0.35
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            m = int(rng.integers(0, 8))
            word = tuple(int(s) for s in rng.choice([-1, 1], size=m))
            base = cylinder_of(lam, word)
            L, _, rp = small_union_constants(delta)
            r = int(rng.integers(1, L + 1))
            budget = rp * lam ** m / (1 - lam)
            lengths = rng.dirichlet(np.ones(r)) * budget * rng.uniform(0.01, 0.999)
            starts = rng.uniform(base.lo, base.hi - lengths)
            pieces = list(zip(starts, starts + lengths))
            rep = small_union_check(delta, lam, base, pieces)
            assert rep.hypothesis_met, rep.reason
            assert rep.verdict
            oracle = sum(interval_mass_bounds(lam, p, m + 12).upper for p in pieces)
            assert oracle <= rep.mass_upper
            assert oracle <= 0.5 * 2.0 ** -m
