import itertools
import math

import numpy as np
import pytest

from bclab import kernels
from bclab.errors import ArgumentError, DomainError
from bclab.symbolic import (
    SignWord, cylinder_gap, cylinder_of, eval_series, forced_prefix_length,
    forced_prefix_margin, iter_word_blocks, level_intervals, series_coefficients,
    tail_bounds, x1_threshold_classic,
)


class TestSignWord:
    def test_rejects_bad_entries(self):
        with pytest.raises(ArgumentError):
            SignWord((1, 0, -1))

    def test_empty_word(self):
        w = SignWord()
        assert len(w) == 0 and w.index() == 0

    def test_index_round_trip(self):
        for idx in range(32):
            assert SignWord.from_index(idx, 5).index() == idx

    def test_string(self):
        assert SignWord.from_string("+-+").signs == (1, -1, 1)


class TestEvalSeries:
    def test_all_plus_geometric(self):
        s = eval_series(0.4, (), depth=40, continuation="plus")
        assert s.x == pytest.approx(1 / 0.6, abs=1e-15)
        assert s.tail_x <= 0.4 ** 40 / 0.6 * (1 + 1e-12)

    def test_alternating(self):
        s = eval_series(0.4, (), depth=64, continuation="alternate")
        assert s.x == pytest.approx(1 / 1.4, abs=1e-14)

    def test_x1_all_plus(self):
        s = eval_series(0.3, (), depth=64)
        assert s.x1 == pytest.approx(1 / 0.7 ** 2, rel=1e-13)

    def test_x2_all_plus(self):
        lam = 0.3
        s = eval_series(lam, (), depth=64)
        assert s.x2 == pytest.approx(2 / (1 - lam) ** 3, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            eval_series(1.0, (), 10)
        with pytest.raises(DomainError):
            eval_series(0.0, (), 10)
        with pytest.raises(ArgumentError):
            eval_series(0.4, (1, 1, 1), depth=2)

    def test_tail_bounds_monotone_in_depth(self):
        prev = None
        for d in range(5, 80):
            t = tail_bounds(0.7, d)
            if prev is not None and d > 30:
                assert all(a <= b for a, b in zip(t, prev))
            prev = t

    def test_tail_bound_dominates_depth_changes(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            lam = rng.uniform(0.05, 0.95)
            cont = rng.choice([-1, 1], size=120)
            d1, d2 = sorted(rng.integers(1, 100, size=2))
            a = eval_series(lam, (), int(d1), cont)
            b = eval_series(lam, (), int(d2), cont)
            assert abs(a.x - b.x) <= a.tail_x + 1e-15
            assert abs(a.x1 - b.x1) <= a.tail_x1 + 1e-13
            assert abs(a.x2 - b.x2) <= a.tail_x2 + 1e-11

    def test_abs_x_bounded(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            lam = rng.uniform(0.01, 0.99)
            s = eval_series(lam, (), 30, rng.choice([-1, 1], size=30))
            assert abs(s.x) <= 1 / (1 - lam) + s.tail_x

    def test_derivatives_match_finite_difference(self):
        rng = np.random.default_rng(3)
        cont = rng.choice([-1, 1], size=64)
        lam, h = 0.45, 1e-5
        s = eval_series(lam, (), 64, cont)
        sp = eval_series(lam + h, (), 64, cont)
        sm = eval_series(lam - h, (), 64, cont)
        assert s.x1 == pytest.approx((sp.x - sm.x) / (2 * h), rel=1e-7)
        assert s.x2 == pytest.approx((sp.x1 - sm.x1) / (2 * h), rel=1e-6)


class TestCylinders:
    def test_first_level(self):
        c = cylinder_of(0.4, (1,))
        assert c.lo == pytest.approx(1 / 3) and c.hi == pytest.approx(5 / 3)

    def test_rightmost(self):
        lam, m = 0.35, 5
        c = cylinder_of(lam, (1,) * m)
        assert c.lo == pytest.approx(1 / (1 - lam) - 2 * lam ** m / (1 - lam))
        assert c.hi == pytest.approx(1 / (1 - lam))

    def test_empty_word_is_support(self):
        c = cylinder_of(0.4, ())
        assert (c.lo, c.hi) == pytest.approx((-5 / 3, 5 / 3))

    def test_length_and_nesting(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            lam = rng.uniform(0.05, 0.95)
            w = SignWord(tuple(rng.choice([-1, 1], size=rng.integers(0, 12))))
            c = cylinder_of(lam, w)
            m = len(w)
            assert c.length == pytest.approx(2 * lam ** m / (1 - lam), rel=1e-10)
            r = 1 / (1 - lam)
            assert -r - 1e-12 <= c.lo and c.hi <= r + 1e-12
            for s in (-1, 1):
                child = cylinder_of(lam, w.extend(s))
                assert c.lo - 1e-12 <= child.lo and child.hi <= c.hi + 1e-12

    def test_composition_matches_affine_form(self):
        lam = 0.37
        w = SignWord.from_string("+--+-")
        lo, hi = -1 / (1 - lam), 1 / (1 - lam)
        for s in reversed(w.signs):
            lo, hi = lam * lo + s, lam * hi + s
        c = cylinder_of(lam, w)
        assert (c.lo, c.hi) == pytest.approx((lo, hi), abs=1e-14)


class TestGap:
    def test_level_one(self):
        assert cylinder_gap(0.4, 1) == pytest.approx(2 / 3)
        a, b = cylinder_of(0.4, (-1,)), cylinder_of(0.4, (1,))
        assert b.lo - a.hi == pytest.approx(2 / 3)

    def test_brute_force_level_three(self):
        lam = 0.45
        lo, hi = level_intervals(lam, 3)
        gaps = [lo[j] - hi[i] for i, j in itertools.combinations(range(8), 2)]
        assert min(gaps) == pytest.approx(0.0736363636, rel=1e-8)
        assert cylinder_gap(lam, 3) == pytest.approx(2 * 0.45 ** 2 * 0.1 / 0.55)

    def test_vanishes_at_half(self):
        assert cylinder_gap(0.5 - 1e-9, 4) < 1e-8

    def test_domain(self):
        with pytest.raises(DomainError):
            cylinder_gap(0.5, 2)

    @pytest.mark.parametrize("lam", [0.1, 0.3, 0.49])
    def test_disjoint_with_gap(self, lam):
        m = 7
        lo, hi = level_intervals(lam, m)
        assert np.all(lo[1:] - hi[:-1] >= cylinder_gap(lam, m) * (1 - 1e-9))


class TestEnumeration:
    def test_blocks_cover_all_words(self):
        lam, depth = 0.3, 18
        c = series_coefficients(lam, depth)
        seen = 0
        for blk in iter_word_blocks(c, chunk_words=1 << 17):
            assert blk.start == seen
            seen += blk.size
        assert seen == 1 << depth

    def test_values_match_direct(self):
        lam, depth = 0.41, 19
        c = series_coefficients(lam, depth)
        rng = np.random.default_rng(0)
        blocks = list(iter_word_blocks(c, chunk_words=1 << 17))
        for idx in rng.integers(0, 1 << depth, size=50):
            blk = next(b for b in blocks if b.start <= idx < b.start + b.size)
            s = eval_series(lam, SignWord.from_index(int(idx), depth), depth)
            got = blk.values[:, idx - blk.start]
            np.testing.assert_allclose(got, [s.x, s.x1, s.x2], rtol=1e-13, atol=1e-13)

    def test_signed_sums_order(self):
        v = kernels.signed_sums(np.array([4.0, 2.0, 1.0]))
        np.testing.assert_array_equal(v, [-7, -5, -3, -1, 1, 3, 5, 7])


class TestX1LowerBound:
    @pytest.mark.parametrize("lam", [0.15, 0.3, 0.45])
    def test_classic_threshold_exhaustive(self, lam):
        delta = min(lam, 1 - lam) * 0.999
        m, dprime = x1_threshold_classic(delta)
        assert m >= 10
        c = series_coefficients(lam, 20)
        thresh = 1 / (1 - lam) - dprime
        for blk in iter_word_blocks(c):
            x, x1 = blk.values[0], blk.values[1]
            hit = x > thresh
            assert np.all(x1[hit] > 0.5)

    @pytest.mark.parametrize("lam", [0.15, 0.3, 0.45])
    def test_forced_prefix_exhaustive(self, lam):
        m = forced_prefix_length(lam, lam)
        c = series_coefficients(lam, 20)
        margin = forced_prefix_margin(lam, lam, m, lam)
        thresh = 1 / (1 - lam) - margin
        n_hit = 0
        for blk in iter_word_blocks(c):
            x, x1 = blk.values[0], blk.values[1]
            hit = x > thresh
            n_hit += int(hit.sum())
            assert np.all(x1[hit] > 0.5)
        assert n_hit > 0
