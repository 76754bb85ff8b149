import mpmath
import numpy as np
import pytest
from scipy import integrate

from bclab.errors import ArgumentError
from bclab.piecewise import PiecewisePolynomial, smoothstep_coefs, smoothstep_down_coefs


def bump_pp(a=0.0, r=0.3, plateau=0.4):
    """0 -> smoothstep up on [a, a+r] -> 1 -> down on [.., ..+r] -> 0."""
    return PiecewisePolynomial.from_pieces([
        (a, a + r, smoothstep_coefs()),
        (a + r, a + r + plateau, [1.0]),
        (a + r + plateau, a + 2 * r + plateau, smoothstep_down_coefs()),
    ])


@pytest.fixture
def random_pp():
    rng = np.random.default_rng(42)
    knots = np.sort(rng.uniform(-2, 2, 9))
    return PiecewisePolynomial(knots, rng.normal(size=(8, 5)), left=0.3, right=-0.7)


class TestEvaluation:
    def test_matches_direct(self, random_pp):
        pp = random_pp
        x = np.linspace(-3, 3, 1001)
        y = pp(x)
        for xv, yv in zip(x, y):
            if xv < pp.knots[0]:
                assert yv == 0.3
            elif xv >= pp.knots[-1]:
                assert yv == -0.7
            else:
                i = np.searchsorted(pp.knots, xv, side="right") - 1
                t = (xv - pp.knots[i]) / (pp.knots[i + 1] - pp.knots[i])
                assert yv == pytest.approx(np.polynomial.polynomial.polyval(t, pp.coefs[i]), abs=1e-12)

    def test_scalar(self, random_pp):
        assert isinstance(random_pp(0.1), float)

    def test_rejects_unsorted(self):
        with pytest.raises(ArgumentError):
            PiecewisePolynomial([0, 2, 1], [[1, 0], [1, 0]])


class TestCalculus:
    def test_derivative_fd(self):
        pp = bump_pp()
        x = np.linspace(0.01, 0.99, 500)
        h = 1e-6
        fd = (pp(x + h) - pp(x - h)) / (2 * h)
        np.testing.assert_allclose(pp.derivative()(x), fd, atol=1e-6)
        d1 = pp.derivative()
        fd2 = (d1(x + h) - d1(x - h)) / (2 * h)
        np.testing.assert_allclose(pp.derivative(2)(x), fd2, atol=1e-4)

    def test_bump_is_c2(self):
        pp = bump_pp()
        for k in (0, 1, 2):
            d = pp.derivative(k)
            for knot in pp.knots:
                assert d(knot - 1e-12) == pytest.approx(d(knot), abs=1e-6)

    def test_antiderivative_quad(self):
        pp = bump_pp()
        F = pp.antiderivative()
        for x in (-1.0, 0.1, 0.5, 0.77, 2.0):
            ref = integrate.quad(pp, -1.0, x, points=list(pp.knots), limit=200)[0]
            assert F(x) == pytest.approx(ref, abs=1e-12)
        assert F.right == pytest.approx(0.3 + 0.4)

    def test_piece_integrals_sum(self):
        pp = bump_pp(r=0.25, plateau=0.5)
        assert pp.piece_integrals().sum() == pytest.approx(0.25 + 0.5)


class TestIncrement:
    def test_tiny_step_high_precision(self):
        pp = bump_pp(a=1.2, r=3e-7, plateau=5e-7).antiderivative()
        mpmath.mp.dps = 60
        rng = np.random.default_rng(1)
        x = 1.2 + rng.uniform(0, 1.1e-6, 200)
        d = 1e-20
        got = pp.increment(x, d)
        for xv, g in zip(x, got):
            i = np.searchsorted(pp.knots, xv, side="right") - 1
            a, b = mpmath.mpf(pp.knots[i]), mpmath.mpf(pp.knots[i + 1])
            t0 = (mpmath.mpf(xv) - a) / (b - a)
            t1 = (mpmath.mpf(xv) + mpmath.mpf(d) - a) / (b - a)
            poly = [mpmath.mpf(c) for c in pp.coefs[i]]
            ref = sum(c * (t1 ** k - t0 ** k) for k, c in enumerate(poly))
            assert g == pytest.approx(float(ref), rel=1e-9, abs=1e-40)

    def test_large_step_equals_difference(self, random_pp):
        x = np.linspace(-2.5, 2.5, 300)
        d = 0.37
        np.testing.assert_allclose(random_pp.increment(x, d), random_pp(x + d) - random_pp(x), atol=1e-12)


class TestSupNorm:
    def test_against_dense_grid(self, random_pp):
        x = np.linspace(-2.2, 2.2, 400001)
        dense = np.max(np.abs(random_pp(x)))
        assert random_pp.sup_abs() >= dense - 1e-12
        assert random_pp.sup_abs() <= dense * (1 + 1e-4) + 1e-9

    def test_smoothstep_derivative_sups(self):
        w = 0.2
        pp = PiecewisePolynomial.from_pieces([(0.0, w, smoothstep_coefs())], 0.0, 1.0)
        assert pp.derivative().sup_abs() == pytest.approx(15 / 8 / w)
        assert pp.derivative(2).sup_abs() == pytest.approx(10 / np.sqrt(3) / w ** 2)


class TestFourier:
    @pytest.mark.parametrize("xi", [0.0, 0.3, 5.0, 40.0, 333.3])
    def test_against_quad(self, xi):
        pp = bump_pp(a=-0.6, r=0.35, plateau=0.5)
        got = pp.fourier(xi)
        lo, hi = pp.span
        re = integrate.quad(lambda x: pp(x) * np.cos(xi * x), lo, hi, points=list(pp.knots), limit=2000)[0]
        im = integrate.quad(lambda x: -pp(x) * np.sin(xi * x), lo, hi, points=list(pp.knots), limit=2000)[0]
        assert got.real == pytest.approx(re, abs=1e-10)
        assert got.imag == pytest.approx(im, abs=1e-10)

    def test_zero_frequency_is_integral(self):
        pp = bump_pp()
        assert pp.fourier(0.0).real == pytest.approx(pp.piece_integrals().sum(), rel=1e-14)

    def test_even_function_real(self):
        pp = bump_pp(a=-0.5, r=0.3, plateau=0.4)
        v = pp.fourier(np.linspace(-50, 50, 101))
        assert np.max(np.abs(v.imag)) < 1e-10

    def test_constant_offset_removed(self):
        pp = PiecewisePolynomial.from_pieces([(0.0, 1.0, [2.0, 1.0]), (1.0, 2.0, [3.0, -1.0])], 2.0, 2.0)
        assert pp.fourier(0.0).real == pytest.approx(1.0)
