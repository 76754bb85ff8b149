import math

import pytest

from bclab.errors import ArgumentError, CapabilityError
from bclab.observables import Observable, PiecewiseComponent, dimension_drop_phi, plateau_bump, polynomial, ramp_observable
from bclab.piecewise import PiecewisePolynomial
from bclab.response import blowup_scan, diff_quotient, genericity_perturbation, mean_increment, response


def x2_h(lam):
    return 1 / (1 - lam ** 2)


def x2_h1(lam):
    return 2 * lam / (1 - lam ** 2) ** 2


def x2_h2(lam):
    return 2 * (1 + 3 * lam ** 2) / (1 - lam ** 2) ** 3


@pytest.fixture(scope="module")
def dimdrop():
    return dimension_drop_phi(0.35, 0.5, 4)


class TestResponse:
    def test_x2_closed_forms(self):
        r = response(polynomial(0, 0, 1), 0.4)
        assert r.h_prime.value == pytest.approx(1.1337868480725626, rel=1e-9)
        assert r.h_second.value == pytest.approx(4.994061116510097, rel=1e-9)
        assert abs(r.h_prime.value - x2_h1(0.4)) <= r.h_prime.error_bound
        assert abs(r.h_second.value - x2_h2(0.4)) <= r.h_second.error_bound

    def test_x2_second_derivative_against_fd(self):
        d = 1e-3
        hp = response(polynomial(0, 0, 1), 0.4, order=0, depth=22)
        hm = response(polynomial(0, 0, 1), 0.4 - d, order=0, depth=22).h.value
        hq = response(polynomial(0, 0, 1), 0.4 + d, order=0, depth=22).h.value
        fd = (hq - 2 * hp.h.value + hm) / d ** 2
        assert abs(response(polynomial(0, 0, 1), 0.4).h_second.value - fd) < 1e-3

    @pytest.mark.parametrize("lam", [0.1, 0.5, 0.73])
    def test_identity_has_zero_response(self, lam):
        r = response(polynomial(0, 1), lam, order=2, depth=16)
        assert abs(r.h_prime.value) < 1e-12 and abs(r.h_second.value) < 1e-12

    def test_c0_rejects_derivative(self):
        with pytest.raises(CapabilityError):
            response(ramp_observable(0, 1), 0.4, order=1)
        assert response(ramp_observable(0, 1), 0.4, order=0, depth=12).h_prime is None

    def test_c1_rejects_second_derivative(self):
        # x|x| on [-2, 2]: C1 with a jump in the second derivative at 0
        pp = PiecewisePolynomial([-2.0, 0.0, 2.0], [[0, 0, -1], [0, 0, 1]], -4.0, 4.0)
        phi = Observable([PiecewiseComponent(pp, 1)])
        assert response(phi, 0.4, order=1, depth=14).h_prime.value == pytest.approx(0, abs=1e-12)
        with pytest.raises(CapabilityError):
            response(phi, 0.4, order=2)

    @pytest.mark.parametrize("lam", [0.3, 0.52, 0.66])
    def test_composite_matches_central_difference(self, lam):
        phi = plateau_bump(-0.5, 0.8, 0.3) + polynomial(0, 0.2, 0, 0.1)
        r = response(phi, lam, order=1, depth=18)
        d = 1e-4
        fd = diff_quotient(phi, lam - d, 2 * d, depth=18).value
        assert abs(r.h_prime.value - fd) / (1 + abs(r.h_prime.value)) < 1e-6

    def test_monte_carlo_mode(self):
        r = response(polynomial(0, 0, 1), 0.4, order=2, mode="mc", n=1 << 16, seed=3)
        assert abs(r.h_prime.value - x2_h1(0.4)) <= r.h_prime.error_bound
        assert abs(r.h_second.value - x2_h2(0.4)) <= r.h_second.error_bound
        again = response(polynomial(0, 0, 1), 0.4, order=2, mode="mc", n=1 << 16, seed=3)
        assert again.h_second.value == r.h_second.value

    def test_unknown_mode(self):
        with pytest.raises(ArgumentError):
            response(polynomial(0, 0, 1), 0.4, mode="magic")


class TestDiffQuotient:
    def test_zero_step_rejected(self):
        with pytest.raises(ArgumentError):
            diff_quotient(polynomial(0, 0, 1), 0.4, 0.0)

    @pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4, 1e-5, -1e-3])
    def test_identity_quotient_is_zero(self, eps):
        assert abs(diff_quotient(polynomial(0, 1), 0.5, eps, depth=14).value) < 1e-12

    def test_bump_converges_to_derivative(self):
        phi = plateau_bump(-0.3, 0.6, 0.4)
        lam = 0.45
        hp = response(phi, lam, order=2, depth=18)
        errs = []
        for eps in (1e-2, 1e-3, 1e-4, 1e-5):
            q = diff_quotient(phi, lam, eps, depth=18)
            errs.append(abs(q.value - hp.h_prime.value))
        # O(eps) with leading constant |h''| / 2
        for eps, err in zip((1e-3, 1e-4, 1e-5), errs[1:]):
            assert err / eps == pytest.approx(0.5 * abs(hp.h_second.value), rel=0.1)
        assert errs[-1] < errs[0] / 100

    def test_x2_quotient_closed_form(self):
        lam, eps = 0.3, 1e-3
        q = diff_quotient(polynomial(0, 0, 1), lam, eps, depth=22)
        ref = (x2_h(lam + eps) - x2_h(lam)) / eps
        assert abs(q.value - ref) <= q.error_bound + 1e-9

    def test_mean_increment_linear(self):
        a, b = plateau_bump(-0.3, 0.6, 0.4), polynomial(0, 0, 1)
        lhs = mean_increment(a + b.scaled(2.0), 0.4, 1e-3, 14)
        rhs = mean_increment(a, 0.4, 1e-3, 14) + 2 * mean_increment(b, 0.4, 1e-3, 14)
        assert lhs == pytest.approx(rhs, abs=1e-14)


class TestBlowupScan:
    def test_ladder_validation(self):
        with pytest.raises(ArgumentError):
            blowup_scan(polynomial(0, 1), 0.4, [1e-2, 1e-2])
        with pytest.raises(ArgumentError):
            blowup_scan(polynomial(0, 1), 0.4, [1e-2, -1e-3])

    def test_dimension_drop_scan(self, dimdrop):
        phi, layers, cfg = dimdrop
        table = blowup_scan(phi, 0.35, cfg.eps_ladder, depth=20, layers=layers)
        assert table.monotone_increasing()
        for row in table.rows:
            assert row.identity_residual <= 1e-12
            assert abs(row.S) <= row.S_bound
            assert abs(row.R) <= row.R_bound
            assert row.T > 0
        rec = table.as_records()
        assert set(rec[0]) == set(table.COLUMNS)

    def test_layer_derivatives_meet_lower_bound(self, dimdrop):
        _, layers, cfg = dimdrop
        for layer in layers:
            hp = response(layer, 0.35, order=1, depth=20).h_prime
            assert hp.value - hp.error_bound >= 3 / 8 * 2.0 ** -cfg.m0


class TestGenericity:
    def test_kappa_zero_reproduces_f(self):
        f = plateau_bump(-0.3, 0.6, 0.4)
        rows = genericity_perturbation(f, polynomial(0, 0, 1), 0.0, [1e-2, 1e-3], 0.4, depth=14)
        assert all(r.q_sum == r.q_f for r in rows)

    def test_cancellation(self):
        phi = plateau_bump(-0.3, 0.6, 0.4)
        rows = genericity_perturbation(-phi, phi, 1.0, [1e-2, 1e-3, 1e-4], 0.4, depth=14)
        assert all(abs(r.q_sum) < 1e-12 for r in rows)

    def test_negative_kappa_rejected(self):
        with pytest.raises(ArgumentError):
            genericity_perturbation(polynomial(0, 1), polynomial(0, 1), -1.0, [1e-2], 0.4)

    def test_perturbed_lower_bound(self, dimdrop):
        phi, _, cfg = dimdrop
        f = plateau_bump(-0.3, 0.6, 0.4)
        rows = genericity_perturbation(f, phi.scaled(100.0), 0.1, cfg.eps_ladder, 0.35, depth=18)
        certified = [r for r in rows if r.certified]
        assert certified
        for r in certified:
            assert r.holds is not False
            assert r.q_sum >= 0.1 * r.n ** 2 - r.n or abs(r.q_f) > r.n
