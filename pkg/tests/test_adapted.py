import math

import mpmath
import numpy as np
import pytest

from bclab.adapted import (
    adapted_pair_build, adapted_pair_verify, adapted_params, cell_weights, cylinder_level, demo_ladder,
    demo_scan, derivative_event_stats, eps_star, variance_scaling,
)
from bclab.errors import ArgumentError, DomainError, RangeError, ResourceError
from bclab.observables import GbmComponent, Observable, draw_gbm_signs
from bclab.response import response


@pytest.fixture(scope="module")
def cfg():
    return adapted_params(0.1, 0.5)


class TestParams:
    def test_defaults(self, cfg):
        assert cfg.theta1 == 0.0625 and cfg.beta == 0.03125
        assert cfg.theta2 == pytest.approx(0.5 * 0.7564707973660301, rel=1e-12)
        assert cfg.two_u == pytest.approx(0.625)

    def test_two_u_arithmetic(self):
        assert adapted_params(0.1, 0.5, theta1=0.1, beta=0.05).two_u == pytest.approx(0.4)

    def test_tau(self):
        assert math.log(2) / math.log(0.4) == pytest.approx(-0.756470797366030, rel=1e-12)
        assert -adapted_params(0.1, 0.5, theta2=0.5).tau == pytest.approx(-0.256470797366030, rel=1e-12)

    def test_rho(self, cfg):
        assert cfg.rho_prime == pytest.approx(3 * 10 ** -5.584962500721156, rel=1e-9)
        assert cfg.rho_prime == pytest.approx(7.80e-6, rel=2e-3)
        assert cfg.one_minus_rho == pytest.approx(3.90e-9, rel=2e-3)

    @pytest.mark.parametrize("delta,alpha", [(0.0, 0.5), (0.25, 0.5), (0.1, 0.0), (0.1, 1.0)])
    def test_domain(self, delta, alpha):
        with pytest.raises(DomainError):
            adapted_params(delta, alpha)

    def test_bad_overrides(self):
        with pytest.raises(ArgumentError):
            adapted_params(0.1, 0.5, theta1=0.1, beta=0.2)
        with pytest.raises(ArgumentError):
            adapted_params(0.1, 0.5, theta2=1.0)
        with pytest.raises(ArgumentError):
            adapted_params(0.1, 0.5, theta1=0.45)


class TestBuild:
    def test_first_scale(self, cfg):
        pair = adapted_pair_build(cfg, 1)
        assert pair.N == (10,)
        assert pair.eps[0] == eps_star(cfg, 10)

    def test_growth_rules(self, cfg):
        pair = adapted_pair_build(cfg, 3)
        N, eps = pair.N, pair.eps
        for k in range(1, 3):
            assert N[k] > 2 * N[k - 1]
            assert N[k] & (N[k] - 1) == 0
            with mpmath.workprec(256):
                lhs = mpmath.fsum(mpmath.mpf(n) ** cfg.theta1 for n in N[:k])
                assert lhs < mpmath.mpf(N[k]) ** (cfg.beta / 2)
                tail = mpmath.mpf(N[k]) ** -cfg.beta / (1 - mpmath.mpf(2) ** -cfg.beta)
                assert tail < eps[k - 1] / 100
        assert all(b < a for a, b in zip(eps, eps[1:]))

    def test_minimal_power_of_two(self, cfg):
        pair = adapted_pair_build(cfg, 2)
        smaller = pair.N[1] // 2
        with mpmath.workprec(256):
            tail = mpmath.mpf(smaller) ** -cfg.beta / (1 - mpmath.mpf(2) ** -cfg.beta)
            sum_ok = mpmath.mpf(10) ** cfg.theta1 < mpmath.mpf(smaller) ** (cfg.beta / 2)
            assert not (tail < pair.eps[0] / 100 and sum_ok and smaller > 20)

    def test_feasibility_limit(self, cfg):
        assert len(adapted_pair_build(cfg, 4).N) == 4
        with pytest.raises(RangeError) as exc:
            adapted_pair_build(cfg, 5)
        assert exc.value.largest_feasible == 4

    def test_k_max_validation(self, cfg):
        with pytest.raises(ArgumentError):
            adapted_pair_build(cfg, 0)


class TestVerify:
    def test_deterministic_conditions(self, cfg):
        rep = adapted_pair_verify(adapted_pair_build(cfg, 4), n_seeds=20)
        assert rep.deterministic_ok and rep.eps_star_ok and rep.passed
        assert [c.n for c in rep.condition2] == [2, 3, 4]
        assert rep.condition4[-1].ok is None
        assert [k for k, _ in rep.empirical] == [1]

    def test_detects_broken_eps(self, cfg):
        pair = adapted_pair_build(cfg, 3)
        bad = pair.__class__(**{**pair.__dict__, "eps": (pair.eps[0] * 2,) + pair.eps[1:]})
        assert not adapted_pair_verify(bad, n_seeds=5).eps_star_ok

    def test_detects_slow_growth(self, cfg):
        pair = adapted_pair_build(cfg, 3)
        bad = pair.__class__(**{**pair.__dict__, "N": (10, 1 << 20, pair.N[2])})
        assert not adapted_pair_verify(bad, n_seeds=5).deterministic_ok

    def test_needs_scales(self, cfg):
        with pytest.raises(ArgumentError):
            adapted_pair_verify(cfg)


class TestDerivativeStats:
    @pytest.mark.parametrize("lam,N", [(0.25, 256), (0.25, 4096), (0.15, 1024), (0.35, 512)])
    def test_level_rule(self, lam, N):
        m = cylinder_level(N, lam)
        c = 2 * (1 - 2 * lam) / (1 - lam)
        assert c * lam ** m < 2 / N <= c * lam ** (m - 1)

    def test_weights_reproduce_derivative(self, cfg):
        N, lam = 64, 0.25
        m = cylinder_level(N, lam)
        A = cell_weights(N, lam, cfg.rho, m, depth=16)
        signs = draw_gbm_signs(N, cfg.theta2, 5)
        phi = Observable([GbmComponent(N, cfg.theta1, cfg.theta2, cfg.rho, signs)])
        direct = response(phi, lam, order=1, depth=16).h_prime.value
        assert N ** cfg.theta1 * float(A.sum(axis=0) @ signs) == pytest.approx(direct, rel=1e-12, abs=1e-15)

    def test_minus_cylinders_vanish(self, cfg):
        A = cell_weights(256, 0.25, cfg.rho, 4, depth=16)
        assert np.all(A[:8] == 0) and np.any(A[8:] != 0)

    def test_weight_table_cap(self, cfg):
        with pytest.raises(ResourceError):
            cell_weights(1 << 20, 0.25, cfg.rho, 10, depth=16)

    def test_lambda_window(self, cfg):
        with pytest.raises(DomainError):
            derivative_event_stats(256, cfg, 0.45, n_seeds=4)

    def test_stats_at_1024(self, cfg):
        r = derivative_event_stats(1024, cfg, 0.25, n_seeds=200, seed=0)
        assert r.mean_within_4se
        assert r.var_mean == pytest.approx(r.var_exact_mean, rel=0.2)
        assert r.holder_event_freq >= 0.9
        assert r.holder_upper_freq <= r.holder_event_freq

    def test_reproducible(self, cfg):
        a = derivative_event_stats(256, cfg, 0.25, n_seeds=20, seed=3, holder=False)
        b = derivative_event_stats(256, cfg, 0.25, n_seeds=20, seed=3, holder=False)
        assert a.derivatives == b.derivatives

    def test_variance_slope(self, cfg):
        v = variance_scaling(cfg, 0.25, n_seeds=200, seed=0)
        assert v.relative_error <= 0.2
        assert abs(v.slope_exact - v.target) / abs(v.target) <= 0.2


class TestDemo:
    def test_ladder_uses_eps_star(self, cfg):
        Ns, eps = demo_ladder(cfg, 3)
        assert Ns == [10, 40, 160]
        assert eps[1] == pytest.approx(float(eps_star(cfg, 40)), rel=1e-15)

    def test_scan_identity(self, cfg):
        table, info = demo_scan(cfg, 0.25, 3, seed=0, depth=16)
        for row, layer in zip(table.rows, info):
            assert row.identity_residual <= 1e-10
            assert abs(row.S) <= row.S_bound
            assert abs(row.T - layer.derivative) <= 1e-6 * (1 + abs(layer.derivative))
            if layer.event:
                assert abs(row.T) >= layer.T_floor
