"""Adapted pairs ({N_k}, {eps_k}) and statistics of generalized Brownian motions.

Scales grow doubly exponentially, so N_k (k >= 2) is kept as an exact power
of two and eps_k as an mpmath float; nothing here ever forms N_k as a double.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import mpmath
import numpy as np

from .errors import ArgumentError, DomainError, RangeError, ResourceError
from .measure import check_depth, rho_prime_adapted
from .observables import GbmComponent, Observable, draw_gbm_signs, gbm_probability, holder_norm_estimate, make_bump
from .symbolic import check_lambda, iter_word_blocks, series_coefficients

N_FIRST = 10
MAX_SCALE_BITS = 1 << 24
MAX_K = 6
MP_PREC = 256


@dataclass(frozen=True)
class AdaptedPairConfig:
    delta: float
    alpha: float
    theta1: float
    theta2: float
    beta: float
    rho_prime: float
    one_minus_rho: float
    two_u: float
    tau: float
    bump_c2: float
    N: tuple = ()
    eps: tuple = ()

    @property
    def rho(self):
        return 1.0 - self.one_minus_rho

    @property
    def log2_N(self):
        return tuple(math.log2(n) if n.bit_length() < 1000 else float(n.bit_length() - 1) for n in self.N)

    def to_dict(self):
        d = {k: getattr(self, k) for k in ("delta", "alpha", "theta1", "theta2", "beta", "rho_prime",
                                           "one_minus_rho", "two_u", "tau", "bump_c2")}
        d["log2_N"] = list(self.log2_N)
        d["eps"] = [mpmath.nstr(e, 17) for e in self.eps]
        return d


def adapted_params(delta, alpha, theta1=None, theta2=None, beta=None) -> AdaptedPairConfig:
    """Exponents satisfying the three strict inequalities of the construction.

    Defaults: theta1 = (1 - alpha)/8, beta = theta1/2 and theta2 half of
    -log_{1/2-delta} 2. Overrides are accepted but must keep 2u > 0,
    beta < theta1 and tau > 0.

    Raises:
        DomainError: delta outside (0, 1/4) or alpha outside (0, 1).
        ArgumentError: overridden exponents violate an inequality.
    """
    delta, alpha = float(delta), float(alpha)
    if not 0.0 < delta < 0.25:
        raise DomainError("delta must lie in (0, 1/4)")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    log_base = -math.log(2.0) / math.log(0.5 - delta)  # -log_{1/2-delta} 2 > 0
    theta1 = (1.0 - alpha) / 8.0 if theta1 is None else float(theta1)
    beta = theta1 / 2.0 if beta is None else float(beta)
    theta2 = 0.5 * log_base if theta2 is None else float(theta2)
    two_u = 1.0 - 2.0 * theta1 - 2.0 * (alpha * theta1 + beta) / (1.0 - alpha)
    tau = log_base - theta2
    if min(theta1, theta2, beta) <= 0:
        raise ArgumentError("theta1, theta2 and beta must be positive")
    if two_u <= 0:
        raise ArgumentError(f"2u = {two_u} must be positive")
    if not beta < theta1:
        raise ArgumentError("need beta < theta1")
    if tau <= 0:
        raise ArgumentError(f"tau = {tau} must be positive")
    rp = rho_prime_adapted(delta)
    omr = delta * rp / (100.0 * (2.0 - rp))
    c2 = make_bump(1.0 - omr).c2_norm
    return AdaptedPairConfig(delta, alpha, theta1, theta2, beta, rp, omr, two_u, tau, c2)


def eps_star(config, N):
    """(1/500) N^(beta - 2 - theta1) / ||g_rho||_C2 as an mpmath float."""
    with mpmath.workprec(MP_PREC):
        return mpmath.power(mpmath.mpf(N), config.beta - 2 - config.theta1) / (500 * mpmath.mpf(config.bump_c2))


def _log2_int(n):
    return mpmath.log(mpmath.mpf(n), 2)


def adapted_pair_build(config: AdaptedPairConfig, k_max: int) -> AdaptedPairConfig:
    """N_1 = 10, then alternately the smallest power of two obeying the growth rules and eps_* at it.

    Raises:
        ArgumentError: k_max < 1.
        RangeError: some N_k would need more than 2^24 bits; carries the largest feasible k.
    """
    k_max = int(k_max)
    if k_max < 1:
        raise ArgumentError("k_max must be >= 1")
    b, t1 = config.beta, config.theta1
    with mpmath.workprec(MP_PREC):
        Ns = [N_FIRST]
        logs = [mpmath.log(N_FIRST, 2)]
        eps = [eps_star(config, N_FIRST)]
        geo = mpmath.log(1 - mpmath.power(2, -b), 2)
        for k in range(2, k_max + 1):
            s = mpmath.log(mpmath.fsum(mpmath.power(2, t1 * L) for L in logs), 2)
            r_sum = 2 * s / b
            r_double = logs[-1] + 1
            r_tail = (-mpmath.log(eps[-1] / 100, 2) - geo) / b
            e = int(mpmath.floor(max(r_sum, r_double, r_tail))) + 1
            if e > MAX_SCALE_BITS:
                raise RangeError(f"N_{k} needs 2^{e} > 2^{MAX_SCALE_BITS}: beyond representable range",
                                 largest_feasible=k - 1)
            Ns.append(1 << e)
            logs.append(mpmath.mpf(e))
            eps.append(mpmath.power(2, e * (b - 2 - t1)) / (500 * mpmath.mpf(config.bump_c2)))
    return replace(config, N=tuple(Ns), eps=tuple(eps))


# ---------------------------------------------------------------------------
# derivative statistics
# ---------------------------------------------------------------------------

def cylinder_level(N, lam):
    """m with 2 lam^m (1-2lam)/(1-lam) < 2/N <= 2 lam^(m-1) (1-2lam)/(1-lam)."""
    lam = check_lambda(lam)
    if lam >= 0.5:
        raise DomainError("cylinder level needs lambda < 1/2")
    c = (1.0 - 2.0 * lam) / (1.0 - lam)
    m = 1
    while lam ** m * c >= 1.0 / N:
        m += 1
    return m


def cell_weights(N, lam, rho, m, depth=20):
    """A[l, j] = E[g_rho(N X - 2j) X1 ; cylinder l, cell j] over the depth-truncated words.

    Cylinders are level-m words in index order (first letter most significant,
    bit 1 meaning +); cells are [2j/N, 2(j+1)/N]. Then D_l = N^theta1 sum_j s_j A[l, j].

    Raises:
        ResourceError: 2^m N > 2^26 or depth too large.
    """
    depth = check_depth(depth)
    N = int(N)
    if m > depth:
        raise ArgumentError("cylinder level exceeds enumeration depth")
    if (N << m) > 1 << 26:
        raise ResourceError("weight table 2^m x N exceeds 2^26 entries")
    g = make_bump(rho).g
    coef = series_coefficients(lam, depth)[:2]
    acc = np.zeros((1 << m) * N)
    shift = depth - m
    for blk in iter_word_blocks(coef):
        x, x1 = blk.values
        y = N * x / 2.0
        j = np.floor(y)
        inside = (j >= 0) & (j < N)
        if not inside.any():
            continue
        idx = np.arange(blk.start, blk.start + blk.size)[inside] >> shift
        jj = j[inside].astype(np.int64)
        w = g(2.0 * (y[inside] - jj)) * x1[inside]
        acc += np.bincount(idx * N + jj, weights=w, minlength=acc.size)
    return np.ldexp(acc, -depth).reshape(1 << m, N)


def _signs_matrix(N, theta2, n_seeds, seed):
    return np.vstack([draw_gbm_signs(N, theta2, seed, stream=i) for i in range(n_seeds)]).astype(np.float64)


@dataclass(frozen=True)
class DerivativeEventReport:
    N: int
    lam: float
    m: int
    n_seeds: int
    seed: int
    depth: int
    max_mean_over_se: float
    mean_within_4se: bool
    var_mean: float
    var_exact_mean: float
    var_normalized: float
    third_over_var: float
    be_ratio: float
    be_trend: float
    derivative_event_freq: float
    holder_event_freq: float | None
    holder_upper_freq: float | None
    joint_event_freq: float | None
    holder_norms: tuple = field(default=(), repr=False)
    derivatives: tuple = field(default=(), repr=False)


def derivative_event_stats(N, config: AdaptedPairConfig, lam, n_seeds=200, seed=0, depth=20,
                           holder=True, grid=1 << 14) -> DerivativeEventReport:
    """Per-cylinder D_l statistics of phi_N at lam over n_seeds keyed draws.

    Moments use the cylinders whose first letter is +; the others lie left of 0
    where phi_N' vanishes, so their D_l is identically 0.

    Raises:
        DomainError: lam outside (delta, 1/2 - delta).
        ResourceError: enumeration or table too large.
    """
    lam = float(lam)
    if not config.delta < lam < 0.5 - config.delta:
        raise DomainError(f"lambda must lie in ({config.delta}, {0.5 - config.delta})")
    N = int(N)
    if n_seeds < 2:
        raise ArgumentError("need at least 2 seeds")
    p = gbm_probability(N, config.theta2)
    m = cylinder_level(N, lam)
    A = cell_weights(N, lam, config.rho, m, depth)
    S = _signs_matrix(N, config.theta2, n_seeds, seed)
    amp = float(N) ** config.theta1
    D = amp * (S @ A.T)
    plus = D[:, 1 << (m - 1):]
    mean = plus.mean(axis=0)
    sd = plus.std(axis=0, ddof=1)
    se = sd / math.sqrt(n_seeds)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(se > 0, np.abs(mean) / se, np.where(mean == 0, 0.0, np.inf))
    var = sd ** 2
    var_exact = 2.0 * p * amp ** 2 * (A[1 << (m - 1):] ** 2).sum(axis=1)
    third = np.mean(np.abs(plus) ** 3, axis=0)
    total = D.sum(axis=1)
    thr = float(N) ** config.beta
    deriv_ok = np.abs(total) >= thr
    h_freq = h_up = joint = None
    norms = ()
    if holder:
        bound = float(N) ** (-config.beta)
        meas, up = [], []
        for i in range(n_seeds):
            comp = GbmComponent(N, config.theta1, config.theta2, config.rho, S[i].astype(np.int8))
            est = holder_norm_estimate(Observable([comp]), config.alpha, grid, (0.0, 2.0))
            meas.append(est.sup_grid + est.lower_estimate)
            up.append(est.upper_bound)
        meas, up = np.array(meas), np.array(up)
        h_freq = float(np.mean(meas <= bound))
        h_up = float(np.mean(up <= bound))
        joint = float(np.mean((meas <= bound) & deriv_ok))
        norms = tuple(meas.tolist())
    return DerivativeEventReport(
        N, lam, m, int(n_seeds), int(seed), depth,
        float(ratio.max()), bool(np.all(ratio <= 4.0)),
        float(var.mean()), float(var_exact.mean()), float(var.mean() * 4.0 ** m),
        float(np.mean(third) / np.mean(var) ** 1.5) if var.mean() > 0 else float("nan"),
        float(third.sum() / var.sum() ** 1.5) if var.sum() > 0 else float("nan"),
        2.0 ** (-m / 2.0) * float(N) ** (config.theta2 / 2.0),
        float(deriv_ok.mean()), h_freq, h_up, joint, norms, tuple(total.tolist()),
    )


@dataclass(frozen=True)
class VarianceScaling:
    exponents: tuple
    levels: tuple
    var_normalized: tuple
    var_exact_normalized: tuple
    slope: float
    slope_exact: float
    target: float
    relative_error: float
    reports: tuple = field(default=(), repr=False)


def variance_scaling(config, lam, exponents=range(8, 13), n_seeds=200, seed=0, depth=20) -> VarianceScaling:
    """Slope of log(4^m Var D_l) against log N over N = 2^e.

    The 4^m factor removes the cylinder mass 2^-m entering D_l squared, so the
    slope estimates 2 theta1 - theta2.
    """
    reps = [derivative_event_stats(1 << e, config, lam, n_seeds, seed, depth, holder=False) for e in exponents]
    logn = np.log([float(r.N) for r in reps])
    v = np.array([r.var_normalized for r in reps])
    ve = np.array([r.var_exact_mean * 4.0 ** r.m for r in reps])
    slope = float(np.polyfit(logn, np.log(v), 1)[0])
    slope_e = float(np.polyfit(logn, np.log(ve), 1)[0])
    target = 2.0 * config.theta1 - config.theta2
    return VarianceScaling(tuple(exponents), tuple(r.m for r in reps), tuple(v.tolist()), tuple(ve.tolist()),
                           slope, slope_e, target, abs(slope - target) / abs(target), tuple(reps))


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionCheck:
    n: int
    lhs_log2: float
    rhs_log2: float
    ok: bool | None
    note: str = ""


@dataclass(frozen=True)
class AdaptedPairReport:
    k_max: int
    growth: tuple
    condition2: tuple
    condition3: tuple
    condition4: tuple
    empirical: tuple
    deterministic_ok: bool
    eps_star_ok: bool

    @property
    def passed(self):
        return self.deterministic_ok and self.eps_star_ok


def _mlog2(x):
    return float(mpmath.log(x, 2)) if x > 0 else float("-inf")


def adapted_pair_verify(config: AdaptedPairConfig, n_seeds=200, seed=0, lam=0.25, depth=20,
                        empirical_max_N=1 << 12) -> AdaptedPairReport:
    """Recheck the deterministic conditions from the integers and the recorded eps.

    Condition (2) and the growth N_k > 2 N_{k-1} use exact integers and high
    precision logarithms. Condition (4) is checked for n < k_max with the tail
    beyond the last built scale bounded by the geometric majorant that doubling
    guarantees. Condition (3) compares eps_n with the eps_* bound recomputed in
    log form. Condition (1) is sampled for every scale small enough to simulate.
    """
    Ns, eps = list(config.N), list(config.eps)
    if not Ns:
        raise ArgumentError("config has no scales; build it first")
    k_max = len(Ns)
    b, t1 = config.beta, config.theta1
    growth = tuple(bool(Ns[i] > 2 * Ns[i - 1]) for i in range(1, k_max))
    c2, c3, c4 = [], [], []
    with mpmath.workprec(MP_PREC):
        logs = [_log2_int(n) for n in Ns]
        for n in range(2, k_max + 1):
            lhs = mpmath.log(mpmath.fsum(mpmath.power(2, t1 * L) for L in logs[:n - 1]), 2)
            rhs = (b / 2) * logs[n - 1]
            c2.append(ConditionCheck(n, float(lhs), float(rhs), bool(lhs < rhs)))
        for n in range(1, k_max + 1):
            bound_log = (b - 2 - t1) * logs[n - 1] - mpmath.log(500 * mpmath.mpf(config.bump_c2), 2)
            e_log = mpmath.log(eps[n - 1], 2)
            c3.append(ConditionCheck(n, float(e_log), float(bound_log), bool(e_log <= bound_log + mpmath.mpf(2) ** -100)))
        ratio = mpmath.power(2, -b)
        for n in range(1, k_max + 1):
            if n == k_max:
                c4.append(ConditionCheck(n, float("nan"), _mlog2(eps[n - 1] / 100), None,
                                         "needs N_{k+1}; holds by the tail rule when the ladder is extended"))
                continue
            terms = [mpmath.power(2, -b * L) for L in logs[n:]]
            tail = terms[-1] * ratio / (1 - ratio)
            lhs = mpmath.fsum(terms) + tail
            rhs = eps[n - 1] / 100
            c4.append(ConditionCheck(n, _mlog2(lhs), _mlog2(rhs), bool(lhs <= rhs)))
    empirical = []
    for k, n in enumerate(Ns, start=1):
        if n <= empirical_max_N:
            empirical.append((k, derivative_event_stats(n, config, lam, n_seeds, seed, depth)))
    det = all(growth) and all(c.ok for c in c2) and all(c.ok for c in c4 if c.ok is not None)
    return AdaptedPairReport(k_max, growth, tuple(c2), tuple(c3), tuple(c4), tuple(empirical),
                             bool(det), all(c.ok for c in c3))


# ---------------------------------------------------------------------------
# a simulable ladder for the S + T + R decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DemoLayer:
    k: int
    N: int
    eps: float
    derivative: float
    holder_norm: float
    event: bool
    T_floor: float


def demo_ladder(config, k_max=3):
    """N_k = 10 * 4^(k-1) with eps_k = eps_*(N_k): same step rule, scales small enough to enumerate."""
    Ns = [N_FIRST * 4 ** (k - 1) for k in range(1, k_max + 1)]
    return Ns, [float(eps_star(config, n)) for n in Ns]


def demo_scan(config, lam=0.25, k_max=3, seed=0, depth=20, grid=1 << 14):
    """Blow-up scan of sum_k phi_{N_k} over the demo ladder, with each layer's event check.

    Returns (ScanTable, layers info). T_floor is 99/100 N_k^beta, the lower
    bound on |T_k| for layers whose event holds.
    """
    from .response import blowup_scan, response

    Ns, eps = demo_ladder(config, k_max)
    comps, info = [], []
    for k, (n, e) in enumerate(zip(Ns, eps), start=1):
        signs = draw_gbm_signs(n, config.theta2, seed, stream=k)
        comp = GbmComponent(n, config.theta1, config.theta2, config.rho, signs)
        layer = Observable([comp])
        comps.append(layer)
        der = response(layer, lam, order=1, depth=depth).h_prime.value
        est = holder_norm_estimate(layer, config.alpha, grid, (0.0, 2.0))
        hn = est.sup_grid + est.lower_estimate
        ev = bool(hn <= n ** -config.beta and abs(der) >= n ** config.beta)
        info.append(DemoLayer(k, n, e, der, hn, ev, 0.99 * n ** config.beta))
    phi = Observable([c for layer in comps for c in layer.components])
    table = blowup_scan(phi, lam, eps, depth, layers=comps, scales=Ns, beta=config.beta)
    return table, info
