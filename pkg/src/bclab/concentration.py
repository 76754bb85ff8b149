"""Empirical audits of the Azuma-Hoeffding and Berry-Esseen inequalities.

The walk ensembles draw their signs as packed random bits (one Philox block
per 2^16 trials, keyed by the block index) and count ones with
``np.bitwise_count``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ArgumentError
from .observables import gbm_probability, make_bump

BLOCK = 1 << 16


def _gen(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(block),))))


def rademacher_walk_ends(n_steps, n_trials, seed):
    """S_N = sum of n_steps independent +-1 signs, for n_trials keyed walks."""
    n_steps, n_trials = int(n_steps), int(n_trials)
    if n_steps < 1 or n_trials < 1:
        raise ArgumentError("n_steps and n_trials must be positive")
    words = -(-n_steps // 64)
    spare = words * 64 - n_steps
    out = np.empty(n_trials, dtype=np.int64)
    for b, start in enumerate(range(0, n_trials, BLOCK)):
        k = min(BLOCK, n_trials - start)
        bits = _gen(seed, b).integers(0, 1 << 64, size=(k, words), dtype=np.uint64, endpoint=False)
        if spare:
            bits[:, -1] >>= np.uint64(spare)
        ones = np.bitwise_count(bits).sum(axis=1, dtype=np.int64)
        out[start:start + k] = 2 * ones - n_steps
    return out


def binomial_two_sided_tail(n_steps, threshold):
    """Exact P(|S_N| >= threshold) for the simple +-1 walk."""
    t = math.ceil((n_steps + threshold) / 2.0)  # ones needed for S >= threshold
    upper = stats.binom.sf(t - 1, n_steps, 0.5)
    if threshold <= 0:
        return 1.0
    return float(min(1.0, 2.0 * upper))


@dataclass(frozen=True)
class AuditReport:
    kind: str
    params: dict
    n_trials: int
    seed: int
    empirical: float
    bound: float
    passed: bool
    classical_bound: float | None = None
    classical_passed: bool | None = None
    oracle: float | None = None
    oracle_sigma: float | None = None
    oracle_agrees: bool | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        d = dict(self.__dict__)
        d["params"] = dict(self.params)
        d["details"] = dict(self.details)
        return d


def azuma_audit(n_steps=100, threshold=30.0, n_trials=10 ** 6, seed=0) -> AuditReport:
    """Tail frequency of the +-1 walk against 2 exp(-t^2 / sum c_k^2) and the classical 2 exp(-t^2 / (2 sum c_k^2)).

    The exact binomial tail is the oracle; agreement means within 3 binomial
    standard errors.
    """
    threshold = float(threshold)
    if threshold < 0:
        raise ArgumentError("threshold must be >= 0")
    s = rademacher_walk_ends(n_steps, n_trials, seed)
    freq = float(np.mean(np.abs(s) >= threshold))
    var_sum = float(n_steps)  # c_k = 1
    printed = 2.0 * math.exp(-threshold ** 2 / var_sum)
    classical = 2.0 * math.exp(-threshold ** 2 / (2.0 * var_sum))
    exact = binomial_two_sided_tail(n_steps, threshold)
    sigma = math.sqrt(max(exact * (1.0 - exact), 0.0) / n_trials)
    agrees = abs(freq - exact) <= 3.0 * sigma if sigma > 0 else freq == exact
    return AuditReport("azuma", {"n_steps": int(n_steps), "threshold": threshold}, int(n_trials), int(seed),
                       freq, printed, freq <= printed, classical, freq <= classical, exact, sigma, bool(agrees))


def berry_esseen_audit(n_summands=100, n_intervals=1000, n_trials=10 ** 6, seed=0, c=1.0,
                       span=None) -> AuditReport:
    """sup over random intervals I of |P(S in I) - G(I)| against c sum gamma_i / Var^(3/2).

    S is a sum of Rademacher signs (gamma_i = 1, Var = n). Interval endpoints
    are uniform on [-span, span] (default 3 sd), drawn from the keyed stream
    one past the walk blocks. The exact lattice discrepancy is reported too.
    """
    n = int(n_summands)
    s = np.sort(rademacher_walk_ends(n, n_trials, seed))
    sd = math.sqrt(n)
    span = 3.0 * sd if span is None else float(span)
    n_blocks = -(-int(n_trials) // BLOCK)
    ends = np.sort(_gen(seed, n_blocks).uniform(-span, span, size=(int(n_intervals), 2)), axis=1)
    lo, hi = ends[:, 0], ends[:, 1]
    emp = (np.searchsorted(s, hi, side="right") - np.searchsorted(s, lo, side="left")) / s.size
    gauss = stats.norm.cdf(hi, scale=sd) - stats.norm.cdf(lo, scale=sd)
    # exact law of S on the lattice -n, -n+2, ..., n
    k_hi = np.floor((hi + n) / 2.0)
    k_lo = np.ceil((lo + n) / 2.0)
    exact = stats.binom.cdf(k_hi, n, 0.5) - stats.binom.cdf(k_lo - 1, n, 0.5)
    disc = float(np.max(np.abs(emp - gauss)))
    lattice = float(np.max(np.abs(exact - gauss)))
    bound = float(c) * n / n ** 1.5
    sampling = float(np.max(np.abs(emp - exact)))
    sigma = 0.5 / math.sqrt(n_trials)
    return AuditReport("berry_esseen", {"n_summands": n, "n_intervals": int(n_intervals), "c": float(c),
                                        "span": span},
                       int(n_trials), int(seed), disc, bound, disc <= bound,
                       oracle=lattice, oracle_sigma=sigma,
                       oracle_agrees=bool(sampling <= 5.0 * sigma),
                       details={"max_empirical_vs_exact": sampling})


def gbm_walk_ends(N, theta1, theta2, rho, n_trials, seed):
    """Running maxima and end values of the cell-increment martingale S_j = phi_N(2j/N)."""
    p = gbm_probability(N, theta2)
    step = float(N) ** (theta1 - 1.0) * make_bump(rho).integral
    sup = np.empty(n_trials)
    end = np.empty(n_trials)
    for b, start in enumerate(range(0, n_trials, 256)):
        k = min(256, n_trials - start)
        u = _gen(seed, b).random((k, int(N)))
        s = np.where(u < p, step, np.where(u < 2 * p, -step, 0.0))
        walk = np.cumsum(s, axis=1)
        sup[start:start + k] = np.max(np.abs(walk), axis=1)
        end[start:start + k] = walk[:, -1]
    return sup, end, step


def gbm_sup_audit(N, theta1, theta2, rho, beta, two_u, n_trials=2000, seed=0) -> AuditReport:
    """P(|phi_N|_C0 > N^-beta / 2) against N exp(-N^(2u) / 8).

    |phi_N|_C0 is the running max of the cell martingale: phi_N is monotone
    inside each cell. The per-step bound uses the actual increment size
    N^(theta1-1) * integral(g_rho), which is close to 2 N^(theta1-1).
    """
    sup, end, step = gbm_walk_ends(N, theta1, theta2, rho, int(n_trials), seed)
    thr = 0.5 * float(N) ** (-beta)
    freq = float(np.mean(sup > thr))
    bound = float(N) * math.exp(-float(N) ** two_u / 8.0)
    azuma_end = 2.0 * math.exp(-thr ** 2 / (N * step ** 2))
    return AuditReport("gbm_sup", {"N": int(N), "theta1": theta1, "theta2": theta2, "beta": beta,
                                   "two_u": two_u},
                       int(n_trials), int(seed), freq, bound, freq <= bound,
                       details={"threshold": thr, "step": step, "max_sup": float(sup.max()),
                                "end_tail_freq": float(np.mean(np.abs(end) >= thr)),
                                "end_azuma_bound": azuma_end})


def concentration_audit(kind, params=None, n_trials=10 ** 6, seed=0) -> AuditReport:
    params = dict(params or {})
    if kind == "azuma":
        return azuma_audit(n_trials=n_trials, seed=seed, **params)
    if kind in ("berry_esseen", "berry-esseen"):
        return berry_esseen_audit(n_trials=n_trials, seed=seed, **params)
    if kind in ("gbm_sup", "gbm-sup"):
        return gbm_sup_audit(n_trials=n_trials, seed=seed, **params)
    raise ArgumentError(f"unknown audit kind {kind!r}")
