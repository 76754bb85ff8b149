"""Integrals against the Bernoulli convolution mu_lambda.

Exact mode averages over all 2^D truncated sign words (tail set to zero) and
sums the values with ``math.fsum``, so the result is correctly rounded and
does not depend on the enumeration order. Monte Carlo draws 64-letter words
from keyed Philox substreams, one per block of 2^16 samples.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ArgumentError, DomainError, NumericError, ResourceError
from .symbolic import (
    Cylinder, check_lambda, cylinder_of, iter_word_blocks, series_coefficients, support_radius, tail_bounds,
)

MAX_EXACT_DEPTH = 26
MC_DEPTH = 64
MC_BLOCK = 1 << 16
MC_MIN_SAMPLES = 100
FRONTIER_CAP = 1 << 20


@dataclass(frozen=True)
class ExpectationResult:
    value: float
    error_bound: float
    method: str  # "exact-enumeration" | "monte-carlo"
    samples_or_depth: int
    seed: int | None = None
    std: float | None = None


# ---------------------------------------------------------------------------
# truncation error
# ---------------------------------------------------------------------------

def sampled_modulus(f, delta, lo, hi, grid=1 << 14):
    """Dense-sampling estimate of sup |f(x) - f(y)| over |x - y| <= delta, inflated by 2."""
    x = np.linspace(lo, hi, grid + 1)
    h = (hi - lo) / grid
    y = f(x)
    steps = max(1, int(math.ceil(delta / h)))
    if steps > grid:
        return 2.0 * float(np.ptp(y))
    best = 0.0
    for s in range(1, steps + 1):
        best = max(best, float(np.max(np.abs(y[s:] - y[:-s]))))
    return 2.0 * best + 2.0 * float(np.max(np.abs(np.diff(y))))


def truncation_error(phi, lam, depth):
    """Bound on |E phi(X) - E phi(X_D)| when the tail after D letters is dropped.

    The dropped tail R is independent of the head, symmetric, and
    E R^2 = lam^(2D) / (1 - lam^2). For C2 observables a second-order Taylor
    bound sup|phi''| E R^2 / 2 applies; otherwise (and when smaller) the
    Hoelder or Lipschitz bound on |R| <= lam^D / (1 - lam) is used.
    """
    t0 = tail_bounds(lam, depth)[0]
    r = support_radius(lam)
    bounds = []
    hold = phi.holder()
    if hold is not None:
        alpha, c = hold
        bounds.append(c * t0 ** alpha)
    else:
        try:
            bounds.append(phi.modulus(t0, -r, r, 0))
        except Exception:  # no declared modulus: fall back to sampling
            bounds.append(sampled_modulus(phi.value, t0, -r - t0, r + t0))
    if phi.smooth_order >= 2:
        second = lam ** (2 * depth) / (1.0 - lam * lam)
        bounds.append(0.5 * phi.sup_abs(2, -r, r) * second)
    return float(min(bounds))


def rounding_error(phi, lam):
    """Allowance for floating-point evaluation of phi on the support (0 for constants)."""
    r = support_radius(lam)
    try:
        if phi.smooth_order >= 1 and phi.sup_abs(1, -r, r) == 0.0:
            return 0.0
        return 16.0 * np.finfo(float).eps * phi.sup_abs(0, -r, r)
    except Exception:
        return 0.0


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

def check_depth(depth):
    depth = int(depth)
    if depth < 1:
        raise ArgumentError("depth must be >= 1")
    if depth > MAX_EXACT_DEPTH:
        raise ResourceError(f"depth {depth} exceeds the 2^{MAX_EXACT_DEPTH} word cap")
    return depth


def word_average(coef, integrand, chunk_words=1 << 18):
    """Correctly rounded mean of integrand(values) over all sign words.

    ``coef`` has one row per series (e.g. X, X1) and D columns;
    ``integrand`` maps an (r, n) array to n values.
    """
    coef = np.atleast_2d(coef)
    depth = coef.shape[1]
    bad = []

    def chunks():
        for blk in iter_word_blocks(coef, chunk_words):
            v = np.asarray(integrand(blk.values), dtype=np.float64)
            if not np.all(np.isfinite(v)):
                bad.append(blk.start)
                return
            yield v.tolist()

    total = math.fsum(itertools.chain.from_iterable(chunks()))
    if bad:
        raise NumericError(f"non-finite integrand values in the block starting at word {bad[0]}")
    return math.ldexp(total, -depth)


def exact_expectation(phi, lam, depth=22) -> ExpectationResult:
    """E phi(X) over all 2^depth truncated words.

    Raises:
        ResourceError: depth > 26.
        NumericError: phi returned a non-finite value.
    """
    lam = check_lambda(lam)
    depth = check_depth(depth)
    coef = series_coefficients(lam, depth)[:1]
    value = word_average(coef, lambda v: phi.value(v[0]))
    err = truncation_error(phi, lam, depth) + rounding_error(phi, lam)
    return ExpectationResult(value, err, "exact-enumeration", depth)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def block_generator(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(block),))))


def mc_series(lam, n, seed, rows=(0,), depth=MC_DEPTH):
    """Yield (r, m) arrays of series values for n random words, block by block."""
    coef = series_coefficients(lam, depth)[list(rows)]
    coef = np.hstack([coef, np.zeros((coef.shape[0], 64 - depth))]) if depth < 64 else coef
    for b, start in enumerate(range(0, n, MC_BLOCK)):
        m = min(MC_BLOCK, n - start)
        bits = block_generator(seed, b).integers(0, 1 << 64, size=m, dtype=np.uint64, endpoint=False)
        yield kernels.bit_signed_sums(bits, coef)


def mc_average(lam, n, seed, integrand, rows=(0,)):
    """Mean and sample standard deviation of integrand over n random words (Chan's merge)."""
    n = int(n)
    if n < MC_MIN_SAMPLES:
        raise ArgumentError(f"n must be at least {MC_MIN_SAMPLES}")
    count, mean, m2 = 0, 0.0, 0.0
    for vals in mc_series(lam, n, seed, rows):
        v = np.asarray(integrand(vals), dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise NumericError("non-finite integrand values in Monte Carlo block")
        k = v.shape[0]
        bm = math.fsum(v.tolist()) / k
        bm2 = math.fsum(((v - bm) ** 2).tolist())
        delta = bm - mean
        tot = count + k
        mean += delta * k / tot
        m2 += bm2 + delta * delta * count * k / tot
        count = tot
    sd = math.sqrt(m2 / (count - 1))
    return mean, sd


def mc_expectation(phi, lam, n, seed) -> ExpectationResult:
    """E phi(X) by Monte Carlo; error_bound = 4 * sd / sqrt(n).

    Raises:
        ArgumentError: n < 100.
    """
    lam = check_lambda(lam)
    mean, sd = mc_average(lam, n, seed, lambda v: phi.value(v[0]))
    tail = truncation_error(phi, lam, MC_DEPTH)
    return ExpectationResult(mean, 4.0 * sd / math.sqrt(n) + tail, "monte-carlo", int(n), int(seed), sd)


def expectation(phi, lam, depth=22, mode="exact", n=None, seed=0):
    if mode == "exact":
        return exact_expectation(phi, lam, depth)
    if mode in ("mc", "monte-carlo"):
        return mc_expectation(phi, lam, n or 1 << 20, seed)
    raise ArgumentError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# interval masses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalMassBounds:
    lower: float
    upper: float
    level: int


def interval_mass_bounds(lam, interval, level, tol=1e-13) -> IntervalMassBounds:
    """Cylinder-counting bounds on mu_lambda(interval).

    Refines only cylinders that straddle an endpoint. Overlaps of at most
    ``tol`` (relative to the support radius) count as touching, which removes
    rounding noise at shared endpoints. For lambda >= 1/2 the straddling
    frontier can grow exponentially; refinement stops at 2^20 cylinders and
    the bounds are reported at the level reached.

    Raises:
        ResourceError: level > 26.
    """
    lam = check_lambda(lam)
    level = int(level)
    if level < 0:
        raise ArgumentError("level must be >= 0")
    if level > MAX_EXACT_DEPTH:
        raise ResourceError(f"level {level} exceeds {MAX_EXACT_DEPTH}")
    lo, hi = float(interval[0]), float(interval[1])
    if hi < lo:
        raise ArgumentError("interval must have lo <= hi")
    eps = tol * support_radius(lam)
    centers = np.zeros(1)
    inside = 0
    m = 0
    while True:
        half = lam ** m / (1.0 - lam)
        clo, chi = centers - half, centers + half
        contained = (clo >= lo - eps) & (chi <= hi + eps)
        meets = (clo < hi - eps) & (chi > lo + eps)
        partial = meets & ~contained
        inside = 2 * inside + int(np.count_nonzero(contained))
        frontier = centers[partial]
        if m == level or frontier.size * 2 > FRONTIER_CAP:
            straddle = frontier.size
            break
        step = lam ** m
        centers = np.concatenate([frontier - step, frontier + step])
        m += 1
    scale = 2.0 ** -m
    return IntervalMassBounds(inside * scale, (inside + straddle) * scale, m)


# ---------------------------------------------------------------------------
# small unions inside a cylinder
# ---------------------------------------------------------------------------

def small_union_constants(delta):
    """L = floor(1/(2 delta)) + 1, l = floor(log2(4L)) + 1, rho' = L delta^l / 2."""
    L = int(math.floor(1.0 / (2.0 * delta))) + 1
    l = int(math.floor(math.log2(4 * L))) + 1
    return L, l, 0.5 * L * delta ** l


def rho_prime_adapted(delta):
    """The closed-form variant used in the adapted-pair construction."""
    return 0.5 * (1.0 / (2.0 * delta) + 1.0) * delta ** (math.log2(2.0 / delta + 4.0) + 1.0)


@dataclass(frozen=True)
class SmallUnionReport:
    hypothesis_met: bool
    reason: str
    L: int
    l: int
    rho_prime: float
    total_length: float
    length_budget: float
    check_level: int | None
    mass_upper: float | None
    half_cylinder_mass: float
    verdict: bool | None


def small_union_check(delta, lam, base, pieces, slack=2) -> SmallUnionReport:
    """Check mu(Q) <= mu(C)/2 for a short union Q of intervals inside a cylinder C.

    ``base`` is a :class:`Cylinder` or a sign word. The length budget is
    rho' lam^m / (1 - lam). Violated hypotheses are reported, not raised.
    """
    L, l, rp = small_union_constants(delta)
    if not isinstance(base, Cylinder):
        base = cylinder_of(lam, base)
    m = base.level
    pieces = [(float(a), float(b)) for a, b in pieces]
    total = math.fsum(b - a for a, b in pieces)
    budget = rp * lam ** m / (1.0 - lam)
    half_mass = 0.5 * 2.0 ** -m
    reason = ""
    if not 0.0 < delta < 0.25:
        reason = "delta outside (0, 1/4)"
    elif not delta < lam < 0.5 - delta:
        reason = "lambda outside (delta, 1/2 - delta)"
    elif len(pieces) > L:
        reason = f"more than L={L} intervals"
    elif any(b < a for a, b in pieces):
        reason = "interval with hi < lo"
    elif any(a < base.lo or b > base.hi for a, b in pieces):
        reason = "interval not inside the base cylinder"
    elif not total < budget:
        reason = "total length not below rho' |C|"
    if reason:
        return SmallUnionReport(False, reason, L, l, rp, total, budget, None, None, half_mass, None)
    level = min(MAX_EXACT_DEPTH, m + l + slack)
    upper = math.fsum(interval_mass_bounds(lam, p, level).upper for p in pieces)
    return SmallUnionReport(True, "", L, l, rp, total, budget, level, upper, half_mass, upper <= half_mass)


# ---------------------------------------------------------------------------
# stratified estimates (exact head, random tail)
# ---------------------------------------------------------------------------

def _stratified(values_for, lam_list, depth, seed, chunk_words=1 << 18):
    """Average over all 2^depth heads with two random 64-letter tails per head.

    ``values_for(x_full_list)`` maps a list of X arrays (one per lambda) to
    the per-sample integrand. Returns (mean, standard error).
    """
    depth = check_depth(depth)
    heads = [series_coefficients(lam, depth)[:1] for lam in lam_list]
    tails = [(lam ** depth) * series_coefficients(lam, MC_DEPTH)[:1] for lam in lam_list]
    blocks = [iter_word_blocks(c, chunk_words) for c in heads]
    means, variances = [], []
    for b, group in enumerate(zip(*blocks)):
        k = group[0].size
        reps = []
        for r in range(2):
            gen = np.random.Generator(np.random.Philox(
                np.random.SeedSequence(int(seed), spawn_key=(int(b), r))))
            bits = gen.integers(0, 1 << 64, size=k, dtype=np.uint64, endpoint=False)
            xs = [blk.values[0] + kernels.bit_signed_sums(bits, t)[0] for blk, t in zip(group, tails)]
            v = np.asarray(values_for(xs), dtype=np.float64)
            if not np.all(np.isfinite(v)):
                raise NumericError("non-finite integrand values")
            reps.append(v)
        m = 0.5 * (reps[0] + reps[1])
        s2 = 0.5 * (reps[0] - reps[1]) ** 2
        means.append(m.tolist())
        variances.append(s2.tolist())
    n = 1 << depth
    mean = math.ldexp(math.fsum(itertools.chain.from_iterable(means)), -depth)
    var_of_mean = math.fsum(itertools.chain.from_iterable(variances)) / 2.0 / n / n
    return mean, math.sqrt(var_of_mean)


def stratified_expectation(phi, lam, depth=22, seed=0) -> ExpectationResult:
    """E phi(X) with every length-``depth`` head enumerated and two random tails per head.

    Useful for lambda close to 1, where dropping the tail is too crude.
    The error bound is 4 standard errors plus the (negligible) truncation
    after depth + 64 letters.
    """
    lam = check_lambda(lam)
    mean, se = _stratified(lambda xs: phi.value(xs[0]), [lam], depth, seed)
    tail = truncation_error(phi, lam, depth + MC_DEPTH) + rounding_error(phi, lam)
    return ExpectationResult(mean, 4.0 * se + tail, "stratified", depth, int(seed), se)


def stratified_difference(phi, lam_a, lam_b, depth=22, seed=0) -> ExpectationResult:
    """h(lam_b) - h(lam_a) with common heads and tails for both parameters."""
    a, b = check_lambda(lam_a), check_lambda(lam_b)
    mean, se = _stratified(lambda xs: phi.increment(xs[0], xs[1] - xs[0]), [a, b], depth, seed)
    tail = (truncation_error(phi, a, depth + MC_DEPTH) + truncation_error(phi, b, depth + MC_DEPTH)
            + rounding_error(phi, a) + rounding_error(phi, b))
    return ExpectationResult(mean, 4.0 * se + tail, "stratified", depth, int(seed), se)
