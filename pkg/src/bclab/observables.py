"""Observables: closed-form and piecewise-polynomial test functions.

An :class:`Observable` is a finite sum of components. Each component knows
its values, exact derivatives up to its smoothness class, cancellation-free
increments f(x+d) - f(x), sup norms, a modulus of continuity and (when it is
compactly supported up to a constant) its Fourier transform.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ArgumentError, CapabilityError, DomainError, ResourceError, UnsupportedRegimeError
from .piecewise import PiecewisePolynomial, smoothstep_coefs, smoothstep_down_coefs
from .symbolic import (
    check_lambda, cylinder_gap, forced_prefix_length, forced_prefix_margin, level_intervals,
)

SMOOTHNESS_NAMES = ("C0", "C1", "C2")
MAX_COVER_LEVEL = 26


def _arr(x):
    return np.asarray(x, dtype=np.float64)


# ---------------------------------------------------------------------------
# components
# ---------------------------------------------------------------------------

class Component:
    type_name = "component"
    smooth_order = 0

    def value(self, x):
        raise NotImplementedError

    def derivative(self, x, order=1):
        raise CapabilityError(f"{self.type_name} has no exact derivative of order {order}")

    def increment(self, x, d):
        x = _arr(x)
        return self.value(x + d) - self.value(x)

    # constant extension (None for globally defined components)
    span = None
    left = 0.0
    right = 0.0

    def holder(self):
        """Declared global (exponent, constant), or None."""
        return None

    def sup_abs(self, order=0, lo=-np.inf, hi=np.inf):
        raise NotImplementedError

    def modulus(self, delta, lo=-np.inf, hi=np.inf, order=0):
        """Bound on |f^(order)(x) - f^(order)(y)| for x, y in [lo, hi], |x - y| <= delta."""
        if order + 1 <= self.smooth_order + 1 and self._has_order(order + 1):
            return self.sup_abs(order + 1, lo - delta, hi + delta) * delta
        if order == 0 and self.holder() is not None:
            a, c = self.holder()
            return c * delta ** a
        raise CapabilityError(f"no modulus of continuity for derivative {order} of {self.type_name}")

    def _has_order(self, k):
        return False

    def fourier(self, xi):
        raise ArgumentError(f"{self.type_name} is not compactly supported; no Fourier transform")

    def params(self):
        return {}

    def signs(self):
        return []

    def to_dict(self):
        return {"type": self.type_name, "params": self.params(), "signs": [int(s) for s in self.signs()]}


class Polynomial(Component):
    """sum_k c_k x^k on the whole line."""

    type_name = "polynomial"
    smooth_order = 2

    def __init__(self, coefficients):
        c = np.trim_zeros(np.asarray(coefficients, dtype=np.float64), "b")
        self.c = c if c.size else np.zeros(1)

    def _der(self, k):
        c = self.c
        for _ in range(k):
            c = np.polynomial.polynomial.polyder(c) if c.size > 1 else np.zeros(1)
        return c

    def _has_order(self, k):
        return True

    def value(self, x):
        return np.polynomial.polynomial.polyval(_arr(x), self.c)

    def derivative(self, x, order=1):
        return np.polynomial.polynomial.polyval(_arr(x), self._der(order))

    def increment(self, x, d):
        # Taylor expansion at x; exact for polynomials and free of cancellation
        x = _arr(x)
        d = _arr(d)
        out = np.zeros(np.broadcast(x, d).shape)
        fact = 1.0
        dp = np.ones_like(out)
        for k in range(1, self.c.size):
            fact *= k
            dp = dp * d
            out = out + np.polynomial.polynomial.polyval(x, self._der(k)) / fact * dp
        return out

    def sup_abs(self, order=0, lo=-np.inf, hi=np.inf):
        c = self._der(order)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            if np.any(c[1:] != 0):
                return math.inf
            return abs(float(c[0]))
        cand = [lo, hi]
        if c.size > 2:
            for z in np.atleast_1d(np.polynomial.polynomial.polyroots(np.polynomial.polynomial.polyder(c))):
                if abs(z.imag) < 1e-12 and lo < z.real < hi:
                    cand.append(z.real)
        return float(np.max(np.abs(np.polynomial.polynomial.polyval(np.array(cand), c))))

    def params(self):
        return {"coefficients": [float(v) for v in self.c]}


class PiecewiseComponent(Component):
    """Component backed by an exact piecewise polynomial for f; derivatives are exact."""

    type_name = "piecewise-polynomial"
    smooth_order = 2

    def __init__(self, pp: PiecewisePolynomial, smooth_order=2):
        self.pp = pp
        self.smooth_order = smooth_order
        self._ders = {0: pp}

    def _d(self, k):
        if k not in self._ders:
            self._ders[k] = self.pp.derivative(k)
        return self._ders[k]

    def _has_order(self, k):
        return k <= self.smooth_order + 1

    @property
    def span(self):
        return self.pp.span

    @property
    def left(self):
        return self.pp.left

    @property
    def right(self):
        return self.pp.right

    def value(self, x):
        return self.pp(x)

    def derivative(self, x, order=1):
        if order > self.smooth_order:
            raise CapabilityError(f"{self.type_name} is only {SMOOTHNESS_NAMES[self.smooth_order]}")
        return self._d(order)(x)

    def increment(self, x, d):
        return self.pp.increment(x, d)

    def sup_abs(self, order=0, lo=-np.inf, hi=np.inf):
        if order > self.smooth_order + 1:
            raise CapabilityError("derivative order beyond the stored pieces")
        return self._d(order).sup_abs(lo, hi)

    def holder(self):
        return (1.0, self.sup_abs(1))

    def fourier(self, xi):
        return self.pp.fourier(xi)

    def params(self):
        return {"knots": [float(v) for v in self.pp.knots],
                "coefs": [[float(v) for v in row] for row in self.pp.coefs],
                "left": self.pp.left, "right": self.pp.right}


# --- bump profile ----------------------------------------------------------

@dataclass(frozen=True)
class BumpProfile:
    """C^2 plateau bump g_rho on [0, 2] with quintic smoothstep ramps."""

    rho: float
    g: PiecewisePolynomial
    G: PiecewisePolynomial
    ramp_width: float
    c2_norm: float
    integral: float

    def __call__(self, u):
        return self.g(u)


def make_bump(rho: float) -> BumpProfile:
    """g_rho: 0 up to (1-rho)/3, smoothstep up to 1-rho, 1 on [1-rho, 1+rho], mirrored down.

    Raises:
        DomainError: rho outside (0, 1).
    """
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise DomainError("rho must lie in (0, 1)")
    a = (1.0 - rho) / 3.0
    b = 1.0 - rho
    c = 1.0 + rho
    d = 2.0 - a
    w = 2.0 * (1.0 - rho) / 3.0
    g = PiecewisePolynomial.from_pieces([
        (0.0, a, [0.0]),
        (a, b, smoothstep_coefs()),
        (b, c, [1.0]),
        (c, d, smoothstep_down_coefs()),
        (d, 2.0, [0.0]),
    ])
    G = g.antiderivative()
    c2 = 1.0 + (15.0 / 8.0) / w + (10.0 / math.sqrt(3.0)) / w ** 2
    return BumpProfile(rho, g, G, w, c2, 2.0 * rho + w)


class PlateauBump(PiecewiseComponent):
    """scale * g_rho(2 (x - lo) / (hi - lo)): a C^2 bump on [lo, hi]."""

    type_name = "plateau-bump"

    def __init__(self, lo, hi, rho, scale=1.0):
        if not hi > lo:
            raise ArgumentError("plateau bump needs hi > lo")
        self.lo, self.hi, self.rho, self.scale = float(lo), float(hi), float(rho), float(scale)
        prof = make_bump(rho)
        knots = self.lo + prof.g.knots * (self.hi - self.lo) / 2.0
        pp = PiecewisePolynomial(knots, prof.g.coefs * self.scale, 0.0, 0.0)
        super().__init__(pp, 2)

    def params(self):
        return {"lo": self.lo, "hi": self.hi, "rho": self.rho, "scale": self.scale}


# --- generalized Brownian motion --------------------------------------------

def gbm_probability(N, theta2):
    return float(N) ** (-float(theta2))


def draw_gbm_signs(N, theta2, seed, stream=0):
    """Independent s_j in {-1, 0, +1} with P(+1) = P(-1) = N^-theta2, from a keyed Philox stream."""
    p = gbm_probability(N, theta2)
    if p > 0.5:
        raise ArgumentError(f"N^-theta2 = {p} > 1/2: probabilities invalid")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(stream),))))
    u = rng.random(int(N))
    return np.where(u < p, 1, np.where(u < 2 * p, -1, 0)).astype(np.int8)


def gbm_derivative_pp(N, theta1, rho, signs, scale=1.0):
    """phi' = s_j N^theta1 g_rho(N x - 2(j-1)) on cell j = [2(j-1)/N, 2j/N]."""
    prof = make_bump(rho)
    N = int(N)
    signs = np.asarray(signs)
    amp = scale * float(N) ** theta1
    u = prof.g.knots  # 0, a, b, c, d, 2
    pieces = []
    zero_start = 0.0
    for j in np.flatnonzero(signs):
        base = 2.0 * j
        x = (base + u) / N
        if x[0] > zero_start:
            pieces.append((zero_start, x[0], [0.0]))
        for k in range(prof.g.n_pieces):
            pieces.append((x[k], x[k + 1], list(prof.g.coefs[k] * (amp * signs[j]))))
        zero_start = x[-1]
    if zero_start < 2.0 or not pieces:
        pieces.append((zero_start, 2.0, [0.0]))
    return PiecewisePolynomial.from_pieces(pieces)


class GbmComponent(PiecewiseComponent):
    type_name = "gbm"

    def __init__(self, N, theta1, theta2, rho, signs, scale=1.0):
        self.N, self.theta1, self.theta2, self.rho = int(N), float(theta1), float(theta2), float(rho)
        self.scale = float(scale)
        self._signs = np.asarray(signs, dtype=np.int8)
        if self._signs.shape != (self.N,):
            raise ArgumentError("need exactly N signs")
        if np.any(np.abs(self._signs) > 1):
            raise ArgumentError("signs must be -1, 0 or +1")
        dpp = gbm_derivative_pp(self.N, self.theta1, self.rho, self._signs, self.scale)
        super().__init__(dpp.antiderivative(0.0), 2)

    def holder(self):
        if not np.any(self._signs):
            return (1.0, 0.0)
        return (1.0, abs(self.scale) * float(self.N) ** self.theta1)

    def params(self):
        return {"N": self.N, "theta1": self.theta1, "theta2": self.theta2, "rho": self.rho, "scale": self.scale}

    def signs(self):
        return self._signs.tolist()


@dataclass(frozen=True)
class GbmInstance:
    N: int
    theta1: float
    theta2: float
    rho: float
    signs: np.ndarray
    prefix_integrals: np.ndarray
    seed: int | None = None

    @cached_property
    def component(self) -> GbmComponent:
        return GbmComponent(self.N, self.theta1, self.theta2, self.rho, self.signs)

    def observable(self) -> "Observable":
        return Observable([self.component])


def sample_gbm(N, theta1, theta2, rho, seed, stream=0) -> GbmInstance:
    """Draw one generalized Brownian motion phi_{N,rho}.

    Raises:
        ArgumentError: N^-theta2 > 1/2.
    """
    if int(N) < 1:
        raise ArgumentError("N must be positive")
    signs = draw_gbm_signs(N, theta2, seed, stream)
    prof = make_bump(rho)
    cell = signs * (float(N) ** (theta1 - 1.0) * prof.integral)
    prefix = np.concatenate([[0.0], np.cumsum(cell)])
    return GbmInstance(int(N), float(theta1), float(theta2), float(rho), signs, prefix, seed)


# --- Weierstrass partial sums -------------------------------------------------

class Weierstrass(Component):
    """scale * sum_{n=1}^{K} sin(a^n x) / b^n, declared C0 with its Hoelder data."""

    type_name = "weierstrass"
    smooth_order = 0

    def __init__(self, a, b, terms, scale=1.0):
        if b <= 1:
            raise DomainError("b <= 1: the series diverges")
        if a <= 1:
            raise DomainError("a must exceed 1")
        if terms < 1:
            raise ArgumentError("terms must be >= 1")
        self.a, self.b, self.terms, self.scale = float(a), float(b), int(terms), float(scale)
        n = np.arange(1, self.terms + 1, dtype=np.float64)
        self._freq = self.a ** n
        self._amp = self.scale / self.b ** n

    def value(self, x):
        x = _arr(x)
        out = np.zeros(x.shape)
        for f, c in zip(self._freq, self._amp):
            out = out + c * np.sin(f * x)
        return out

    def increment(self, x, d):
        x = _arr(x)
        d = _arr(d)
        out = np.zeros(np.broadcast(x, d).shape)
        for f, c in zip(self._freq, self._amp):
            out = out + c * 2.0 * np.cos(f * (x + 0.5 * d)) * np.sin(0.5 * f * d)
        return out

    def tail_bound(self):
        return abs(self.scale) * self.b ** (-self.terms) / (self.b - 1.0)

    def exponent(self):
        return min(1.0, math.log(self.b) / math.log(self.a))

    def holder(self):
        a, b = self.a, self.b
        if a > b:
            c = 2.0 * b / (b - 1.0) + a * b / (a - b)
        else:
            c = float(np.sum((a / b) ** np.arange(1, self.terms + 1)))
        return (self.exponent(), abs(self.scale) * c)

    def sup_abs(self, order=0, lo=-np.inf, hi=np.inf):
        if order > 0:
            raise CapabilityError("Weierstrass observables are declared C0")
        return float(np.sum(np.abs(self._amp)))

    def params(self):
        return {"a": self.a, "b": self.b, "terms": self.terms, "scale": self.scale}


def weierstrass(a, b, terms) -> "Observable":
    return Observable([Weierstrass(a, b, terms)])


# --- dimension-drop family -------------------------------------------------------

class DimensionDropLayer(PiecewiseComponent):
    """phi_n: integral of a C^2 function equal to 1 on a cylinder cover and 0 away from it.

    The cover is the family of level-``level`` cylinders of mu_{lambda0} inside
    the rightmost level-``m0`` cylinder; ``ramp`` is the smoothstep width.
    """

    type_name = "dimension-drop-layer"

    def __init__(self, lambda0, m0, level, ramp, scale=1.0, n=None):
        self.lambda0, self.m0, self.level = float(lambda0), int(m0), int(level)
        self.ramp, self.scale, self.n = float(ramp), float(scale), n
        lo, hi = level_intervals(self.lambda0, self.level, (1,) * self.m0)
        self.cover = (lo, hi)
        r = self.ramp
        pieces = []
        for i in range(lo.shape[0]):
            if i > 0:
                pieces.append((hi[i - 1] + r, lo[i] - r, [0.0]))
            pieces.append((lo[i] - r, lo[i], list(np.array(smoothstep_coefs()) * self.scale)))
            pieces.append((lo[i], hi[i], [self.scale]))
            pieces.append((hi[i], hi[i] + r, list(np.array(smoothstep_down_coefs()) * self.scale)))
        dpp = PiecewisePolynomial.from_pieces(pieces)
        super().__init__(dpp.antiderivative(0.0), 2)

    @property
    def cover_measure(self):
        lo, hi = self.cover
        return float(np.sum(hi - lo))

    def params(self):
        out = {"lambda0": self.lambda0, "m0": self.m0, "level": self.level, "ramp": self.ramp,
               "scale": self.scale}
        if self.n is not None:
            out["n"] = int(self.n)
        return out

    def signs(self):
        return [1] * self.m0


@dataclass(frozen=True)
class DimensionDropConfig:
    """All constants of the dimension-drop construction at one lambda0."""

    lambda0: float
    theta: float
    eps0: float
    dim: float
    beta: float
    forced_prefix: int
    delta_prime: float
    m0: int
    levels: tuple[int, ...]
    deltas: tuple[float, ...]
    ramps: tuple[float, ...]
    cover_lengths: tuple[float, ...]
    checks: dict = field(default_factory=dict)

    @property
    def n_max(self):
        return len(self.levels)

    @property
    def eps_ladder(self):
        """Layer-matched steps: the cylinder length of each layer's cover."""
        return self.cover_lengths

    @property
    def window(self):
        return (self.lambda0 - self.eps0, self.lambda0 + self.eps0)


def _cover_level(lam0, m0, beta, n, theta):
    q = 1.0 + 2.0 * theta / (1.0 - theta)
    for L in range(m0, 200):
        ell = 2.0 * lam0 ** L / (1.0 - lam0)
        if 2.0 ** (L - m0) * ell ** beta < 1.0 / n and ell ** (1.0 - beta) < n ** (-q):
            return L
    return None


def dimension_drop_config(lambda0, theta, n_max, eps0=None, beta=None) -> DimensionDropConfig:
    """Choose every constant of the construction for layers n = 1..n_max.

    The window half-width ``eps0`` is halved from min(lambda0, 1/2-lambda0)/2
    until the forced-prefix margin leaves room for an m0; beta is picked on a
    grid in (dim, 1) to minimise the deepest cover level.
    """
    lam0 = check_lambda(lambda0)
    if lam0 >= 0.5:
        raise UnsupportedRegimeError("dimension-drop construction needs lambda0 < 1/2")
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    if n_max < 1:
        raise ArgumentError("n_max must be >= 1")
    dim = math.log(2.0) / -math.log(lam0)
    e = min(lam0, 0.5 - lam0) / 2.0 if eps0 is None else float(eps0)
    while True:
        lo, hi = lam0 - e, lam0 + e
        ms = forced_prefix_length(lo, hi)
        dprime = forced_prefix_margin(lo, hi, ms, lam0) / 4.0
        shift = 1.0 / (1.0 - hi) - 1.0 / (1.0 - lam0)
        if dprime > shift:
            break
        if eps0 is not None:
            raise DomainError(f"eps0={eps0} too large for the forced-prefix margin")
        e /= 2.0
    m0 = 1
    while not dprime > 2.0 * lam0 ** m0 / (1.0 - lam0) + shift:
        m0 += 1
    m0 = max(m0, ms)
    if beta is None:
        best = None
        for i in range(1, 1000):
            b = dim + (1.0 - dim) * i / 1000.0
            if 2.0 * lam0 ** b >= 1.0:
                continue
            Ls = [_cover_level(lam0, m0, b, n, theta) for n in range(1, n_max + 1)]
            if None in Ls:
                continue
            if best is None or max(Ls) < max(best[1]):
                best = (b, Ls)
        beta, levels = best
    else:
        if not (dim < beta < 1.0 and 2.0 * lam0 ** beta < 1.0):
            raise DomainError("beta must lie in (dim, 1) with 2 lambda0^beta < 1")
        levels = [_cover_level(lam0, m0, beta, n, theta) for n in range(1, n_max + 1)]
    if any(L is None or L > MAX_COVER_LEVEL for L in levels):
        raise ResourceError(f"cover levels {levels} exceed the cap {MAX_COVER_LEVEL}")
    q = 1.0 + 2.0 * theta / (1.0 - theta)
    deltas, ramps, lengths = [], [], []
    checks = {}
    for n, L in enumerate(levels, start=1):
        ell = 2.0 * lam0 ** L / (1.0 - lam0)
        delta = math.sqrt(ell * n ** (-q / (1.0 - beta)))
        r = min(dprime, cylinder_gap(lam0, L) / 3.0, ell / 2.0)
        deltas.append(delta)
        ramps.append(r)
        lengths.append(ell)
        count = 2 ** (L - m0)
        checks[n] = {
            "sum_len_beta": count * ell ** beta,
            "sum_len_beta_ok": count * ell ** beta < 1.0 / n,
            "delta_ok": ell < delta and delta ** (1.0 - beta) < n ** (-q),
            "cover_measure": count * ell,
        }
    return DimensionDropConfig(lam0, float(theta), e, dim, float(beta), ms, dprime, m0, tuple(levels),
                               tuple(deltas), tuple(ramps), tuple(lengths), checks)


def dimension_drop_phi(lambda0, theta, n_max, eps0=None, beta=None):
    """Build phi = sum_n phi_n for n = 1..n_max.

    Returns:
        (observable, layers, config) where ``layers`` holds one Observable per n.

    Raises:
        UnsupportedRegimeError: lambda0 >= 1/2.
        ResourceError: a cover level above 26 would be needed.
    """
    cfg = dimension_drop_config(lambda0, theta, n_max, eps0, beta)
    comps = [DimensionDropLayer(cfg.lambda0, cfg.m0, L, r, 1.0, n)
             for n, (L, r) in enumerate(zip(cfg.levels, cfg.ramps), start=1)]
    layers = [Observable([c]) for c in comps]
    return Observable(comps), layers, cfg


# ---------------------------------------------------------------------------
# observable
# ---------------------------------------------------------------------------

_REGISTRY = {}


def _register(cls, builder):
    _REGISTRY[cls.type_name] = builder


class Observable:
    """Finite sum of components; immutable."""

    def __init__(self, components):
        self.components = tuple(components)
        if not self.components:
            raise ArgumentError("an observable needs at least one component")

    # -- structure -------------------------------------------------------
    @property
    def smooth_order(self):
        return min(c.smooth_order for c in self.components)

    @property
    def smoothness(self):
        return SMOOTHNESS_NAMES[self.smooth_order]

    @property
    def support_hint(self):
        spans = [c.span for c in self.components]
        if any(s is None for s in spans):
            return None
        return (min(s[0] for s in spans), max(s[1] for s in spans))

    @property
    def left(self):
        return math.fsum(c.left for c in self.components)

    @property
    def right(self):
        return math.fsum(c.right for c in self.components)

    def holder(self):
        """Declared (exponent, constant) for the sum, or None if some part is global."""
        data = [c.holder() for c in self.components]
        if any(d is None for d in data):
            return None
        alpha = min(d[0] for d in data)
        total = 0.0
        for comp, (a, c) in zip(self.components, data):
            if a > alpha:
                lo, hi = comp.span
                # |f(x)-f(y)| <= c min(|x-y|, D)^a <= c D^(a-alpha) |x-y|^alpha
                c = c * (hi - lo) ** (a - alpha)
            total += c
        return (alpha, total)

    @property
    def holder_exponent(self):
        h = self.holder()
        return None if h is None else h[0]

    @property
    def holder_constant(self):
        h = self.holder()
        return None if h is None else h[1]

    # -- evaluation ------------------------------------------------------
    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        out = self.components[0].value(x)
        for c in self.components[1:]:
            out = out + c.value(x)
        return out

    def derivative(self, x, order=1):
        if order > self.smooth_order:
            raise CapabilityError(f"observable is only {self.smoothness}; derivative {order} unavailable")
        out = self.components[0].derivative(x, order)
        for c in self.components[1:]:
            out = out + c.derivative(x, order)
        return out

    def increment(self, x, d):
        out = self.components[0].increment(x, d)
        for c in self.components[1:]:
            out = out + c.increment(x, d)
        return out

    def sup_abs(self, order=0, lo=-np.inf, hi=np.inf):
        """Upper bound on sup |f^(order)| over [lo, hi] (sum of component sups)."""
        return math.fsum(c.sup_abs(order, lo, hi) for c in self.components)

    def modulus(self, delta, lo=-np.inf, hi=np.inf, order=0):
        return math.fsum(c.modulus(delta, lo, hi, order) for c in self.components)

    def fourier(self, xi):
        """Transform of f - c where c is the common constant outside the support.

        Returns (values, c).
        """
        for comp in self.components:
            if comp.span is None or comp.left != comp.right:
                raise ArgumentError(f"{comp.type_name} component is not constant-plus-compact")
        out = self.components[0].fourier(xi)
        for c in self.components[1:]:
            out = out + c.fourier(xi)
        return out, self.left

    # -- algebra ---------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Observable):
            return NotImplemented
        return Observable(self.components + other.components)

    def scaled(self, factor):
        return Observable([_scale_component(c, factor) for c in self.components])

    def __mul__(self, factor):
        return self.scaled(float(factor))

    __rmul__ = __mul__

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    # -- serialization ---------------------------------------------------
    def to_json(self):
        return json.dumps([c.to_dict() for c in self.components], sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        if isinstance(data, dict):
            data = [data]
        return cls([component_from_dict(d) for d in data])


def _scale_component(c, factor):
    d = c.to_dict()
    p = d["params"]
    if c.type_name == "polynomial":
        p["coefficients"] = [v * factor for v in p["coefficients"]]
    elif c.type_name == "piecewise-polynomial":
        p["coefs"] = [[v * factor for v in row] for row in p["coefs"]]
        p["left"] *= factor
        p["right"] *= factor
    else:
        p["scale"] = p.get("scale", 1.0) * factor
    return component_from_dict(d)


def component_from_dict(d):
    kind = d.get("type")
    p = dict(d.get("params", {}))
    signs = d.get("signs", [])
    try:
        if kind == "polynomial":
            return Polynomial(p["coefficients"])
        if kind == "plateau-bump":
            return PlateauBump(p["lo"], p["hi"], p["rho"], p.get("scale", 1.0))
        if kind == "gbm":
            return GbmComponent(p["N"], p["theta1"], p["theta2"], p["rho"], signs, p.get("scale", 1.0))
        if kind == "dimension-drop-layer":
            return DimensionDropLayer(p["lambda0"], p["m0"], p["level"], p["ramp"], p.get("scale", 1.0),
                                      p.get("n"))
        if kind == "weierstrass":
            return Weierstrass(p["a"], p["b"], p["terms"], p.get("scale", 1.0))
        if kind == "piecewise-polynomial":
            return PiecewiseComponent(PiecewisePolynomial(p["knots"], p["coefs"], p["left"], p["right"]),
                                      int(p.get("smooth_order", 2)))
    except KeyError as exc:
        raise ArgumentError(f"{kind} component missing parameter {exc.args[0]!r}") from None
    raise ArgumentError(f"unknown component type {kind!r}")


# --- convenience constructors ------------------------------------------------------

def polynomial(*coefficients) -> Observable:
    return Observable([Polynomial(coefficients)])


def plateau_bump(lo, hi, rho, scale=1.0) -> Observable:
    return Observable([PlateauBump(lo, hi, rho, scale)])


def ramp_observable(lo=0.0, hi=1.0) -> Observable:
    """x - lo on [lo, hi], constant outside (C0, Lipschitz)."""
    pp = PiecewisePolynomial([lo, hi], [[0.0, hi - lo]], 0.0, hi - lo)
    return Observable([PiecewiseComponent(pp, 0)])


# ---------------------------------------------------------------------------
# Hoelder norm estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HolderEstimate:
    alpha: float
    lower_estimate: float
    upper_bound: float | None
    sup_grid: float
    grid_size: int


def holder_norm_estimate(phi: Observable, alpha: float, grid_size: int = 1 << 12,
                         interval=None) -> HolderEstimate:
    """Two-point Hoelder modulus on a uniform grid and, for C1 observables, an upper bound.

    The lower estimate is max over dyadic separations 2^i h of
    |phi(x + 2^i h) - phi(x)| / (2^i h)^alpha. The upper bound is
    2 sup|phi'|^alpha sup|phi|^(1-alpha) + sup|phi|.

    Raises:
        ArgumentError: grid_size < 2^10 or no interval for a global observable.
    """
    if grid_size < 1 << 10:
        raise ArgumentError("grid_size must be at least 2^10")
    if not 0.0 < alpha <= 1.0:
        raise DomainError("alpha must lie in (0, 1]")
    if interval is None:
        interval = phi.support_hint
        if interval is None:
            raise ArgumentError("a global observable needs an explicit interval")
    lo, hi = float(interval[0]), float(interval[1])
    x = np.linspace(lo, hi, grid_size + 1)
    y = phi.value(x)
    h = (hi - lo) / grid_size
    best = 0.0
    s = 1
    while s <= grid_size:
        diff = np.max(np.abs(y[s:] - y[:-s]))
        best = max(best, float(diff) / (s * h) ** alpha)
        s *= 2
    upper = None
    if phi.smooth_order >= 1:
        if phi.support_hint is None:
            s0 = phi.sup_abs(0, lo, hi)
            s1 = phi.sup_abs(1, lo, hi)
        else:
            s0 = phi.sup_abs(0)
            s1 = phi.sup_abs(1)
        upper = 2.0 * s1 ** alpha * s0 ** (1.0 - alpha) + s0
    return HolderEstimate(float(alpha), best, upper, float(np.max(np.abs(y))), int(grid_size))


def holder_exponent_regression(phi: Observable, interval, grid_size=1 << 16, min_sep=4, max_sep=None):
    """Slope of log max|Delta phi| against log separation over dyadic scales."""
    lo, hi = interval
    x = np.linspace(lo, hi, grid_size + 1)
    y = phi.value(x)
    h = (hi - lo) / grid_size
    max_sep = max_sep or grid_size // 16
    seps, mods = [], []
    s = min_sep
    while s <= max_sep:
        seps.append(s * h)
        mods.append(float(np.max(np.abs(y[s:] - y[:-s]))))
        s *= 2
    slope = np.polyfit(np.log(seps), np.log(mods), 1)[0]
    return float(slope)
