"""Fourier side: the cosine product, its lambda-derivative, Sobolev integrals
and the reconstruction of h(b) - h(a) from the density rho(t).

Conventions: phi_hat(xi) = int e^{-i xi x} phi(x) dx while
mu_hat(xi) = int e^{+i xi x} dmu(x) = prod_n cos(lam^n xi). With these,
int phi dmu = c + (1/2pi) int phi_hat(xi) mu_hat(xi) dxi where c is the
constant value of phi outside a compact set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from . import kernels
from .errors import ArgumentError, DomainError
from .symbolic import check_lambda, support_radius

TAIL_ARG = 1e-8  # product truncated once lam^D * |xi| falls below this


@dataclass(frozen=True)
class SpectralValue:
    xi: float
    value: float
    dvalue_dlambda: float | None
    truncation_error: float
    depth: int
    reliable: bool = True


def _powers(lam, depth):
    n = np.arange(depth, dtype=np.float64)
    return lam ** n


def product_tail_error(lam, xi, depth):
    """Bound on |mu_hat - truncated product|, valid when lam^depth |xi| <= 1.

    Uses -log cos(x) <= c x^2 on |x| <= x0 with c = -log cos(x0) / x0^2,
    x0 = lam^depth |xi|; returns inf where the bound is not available.
    """
    x0 = lam ** depth * np.abs(np.asarray(xi, dtype=np.float64))
    s = x0 ** 2 / (1.0 - lam * lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(x0 > 1e-4, -np.log(np.cos(np.minimum(x0, 1.0))) / np.maximum(x0, 1e-300) ** 2, 0.5 + x0 ** 2 / 12.0)
    out = np.where(x0 <= 1.0, np.expm1(c * s), np.inf)
    return out


def derivative_tail_error(lam, xi, depth):
    """Bound on the omitted terms of d/dlam mu_hat after ``depth`` factors.

    Omitted series terms: |xi| sum_{n>=D} n lam^(n-1) min(1, lam^n |xi|).
    The kept terms also miss the factor prod_{k>=D} cos, bounded via
    :func:`product_tail_error`.
    """
    xi = np.abs(np.asarray(xi, dtype=np.float64))
    D = depth
    x0 = lam ** D * xi
    q = lam * lam
    sum_sq = q ** D * (D / (1.0 - q) + q / (1.0 - q) ** 2)  # sum_{n>=D} n q^n
    series_tail = np.where(x0 <= 1.0, xi * xi * sum_sq / lam,
                           xi * (D * lam ** (D - 1) / (1.0 - lam) + lam ** D / (1.0 - lam) ** 2))
    head = xi * (1.0 - (D + 1) * lam ** D + D * lam ** (D + 1)) / (1.0 - lam) ** 2  # sum_{n<D} n lam^(n-1)
    return series_tail + head * product_tail_error(lam, xi, D)


def depth_for(lam, xi_max, target=TAIL_ARG):
    """Smallest depth with lam^depth * xi_max <= target (at least 2)."""
    if xi_max <= 0:
        return 2
    return max(2, int(math.ceil(math.log(target / xi_max) / math.log(lam))))


def mu_hat_array(lam, xi, depth):
    """Vectorised truncated product and its error bound."""
    lam = check_lambda(lam)
    if depth < 1:
        raise ArgumentError("depth must be >= 1")
    xi = np.asarray(xi, dtype=np.float64)
    vals = kernels.cos_product(_powers(lam, depth), xi.reshape(-1)).reshape(xi.shape)
    return vals, product_tail_error(lam, xi, depth)


def mu_hat(lam, xi, depth=64) -> SpectralValue:
    """prod_{n<depth} cos(lam^n xi)."""
    vals, err = mu_hat_array(lam, np.array([float(xi)]), depth)
    e = float(err[0])
    return SpectralValue(float(xi), float(vals[0]), None, e, int(depth), math.isfinite(e))


def mu_hat_dlambda_array(lam, xi, depth):
    lam = check_lambda(lam)
    if depth < 2:
        raise ArgumentError("depth must be >= 2")
    xi = np.asarray(xi, dtype=np.float64)
    pw = _powers(lam, depth)
    n = np.arange(depth, dtype=np.float64)
    dpw = n * lam ** np.maximum(n - 1, 0)
    val, der = kernels.cos_product_dlambda(pw, dpw, xi.reshape(-1))
    return val.reshape(xi.shape), der.reshape(xi.shape), derivative_tail_error(lam, xi, depth)


def mu_hat_dlambda(lam, xi, depth=64) -> SpectralValue:
    """d/dlam prod cos(lam^n xi) = -xi sum_n n lam^(n-1) sin(lam^n xi) prod_{k != n} cos(lam^k xi)."""
    val, der, err = mu_hat_dlambda_array(lam, np.array([float(xi)]), depth)
    e = float(err[0])
    return SpectralValue(float(xi), float(val[0]), float(der[0]), e, int(depth), math.isfinite(e))


# ---------------------------------------------------------------------------
# convolution identity and the derivative bound
# ---------------------------------------------------------------------------

def convolution_residual(lam, xi, m, depth=200):
    """|mu_hat_lam(xi) - prod_{j<m} mu_hat_{lam^m}(lam^j xi)|."""
    lam = check_lambda(lam)
    lhs = mu_hat(lam, xi, depth).value
    inner = int(math.ceil(depth / m))
    # lam^m may fall below the lambda floor; the product itself is fine there
    pw = _powers(lam ** m, inner)
    args = np.array([lam ** j * float(xi) for j in range(m)])
    rhs = float(np.prod(kernels.cos_product(pw, args)))
    return abs(lhs - rhs)


@dataclass(frozen=True)
class DerivativeBoundAudit:
    lam: float
    xi: float
    n: int
    depth: int
    lhs: float
    rhs: float
    margin: float
    holds: bool


def derivative_bound_audit(lam, xi, n, depth=96, tol=1e-12) -> DerivativeBoundAudit:
    """Check prod_{k<D, k != n} |cos(lam^k xi)| <= sum_{j<3} |mu_hat_{lam^3}(lam^j xi)|^2.

    Each mu_hat_{lam^3}(lam^j xi) keeps exactly the factors k = 3i + j < D,
    so both sides are built from the same truncated product.
    """
    lam = check_lambda(lam)
    if not 0 <= n < depth:
        raise ArgumentError("need 0 <= n < depth")
    k = np.arange(depth)
    c = np.abs(np.cos(lam ** k.astype(np.float64) * xi))
    lhs = float(np.prod(np.delete(c, n)))
    rhs = 0.0
    for j in range(3):
        rhs += float(np.prod(c[k % 3 == j])) ** 2
    return DerivativeBoundAudit(lam, float(xi), int(n), int(depth), lhs, rhs, rhs - lhs, lhs <= rhs + tol)


# ---------------------------------------------------------------------------
# quadrature helpers
# ---------------------------------------------------------------------------

def gauss_legendre(a, b, nodes):
    x, w = roots_legendre(nodes)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def trapezoid_grid(cutoff, step):
    n = int(math.ceil(cutoff / step))
    xi = np.linspace(0.0, cutoff, n + 1)
    w = np.full(n + 1, cutoff / n)
    w[0] *= 0.5
    w[-1] *= 0.5
    return xi, w


def _chunks(n, size):
    for s in range(0, n, size):
        yield slice(s, min(n, s + size))


# ---------------------------------------------------------------------------
# Sobolev integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SobolevEstimate:
    gamma: float
    xi_cutoff: float
    lambda_range: tuple[float, float]
    value: float
    refinement_ratio: float
    value_half: float
    step: float
    nodes: int


def sobolev_integral(gamma, lambda_range, xi_cutoff, depth=None, step=0.01, nodes=64,
                     chunk=1 << 16) -> SobolevEstimate:
    """int_range int_R |xi|^(2 gamma) |mu_hat_lam(xi)|^2 dxi dlam, truncated at |xi| <= cutoff.

    A single lambda (a <= b equal, or a float) gives the inner integral only.
    The half-cutoff value comes from the same grid, so
    refinement_ratio = value(cutoff) / value(cutoff / 2).
    """
    if gamma < 0:
        raise DomainError("gamma must be >= 0")
    if xi_cutoff < 10:
        raise ArgumentError("xi_cutoff must be at least 10")
    if np.isscalar(lambda_range):
        lambda_range = (float(lambda_range), float(lambda_range))
    a, b = float(lambda_range[0]), float(lambda_range[1])
    if b < a:
        raise ArgumentError("lambda range must satisfy a <= b")
    if a == b:
        lams, lw = np.array([check_lambda(a)]), np.array([1.0])
    else:
        check_lambda(a)
        check_lambda(b)
        lams, lw = gauss_legendre(a, b, nodes)
    xi, w = trapezoid_grid(float(xi_cutoff), step)
    half_idx = int(np.searchsorted(xi, 0.5 * xi_cutoff))
    w_half = w[:half_idx + 1].copy()
    w_half[-1] = 0.5 * (xi[1] - xi[0])
    weight_pow = xi ** (2.0 * gamma) if gamma > 0 else np.ones_like(xi)
    full = []
    half = []
    for lam, wl in zip(lams, lw):
        d = depth or depth_for(lam, xi_cutoff)
        pw = _powers(lam, d)
        acc_full = []
        acc_half = []
        for sl in _chunks(xi.shape[0], chunk):
            v = kernels.cos_product(pw, xi[sl])
            f = weight_pow[sl] * v * v
            acc_full.append(float(np.dot(f, w[sl])))
            hs = slice(sl.start, min(sl.stop, half_idx + 1))
            if hs.start < hs.stop:
                acc_half.append(float(np.dot(f[: hs.stop - hs.start], w_half[hs])))
        full.append(wl * 2.0 * math.fsum(acc_full))
        half.append(wl * 2.0 * math.fsum(acc_half))
    value = math.fsum(full)
    value_half = math.fsum(half)
    ratio = value / value_half if value_half > 0 else math.inf
    return SobolevEstimate(float(gamma), float(xi_cutoff), (a, b), value, ratio, value_half, float(step),
                           int(lams.shape[0]))


# ---------------------------------------------------------------------------
# phi_hat and rho
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiHat:
    xi: np.ndarray
    value: np.ndarray
    constant: float
    quadrature_error: float


def phi_hat(phi, xi, check=False) -> PhiHat:
    """Transform of phi - c where c is its constant value far out.

    The transform is exact piece by piece; with ``check`` it is compared with
    composite Gauss-Legendre quadrature at step <= pi / (8 |xi|) and the
    difference is reported as the quadrature error.

    Raises:
        ArgumentError: phi is not constant outside a bounded set.
    """
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    vals, const = phi.fourier(xi_arr)
    lo, hi = phi.support_hint
    l1 = float(np.sum(np.abs(phi.value(np.linspace(lo, hi, 4097)) - const))) * (hi - lo) / 4096
    err = 64 * np.finfo(float).eps * max(l1, 1.0) * max(1.0, float(np.max(np.abs(xi_arr))) * (hi - lo))
    if check:
        ref = _phi_hat_quadrature(phi, xi_arr, const)
        err = max(err, float(np.max(np.abs(ref - vals))))
    return PhiHat(xi_arr, vals, const, err)


def _phi_hat_quadrature(phi, xi, const, order=16):
    knots = np.unique(np.concatenate([c.pp.knots for c in phi.components]))
    xg, wg = np.polynomial.legendre.leggauss(order)
    out = np.zeros(xi.shape, dtype=np.complex128)
    for i, z in enumerate(xi):
        step = min(0.05, math.pi / (8 * abs(z))) if z != 0 else 0.05
        pts = [knots[0]]
        for a, b in zip(knots[:-1], knots[1:]):
            k = max(1, int(math.ceil((b - a) / step)))
            pts.extend(np.linspace(a, b, k + 1)[1:])
        pts = np.asarray(pts)
        a, b = pts[:-1, None], pts[1:, None]
        x = 0.5 * (b - a) * xg[None, :] + 0.5 * (a + b)
        w = 0.5 * (b - a) * wg[None, :]
        # midpoints keep right-continuous pieces on the correct side
        f = phi.value(x) - const
        out[i] = np.sum(w * f * np.exp(-1j * z * x))
    return out


def decay_audit(phi, alpha, xi_min=10.0, xi_max=1e4, per_octave=8):
    """max_xi |phi_hat(xi)| |xi|^alpha over a dyadic grid, plus per-octave maxima."""
    octaves = int(math.ceil(math.log2(xi_max / xi_min)))
    grid = xi_min * 2.0 ** (np.arange(octaves * per_octave + 1) / per_octave)
    grid = grid[grid <= xi_max * (1 + 1e-12)]
    v = np.abs(phi_hat(phi, grid).value) * grid ** alpha
    return grid, v


@dataclass(frozen=True)
class RhoValue:
    t: float
    value: float
    value_half_cutoff: float
    xi_cutoff: float
    step: float
    depth: int
    truncation_error: float
    cutoff_flag: bool


class RhoIntegrator:
    """Precomputes Re phi_hat on the xi grid; evaluates rho at many t.

    rho(t) = (1/2pi) int_R phi_hat(xi) d/dlam mu_hat_t(xi) dxi
           = (1/pi) int_0^cutoff Re phi_hat(xi) d/dlam mu_hat_t(xi) dxi,
    using conjugate symmetry of phi_hat and evenness of mu_hat.
    """

    def __init__(self, phi, xi_cutoff=1e4, step=None, t_max=0.99, chunk=1 << 16, tol=1e-4):
        if phi.support_hint is None:
            raise ArgumentError("rho needs a compactly supported observable")
        lo, hi = phi.support_hint
        band = max(abs(lo), abs(hi)) + support_radius(t_max)
        self.step = float(step) if step else min(0.01, math.pi / (8.0 * band))
        self.xi_cutoff = float(xi_cutoff)
        self.xi, self.w = trapezoid_grid(self.xi_cutoff, self.step)
        self.half_idx = int(np.searchsorted(self.xi, 0.5 * self.xi_cutoff))
        self.re_hat = np.empty_like(self.xi)
        for sl in _chunks(self.xi.shape[0], chunk):
            self.re_hat[sl] = phi.fourier(self.xi[sl])[0].real
        self.chunk = chunk
        self.tol = tol

    def __call__(self, t) -> RhoValue:
        t = check_lambda(t)
        d = depth_for(t, self.xi_cutoff)
        pw = _powers(t, d)
        n = np.arange(d, dtype=np.float64)
        dpw = n * t ** np.maximum(n - 1, 0)
        parts, half_parts, errs = [], [], []
        w_half_last = 0.5 * (self.xi[1] - self.xi[0])
        for sl in _chunks(self.xi.shape[0], self.chunk):
            _, der = kernels.cos_product_dlambda(pw, dpw, self.xi[sl])
            f = self.re_hat[sl] * der
            parts.append(float(np.dot(f, self.w[sl])))
            stop = min(sl.stop, self.half_idx + 1)
            if sl.start < stop:
                w = self.w[sl.start:stop].copy()
                if stop == self.half_idx + 1:
                    w[-1] = w_half_last
                half_parts.append(float(np.dot(f[: stop - sl.start], w)))
            e = derivative_tail_error(t, self.xi[sl], d)
            errs.append(float(np.dot(np.abs(self.re_hat[sl]) * e, self.w[sl])))
        value = math.fsum(parts) / math.pi
        half = math.fsum(half_parts) / math.pi
        flag = abs(value - half) > self.tol
        return RhoValue(t, value, half, self.xi_cutoff, self.step, d, math.fsum(errs) / math.pi, flag)


def rho_eval(t, phi, xi_cutoff=1e4, step=None) -> RhoValue:
    return RhoIntegrator(phi, xi_cutoff, step, t_max=max(t, 0.5))(t)


@dataclass(frozen=True)
class RhoIntegralReport:
    a: float
    b: float
    rho_integral: float
    h_a: float
    h_b: float
    h_diff: float
    h_error: float
    discrepancy: float
    xi_cutoff: float
    step: float
    nodes: int
    cutoff_flags: int
    constant: float


RHO_LOWER = 2.0 ** (-1.0 / 3.0) + 0.01


def rho_integral_check(a, b, phi, xi_cutoff=1e4, nodes=64, step=None, h_depth=22, h_seed=0,
                       enforce_range=True) -> RhoIntegralReport:
    """Compare int_a^b rho(t) dt (Gauss-Legendre in t) with h(b) - h(a).

    h comes from :func:`bclab.measure.stratified_difference`: all words of
    length ``h_depth`` with random tails, sharing the tails between a and b.

    Raises:
        DomainError: [a, b] not inside (2^(-1/3) + 0.01, 0.99) when ``enforce_range``.
    """
    from .measure import stratified_difference, stratified_expectation

    if enforce_range and not (RHO_LOWER < a < b < 0.99):
        raise DomainError(f"[a, b] must lie in ({RHO_LOWER:.4f}, 0.99)")
    integ = RhoIntegrator(phi, xi_cutoff, step, t_max=b)
    ts, ws = gauss_legendre(a, b, nodes)
    vals = [integ(t) for t in ts]
    total = math.fsum(w * v.value for w, v in zip(ws, vals))
    ha = stratified_expectation(phi, a, h_depth, h_seed)
    hb = stratified_expectation(phi, b, h_depth, h_seed)
    d = stratified_difference(phi, a, b, h_depth, h_seed)
    return RhoIntegralReport(a, b, total, ha.value, hb.value, d.value, d.error_bound,
                             abs(total - d.value), float(xi_cutoff), integ.step, int(nodes),
                             sum(v.cutoff_flag for v in vals), phi.left)
