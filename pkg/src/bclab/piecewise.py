"""Piecewise polynomials in normalized local coordinates.

Piece ``i`` lives on [knots[i], knots[i+1]) and is stored as
sum_k coefs[i, k] t^k with t = (x - knots[i]) / width_i in [0, 1). Keeping
the local variable on [0, 1] keeps Horner evaluation well conditioned even
for pieces of width 1e-12 sitting at x ~ 1.5, which the dimension-drop and
GBM observables produce. Outside the knot span the function is constant.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ArgumentError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_GL_T = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS
_OMEGA_SWITCH = 8.0


def _as_array(x):
    arr = np.asarray(x, dtype=np.float64)
    return arr.reshape(-1), arr.shape


class PiecewisePolynomial:
    """Immutable piecewise polynomial with constant extension.

    Args:
        knots: strictly increasing breakpoints, length K+1.
        coefs: array (K, d+1) of local coefficients, lowest degree first.
        left, right: constant values outside [knots[0], knots[-1]).
    """

    __slots__ = ("knots", "coefs", "left", "right")

    def __init__(self, knots, coefs, left=0.0, right=0.0):
        knots = np.array(knots, dtype=np.float64)
        coefs = np.array(coefs, dtype=np.float64)
        if coefs.ndim != 2 or knots.ndim != 1 or knots.shape[0] != coefs.shape[0] + 1:
            raise ArgumentError("need len(knots) == len(coefs) + 1")
        if np.any(np.diff(knots) <= 0):
            raise ArgumentError("knots must be strictly increasing")
        if coefs.shape[1] < 2:
            coefs = np.hstack([coefs, np.zeros((coefs.shape[0], 2 - coefs.shape[1]))])
        knots.setflags(write=False)
        coefs.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "left", float(left))
        object.__setattr__(self, "right", float(right))

    def __setattr__(self, name, value):
        raise AttributeError("PiecewisePolynomial is immutable")

    @classmethod
    def from_pieces(cls, pieces, left=0.0, right=0.0):
        """Build from ``[(a, b, coefs), ...]`` with contiguous, increasing [a, b].

        Pieces of zero width (possible after rounding of tiny ramps) are dropped.
        """
        pieces = [p for p in pieces if p[1] > p[0]]
        if not pieces:
            raise ArgumentError("no pieces of positive width")
        deg = max(len(p[2]) for p in pieces)
        knots = [pieces[0][0]]
        rows = []
        for a, b, c in pieces:
            if a != knots[-1]:
                raise ArgumentError("pieces must be contiguous")
            knots.append(b)
            rows.append(list(c) + [0.0] * (deg - len(c)))
        return cls(knots, rows, left, right)

    @property
    def n_pieces(self):
        return self.coefs.shape[0]

    @property
    def widths(self):
        return np.diff(self.knots)

    @property
    def span(self):
        return float(self.knots[0]), float(self.knots[-1])

    def __call__(self, x):
        flat, shape = _as_array(x)
        out = kernels.ppoly_eval(self.knots, self.coefs, self.left, self.right, flat)
        return out.reshape(shape) if shape else float(out[0])

    def increment(self, x, d):
        """f(x + d) - f(x), accurate even when d is far below the spacing of floats at x."""
        flat, shape = _as_array(x)
        dflat = np.broadcast_to(np.asarray(d, dtype=np.float64), shape).reshape(-1)
        out = kernels.ppoly_increment(self.knots, self.coefs, self.left, self.right, flat, dflat)
        return out.reshape(shape) if shape else float(out[0])

    def derivative(self, order=1):
        if order == 0:
            return self
        c = self.coefs
        w = self.widths[:, None]
        for _ in range(order):
            k = np.arange(1, c.shape[1], dtype=np.float64)
            c = c[:, 1:] * k[None, :] / w
        return PiecewisePolynomial(self.knots, c, 0.0, 0.0)

    def piece_integrals(self):
        k = np.arange(self.coefs.shape[1], dtype=np.float64)
        return self.widths * (self.coefs / (k + 1.0)).sum(axis=1)

    def antiderivative(self, left_value=0.0):
        """Integral from -infinity (value ``left_value`` left of the knots)."""
        if self.left != 0.0:
            raise ArgumentError("antiderivative of a non-zero left constant is unbounded")
        k = np.arange(self.coefs.shape[1], dtype=np.float64)
        w = self.widths[:, None]
        body = self.coefs / (k + 1.0) * w
        offsets = left_value + np.concatenate([[0.0], np.cumsum(self.piece_integrals())])
        c = np.hstack([offsets[:-1, None], body])
        if self.right != 0.0:
            raise ArgumentError("antiderivative of a non-zero right constant is unbounded")
        return PiecewisePolynomial(self.knots, c, left_value, offsets[-1])

    def scaled(self, factor):
        return PiecewisePolynomial(self.knots, self.coefs * factor, self.left * factor, self.right * factor)

    # -- sup norms ---------------------------------------------------------
    def piece_sup_abs(self):
        """Exact max of |f| over each closed piece."""
        c = self.coefs
        ends = np.maximum(np.abs(c[:, 0]), np.abs(c.sum(axis=1)))
        out = ends.copy()
        curved = np.any(c[:, 2:] != 0.0, axis=1)
        if curved.any():
            rows, inv = np.unique(c[curved], axis=0, return_inverse=True)
            best = np.empty(rows.shape[0])
            for r, row in enumerate(rows):
                der = np.polynomial.polynomial.polyder(row)
                roots = np.polynomial.polynomial.polyroots(der) if np.any(der[1:] != 0) else np.array([])
                cand = [0.0, 1.0] + [z.real for z in np.atleast_1d(roots)
                                     if abs(z.imag) < 1e-12 and 0.0 < z.real < 1.0]
                best[r] = np.max(np.abs(np.polynomial.polynomial.polyval(cand, row)))
            out[curved] = np.maximum(ends[curved], best[inv.reshape(-1)])
        return out

    def sup_abs(self, lo=-np.inf, hi=np.inf):
        """Max of |f| over [lo, hi], using whole pieces that meet the interval (so never an underestimate)."""
        vals = []
        if lo < self.knots[0]:
            vals.append(abs(self.left))
        if hi >= self.knots[-1]:
            vals.append(abs(self.right))
        meet = (self.knots[1:] >= lo) & (self.knots[:-1] <= hi)
        if meet.any():
            vals.append(float(np.max(self.piece_sup_abs()[meet])))
        return max(vals) if vals else 0.0

    # -- Fourier transform -------------------------------------------------
    def fourier(self, xi, chunk=1 << 20):
        """Exact integral of (f - c) e^{-i xi x} over the knot span, where c = self.left.

        Requires left == right so that f - c is compactly supported.
        """
        if self.left != self.right:
            raise ArgumentError("Fourier transform needs equal constants on both sides")
        xi_flat, shape = _as_array(xi)
        c = self.coefs.copy()
        c[:, 0] -= self.left
        a = self.knots[:-1]
        w = self.widths
        npieces = c.shape[0]
        out = np.empty(xi_flat.shape[0], dtype=np.complex128)
        step = max(1, chunk // max(npieces, 1))
        for s in range(0, xi_flat.shape[0], step):
            z = xi_flat[s:s + step]
            omega = w[:, None] * z[None, :]
            mom = _moments(omega, c.shape[1] - 1)
            inner = np.einsum("pk,kpz->pz", c, mom)
            phase = np.exp(-1j * (a[:, None] * z[None, :]))
            out[s:s + step] = (w[:, None] * phase * inner).sum(axis=0)
        return out.reshape(shape) if shape else complex(out[0])


def _moments(omega, deg):
    """I_k(omega) = int_0^1 t^k exp(-i omega t) dt for k = 0..deg, shape (deg+1, *omega.shape)."""
    out = np.empty((deg + 1,) + omega.shape, dtype=np.complex128)
    small = np.abs(omega) <= _OMEGA_SWITCH
    if small.any():
        om = omega[small]
        e = np.exp(-1j * om[:, None] * _GL_T[None, :]) * _GL_W[None, :]
        tp = np.ones_like(_GL_T)
        for k in range(deg + 1):
            out[k][small] = e @ tp
            tp = tp * _GL_T
    big = ~small
    if big.any():
        s = -1j * omega[big]
        es = np.exp(s)
        prev = (es - 1.0) / s
        out[0][big] = prev
        for k in range(1, deg + 1):
            prev = (es - k * prev) / s
            out[k][big] = prev
    return out


def smoothstep_coefs():
    """6t^5 - 15t^4 + 10t^3, lowest degree first."""
    return [0.0, 0.0, 0.0, 10.0, -15.0, 6.0]


def smoothstep_down_coefs():
    """1 - smoothstep(t)."""
    return [1.0, 0.0, 0.0, -10.0, 15.0, -6.0]
