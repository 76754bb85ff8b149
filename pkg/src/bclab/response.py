"""The response map h(lam) = E phi(X(lam)) and its derivatives.

h'  = E[phi'(X) X1]
h'' = E[phi''(X) X1^2 + phi'(X) X2]

Difference quotients use common coding: both endpoints see the same sign
words, and phi(X(lam+eps)) - phi(X(lam)) is evaluated as a single increment,
so steps far below float spacing near lam still give meaningful quotients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, CapabilityError
from .measure import (
    ExpectationResult, check_depth, exact_expectation, mc_average, mc_expectation, rounding_error,
    truncation_error, word_average,
)
from .symbolic import check_lambda, power_increments, series_coefficients, support_radius, tail_bounds


@dataclass(frozen=True)
class ResponsePoint:
    lam: float
    h: ExpectationResult
    h_prime: ExpectationResult | None = None
    h_second: ExpectationResult | None = None


def _modulus(phi, delta, order, r):
    return phi.modulus(delta, -r, r, order)


def derivative_errors(phi, lam, depth):
    """Truncation bounds for h' and h'' at the given depth.

    Uses |X1| <= 1/(1-lam)^2, |X2| <= 2/(1-lam)^3 and the tail sups T0, T1, T2.
    """
    t0, t1, t2 = tail_bounds(lam, depth)
    r = support_radius(lam)
    s1 = 1.0 / (1.0 - lam) ** 2
    s2 = 2.0 / (1.0 - lam) ** 3
    d1 = phi.sup_abs(1, -r, r)
    e1 = _modulus(phi, t0, 1, r) * s1 + d1 * t1
    e2 = None
    if phi.smooth_order >= 2:
        d2 = phi.sup_abs(2, -r, r)
        e2 = (_modulus(phi, t0, 2, r) * s1 * s1 + d2 * (2.0 * s1 * t1 + t1 * t1)
              + _modulus(phi, t0, 1, r) * s2 + d1 * t2)
        e2 = float(e2)
    return float(e1), e2


def response(phi, lam, order=2, depth=22, mode="exact", n=1 << 20, seed=0) -> ResponsePoint:
    """h and, up to ``order`` and phi's smoothness, its lambda-derivatives.

    Raises:
        CapabilityError: a derivative beyond phi's smoothness class was requested.
    """
    lam = check_lambda(lam)
    if order > phi.smooth_order:
        raise CapabilityError(f"h^({order}) needs a C{order} observable; phi is {phi.smoothness}")
    if mode == "exact":
        depth = check_depth(depth)
        h = exact_expectation(phi, lam, depth)
        if order == 0:
            return ResponsePoint(lam, h)
        e1, e2 = derivative_errors(phi, lam, depth)
        coef = series_coefficients(lam, depth)
        v1 = word_average(coef[:2], lambda v: phi.derivative(v[0], 1) * v[1])
        hp = ExpectationResult(v1, e1 + rounding_error(phi, lam), "exact-enumeration", depth)
        if order == 1:
            return ResponsePoint(lam, h, hp)
        v2 = word_average(coef, lambda v: phi.derivative(v[0], 2) * v[1] ** 2 + phi.derivative(v[0], 1) * v[2])
        hs = ExpectationResult(v2, e2 + rounding_error(phi, lam), "exact-enumeration", depth)
        return ResponsePoint(lam, h, hp, hs)
    if mode in ("mc", "monte-carlo"):
        h = mc_expectation(phi, lam, n, seed)
        out = [h]
        if order >= 1:
            m, sd = mc_average(lam, n, seed, lambda v: phi.derivative(v[0], 1) * v[1], rows=(0, 1))
            out.append(ExpectationResult(m, 4 * sd / math.sqrt(n), "monte-carlo", n, seed, sd))
        if order >= 2:
            m, sd = mc_average(lam, n, seed,
                               lambda v: phi.derivative(v[0], 2) * v[1] ** 2 + phi.derivative(v[0], 1) * v[2],
                               rows=(0, 1, 2))
            out.append(ExpectationResult(m, 4 * sd / math.sqrt(n), "monte-carlo", n, seed, sd))
        return ResponsePoint(lam, *out)
    raise ArgumentError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# difference quotients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffQuotient:
    lam: float
    eps: float
    value: float
    error_bound: float
    depth: int


def mean_increment(phi, lam, eps, depth):
    """E[phi(X_D(lam + eps)) - phi(X_D(lam))] over all 2^depth words."""
    coef = np.vstack([series_coefficients(lam, depth)[0], power_increments(lam, eps, depth)])
    return word_average(coef, lambda v: phi.increment(v[0], v[1]))


def diff_quotient(phi, lam, eps, depth=22) -> DiffQuotient:
    """(h(lam + eps) - h(lam)) / eps by common-coding exact enumeration.

    Raises:
        ArgumentError: eps == 0.
    """
    lam = check_lambda(lam)
    eps = float(eps)
    if eps == 0.0:
        raise ArgumentError("eps must be non-zero")
    check_lambda(lam + eps)
    depth = check_depth(depth)
    inc = mean_increment(phi, lam, eps, depth)
    err = (truncation_error(phi, lam, depth) + truncation_error(phi, lam + eps, depth)) / abs(eps)
    if phi.smooth_order >= 1:
        # the increment is the integral of h' over the step; tails grow with lambda
        err = min(err, derivative_errors(phi, max(lam, lam + eps), depth)[0])
    return DiffQuotient(lam, eps, inc / eps, float(err), depth)


@dataclass
class ScanRow:
    k: int
    eps: float
    quotient: float
    error_bound: float
    N: int | None = None
    S: float | None = None
    T: float | None = None
    R: float | None = None
    S_bound: float | None = None
    R_bound: float | None = None
    R_bound_scale: float | None = None
    identity_residual: float | None = None


@dataclass
class ScanTable:
    lam0: float
    depth: int
    rows: list = field(default_factory=list)

    COLUMNS = ("k", "N_k", "eps_k", "S_k", "T_k", "R_k", "quotient", "error_bound", "S_bound", "R_bound",
               "R_bound_scale", "identity_residual")

    def as_records(self):
        return [{"k": r.k, "N_k": r.N, "eps_k": r.eps, "S_k": r.S, "T_k": r.T, "R_k": r.R,
                 "quotient": r.quotient, "error_bound": r.error_bound, "S_bound": r.S_bound,
                 "R_bound": r.R_bound, "R_bound_scale": r.R_bound_scale,
                 "identity_residual": r.identity_residual} for r in self.rows]

    @property
    def quotients(self):
        return [r.quotient for r in self.rows]

    def monotone_increasing(self):
        q = self.quotients
        return all(b > a for a, b in zip(q, q[1:]))


def blowup_scan(phi, lam0, eps_seq, depth=22, layers=None, scales=None, beta=None) -> ScanTable:
    """Quotients of phi along a strictly decreasing eps ladder.

    With ``layers`` (observables summing to phi, one per rung) row k also
    splits the quotient into S_k (layers before k), T_k (layer k) and R_k
    (layers after k) and records the residual of S_k + T_k + R_k against the
    direct quotient. Reference bounds: |S_k| <= sum_{l<k} sup|phi_l'| / (1-lam)^2
    (mean value theorem) and |R_k| <= (2/eps_k) sum_{l>k} sup|phi_l|; with
    ``scales`` and ``beta`` the scale form (2/eps_k) sum_{l>k} N_l^-beta is
    reported as well.
    """
    eps_seq = [float(e) for e in eps_seq]
    if any(e <= 0 for e in eps_seq) or any(b >= a for a, b in zip(eps_seq, eps_seq[1:])):
        raise ArgumentError("eps_seq must be positive and strictly decreasing")
    lam0 = check_lambda(lam0)
    depth = check_depth(depth)
    table = ScanTable(lam0, depth)
    if layers is not None:
        d1 = [layer.sup_abs(1) for layer in layers]
        d0 = [layer.sup_abs(0) for layer in layers]
    for k, eps in enumerate(eps_seq, start=1):
        q = diff_quotient(phi, lam0, eps, depth)
        row = ScanRow(k, eps, q.value, q.error_bound)
        if layers is not None:
            parts = [mean_increment(layer, lam0, eps, depth) / eps for layer in layers]
            i = k - 1
            row.S = math.fsum(parts[:i])
            row.T = parts[i] if i < len(parts) else 0.0
            row.R = math.fsum(parts[i + 1:])
            row.identity_residual = abs(row.S + row.T + row.R - q.value)
            row.S_bound = math.fsum(d1[:i]) / (1.0 - lam0 - eps) ** 2
            row.R_bound = 2.0 / eps * math.fsum(d0[i + 1:])
            if scales is not None:
                row.N = int(scales[i]) if i < len(scales) else None
                if beta is not None:
                    row.R_bound_scale = 2.0 / eps * math.fsum(float(n) ** -beta for n in scales[i + 1:])
        table.rows.append(row)
    return table


# ---------------------------------------------------------------------------
# genericity
# ---------------------------------------------------------------------------

@dataclass
class GenericityRow:
    n: int
    eps: float
    q_f: float
    q_phi: float
    q_sum: float
    certified: bool
    lower_bound: float
    holds: bool | None


def genericity_perturbation(f, phi, kappa, eps_seq, lam0, depth=22):
    """Quotients of f + kappa phi along eps_seq.

    Step n counts as certified when the quotient of phi exceeds n^2; on
    certified steps with |q_f| <= n the perturbed quotient must be at least
    kappa n^2 - n.
    """
    if kappa < 0:
        raise ArgumentError("kappa must be >= 0")
    g = f + phi.scaled(kappa) if kappa != 0 else f
    rows = []
    for n, eps in enumerate(eps_seq, start=1):
        qf = diff_quotient(f, lam0, eps, depth).value
        qp = diff_quotient(phi, lam0, eps, depth).value
        qs = diff_quotient(g, lam0, eps, depth).value
        cert = qp > n * n
        lb = kappa * n * n - n
        holds = (qs >= lb) if (cert and abs(qf) <= n) else None
        rows.append(GenericityRow(n, float(eps), qf, qp, qs, cert, lb, holds))
    return rows
