"""Pure numpy implementations of the hot kernels.

These define the reference semantics; ``_ckernels.pyx`` mirrors them loop
for loop so the two backends agree to the last ulp of the math library.
"""
import numpy as np

_CHUNK = 4096


def cos_product(pw, xi):
    """prod_k cos(pw[k] * xi) for every entry of ``xi``."""
    pw = np.ascontiguousarray(pw, dtype=np.float64)
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    out = np.ones_like(xi)
    for p in pw:
        out *= np.cos(p * xi)
    return out


def cos_product_dlambda(pw, dpw, xi):
    """Product and its derivative when the scales depend on a parameter.

    Returns ``(P, dP)`` with ``P = prod_k cos(pw[k] xi)`` and
    ``dP = -xi * sum_n dpw[n] sin(pw[n] xi) prod_{k != n} cos(pw[k] xi)``.
    Prefix and suffix products avoid dividing by cosines that may vanish.
    """
    pw = np.ascontiguousarray(pw, dtype=np.float64)
    dpw = np.ascontiguousarray(dpw, dtype=np.float64)
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    depth = pw.shape[0]
    val = np.empty_like(xi)
    der = np.empty_like(xi)
    for s in range(0, xi.shape[0], _CHUNK):
        x = xi[s:s + _CHUNK]
        ang = pw[:, None] * x[None, :]
        c = np.cos(ang)
        sn = np.sin(ang)
        pre = np.ones((depth + 1, x.shape[0]))
        for k in range(depth):
            pre[k + 1] = pre[k] * c[k]
        suf = np.ones(x.shape[0])
        acc = np.zeros(x.shape[0])
        for k in range(depth - 1, -1, -1):
            acc += dpw[k] * sn[k] * (pre[k] * suf)
            suf = suf * c[k]
        val[s:s + _CHUNK] = pre[depth]
        der[s:s + _CHUNK] = -x * acc
    return val, der


def signed_sums(coef):
    """All 2^B values sum_i a_i coef[i] over sign words a, first sign most significant."""
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    out = np.zeros(1)
    for c in coef:
        nxt = np.empty(2 * out.shape[0])
        nxt[0::2] = out - c
        nxt[1::2] = out + c
        out = nxt
    return out


def bit_signed_sums(bits, coef):
    """Series values for 64-letter words packed into uint64 (letter 1 is the top bit).

    ``coef`` has shape (r, 64); returns shape (r, n).
    """
    bits = np.ascontiguousarray(bits, dtype=np.uint64)
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    r = coef.shape[0]
    out = np.zeros((r, bits.shape[0]))
    for m in range(64):
        on = ((bits >> np.uint64(63 - m)) & np.uint64(1)).astype(bool)
        for j in range(r):
            c = coef[j, m]
            out[j] += np.where(on, c, -c)
    return out


def _locate(knots, x):
    return np.searchsorted(knots, x, side="right") - 1


def ppoly_eval(knots, coefs, left, right, x):
    """Evaluate a piecewise polynomial stored in normalized local coordinates.

    Piece i covers [knots[i], knots[i+1]) and equals sum_k coefs[i,k] t^k with
    t = (x - knots[i]) / (knots[i+1] - knots[i]). Constant ``left``/``right``
    outside [knots[0], knots[-1]).
    """
    knots = np.ascontiguousarray(knots, dtype=np.float64)
    coefs = np.ascontiguousarray(coefs, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    npieces, ncoef = coefs.shape
    idx = _locate(knots, x)
    inside = (idx >= 0) & (idx < npieces)
    out = np.where(idx < 0, left, right).astype(np.float64)
    j = idx[inside]
    t = (x[inside] - knots[j]) / (knots[j + 1] - knots[j])
    acc = coefs[j, ncoef - 1].copy()
    for k in range(ncoef - 2, -1, -1):
        acc = acc * t + coefs[j, k]
    out[inside] = acc
    return out


def ppoly_increment(knots, coefs, left, right, x, d):
    """phi(x + d) - phi(x) without cancellation when both points share a piece.

    Inside a piece the difference is expanded in Taylor coefficients at t,
    obtained by repeated synthetic division, so tiny ``d`` is resolved even
    when ``x + d == x`` in floating point.
    """
    knots = np.ascontiguousarray(knots, dtype=np.float64)
    coefs = np.ascontiguousarray(coefs, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    d = np.ascontiguousarray(np.broadcast_to(d, x.shape), dtype=np.float64)
    npieces, ncoef = coefs.shape
    i0 = _locate(knots, x)
    i1 = _locate(knots, x + d)
    same = (i0 == i1) & (i0 >= 0) & (i0 < npieces)
    out = np.zeros_like(x)
    cross = i0 != i1
    if cross.any():
        out[cross] = (ppoly_eval(knots, coefs, left, right, x[cross] + d[cross])
                      - ppoly_eval(knots, coefs, left, right, x[cross]))
    if same.any() and ncoef > 1:
        j = i0[same]
        w = knots[j + 1] - knots[j]
        t = (x[same] - knots[j]) / w
        dt = d[same] / w
        # Taylor coefficients of the piece at t (in place synthetic division)
        b = coefs[j].T.copy()  # shape (ncoef, m)
        for s in range(ncoef - 1):
            for k in range(ncoef - 2, s - 1, -1):
                b[k] = b[k] + t * b[k + 1]
        acc = b[ncoef - 1].copy()
        for k in range(ncoef - 2, 0, -1):
            acc = acc * dt + b[k]
        out[same] = acc * dt
    return out
