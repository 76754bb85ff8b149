"""Sign words, the random power series X(lambda; a) and cylinder geometry.

A sign word ``a = (a_1, ..., a_m)`` with entries in {-1, +1} codes a point of
the symbolic space. The series

    X(lam; a)  = sum_{m>=1} a_m lam^(m-1)
    X1(lam; a) = d/dlam X = sum_{m>=1} m a_{m+1} lam^(m-1)
    X2(lam; a) = d^2/dlam^2 X

pushes the fair-coin measure forward to the Bernoulli convolution. Letter -1
is the map f1(x) = lam*x - 1 and letter +1 is f2(x) = lam*x + 1.

Words of length D are indexed by integers in [0, 2^D) with a_1 as the most
significant bit (bit set means +1). For lam < 1/2 this index order is also
the left-to-right order of the cylinders.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .errors import ArgumentError, DomainError

LAMBDA_MIN = 1e-6
LAMBDA_MAX = 1.0 - 1e-6
DEFAULT_DEPTH = 64
LOW_BLOCK_BITS = 16


def check_lambda(lam: float, upper: float = LAMBDA_MAX) -> float:
    lam = float(lam)
    if not (LAMBDA_MIN <= lam <= upper) or not math.isfinite(lam):
        raise DomainError(f"lambda={lam!r} outside [{LAMBDA_MIN}, {upper}]")
    return lam


@dataclass(frozen=True)
class SignWord:
    """Finite prefix a_1..a_m of a sign sequence. The empty word is valid."""

    signs: tuple[int, ...] = ()

    def __post_init__(self):
        s = tuple(int(v) for v in self.signs)
        for v in s:
            if v not in (-1, 1):
                raise ArgumentError(f"sign word entries must be -1 or +1, got {v}")
        object.__setattr__(self, "signs", s)

    @classmethod
    def from_string(cls, text: str) -> "SignWord":
        """'++-' style constructor."""
        table = {"+": 1, "-": -1}
        try:
            return cls(tuple(table[ch] for ch in text))
        except KeyError as exc:
            raise ArgumentError(f"bad sign character {exc.args[0]!r}") from None

    @classmethod
    def from_index(cls, index: int, length: int) -> "SignWord":
        if not 0 <= index < (1 << length):
            raise ArgumentError(f"index {index} out of range for length {length}")
        return cls(tuple(1 if (index >> (length - 1 - i)) & 1 else -1 for i in range(length)))

    def index(self) -> int:
        out = 0
        for v in self.signs:
            out = (out << 1) | (v > 0)
        return out

    def extend(self, *signs: int) -> "SignWord":
        return SignWord(self.signs + tuple(signs))

    def __len__(self):
        return len(self.signs)

    def __iter__(self):
        return iter(self.signs)

    def __str__(self):
        return "".join("+" if v > 0 else "-" for v in self.signs)


@dataclass(frozen=True)
class SeriesEval:
    x: float
    x1: float
    x2: float
    tail_x: float
    tail_x1: float
    tail_x2: float
    depth: int


def tail_bounds(lam: float, depth: int) -> tuple[float, float, float]:
    """Sup of the omitted parts of X, X1, X2 after ``depth`` letters.

    These are lam^D/(1-lam) and its first two lambda-derivatives.
    """
    d = depth
    q = 1.0 - lam
    p = lam ** d
    p1 = lam ** (d - 1) if d >= 1 else 0.0
    p2 = lam ** (d - 2) if d >= 2 else 0.0
    t0 = p / q
    t1 = d * p1 / q + p / q ** 2
    t2 = d * (d - 1) * p2 / q + 2 * d * p1 / q ** 2 + 2 * p / q ** 3
    return t0, t1, t2


def series_coefficients(lam: float, depth: int) -> np.ndarray:
    """Rows c0, c1, c2: coefficient of a_{i+1} in X, X1, X2 (shape (3, depth))."""
    i = np.arange(depth, dtype=np.float64)
    c0 = lam ** i
    c1 = i * lam ** np.maximum(i - 1, 0)
    c2 = i * (i - 1) * lam ** np.maximum(i - 2, 0)
    return np.vstack([c0, c1, c2])


def power_increments(lam: float, eps: float, depth: int) -> np.ndarray:
    """(lam+eps)^i - lam^i for i < depth, computed without cancellation."""
    i = np.arange(depth, dtype=np.float64)
    return lam ** i * np.expm1(i * math.log1p(eps / lam))


def _continuation(word: SignWord, depth: int, rule) -> list[int]:
    need = depth - len(word)
    if isinstance(rule, str):
        if rule == "plus":
            return [1] * need
        if rule == "minus":
            return [-1] * need
        if rule == "alternate":
            last = word.signs[-1] if len(word) else -1
            out = []
            for _ in range(need):
                last = -last
                out.append(last)
            return out
        raise ArgumentError(f"unknown continuation rule {rule!r}")
    tail = [int(v) for v in rule]
    if len(tail) < need:
        raise ArgumentError(f"continuation supplies {len(tail)} letters, need {need}")
    if any(v not in (-1, 1) for v in tail[:need]):
        raise ArgumentError("continuation entries must be -1 or +1")
    return tail[:need]


def eval_series(lam: float, word: SignWord | Sequence[int] = (), depth: int = DEFAULT_DEPTH,
                continuation="plus") -> SeriesEval:
    """Partial sums of X, X1, X2 through ``depth`` letters with rigorous tail bounds.

    Args:
        lam: contraction ratio in [1e-6, 1-1e-6].
        word: the leading letters.
        depth: number of letters summed.
        continuation: "plus", "minus", "alternate" or an explicit sign sequence
            used to extend ``word`` up to ``depth`` letters.

    Raises:
        DomainError: lambda out of range.
        ArgumentError: depth shorter than the word.
    """
    lam = check_lambda(lam)
    if not isinstance(word, SignWord):
        word = SignWord(tuple(word))
    depth = int(depth)
    if depth < 1 or depth < len(word):
        raise ArgumentError(f"depth {depth} shorter than word length {len(word)}")
    signs = list(word.signs) + _continuation(word, depth, continuation)
    c = series_coefficients(lam, depth)
    vals = [math.fsum(s * v for s, v in zip(signs, row)) for row in c]
    t0, t1, t2 = tail_bounds(lam, depth)
    return SeriesEval(vals[0], vals[1], vals[2], t0, t1, t2, depth)


@dataclass(frozen=True)
class Cylinder:
    word: SignWord
    lam: float
    lo: float
    hi: float

    @property
    def level(self) -> int:
        return len(self.word)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def mass(self) -> float:
        return 2.0 ** (-self.level)

    def contains(self, other: "Cylinder") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


def support_radius(lam: float) -> float:
    return 1.0 / (1.0 - lam)


def cylinder_of(lam: float, word: SignWord | Sequence[int] = ()) -> Cylinder:
    """Image of K_lam = [-1/(1-lam), 1/(1-lam)] under f_{w_1} o ... o f_{w_m}.

    The composition is affine: x -> sum_i w_i lam^(i-1) + lam^m x.
    """
    lam = check_lambda(lam)
    if not isinstance(word, SignWord):
        word = SignWord(tuple(word))
    m = len(word)
    center = math.fsum(s * lam ** i for i, s in enumerate(word.signs))
    half = lam ** m * support_radius(lam)
    return Cylinder(word, lam, center - half, center + half)


def cylinder_gap(lam: float, level: int) -> float:
    """Lower bound d_l on the distance between distinct level-l cylinders (lam < 1/2)."""
    lam = check_lambda(lam)
    if lam >= 0.5:
        raise DomainError("cylinders are separated only for lambda < 1/2")
    if level < 1:
        raise ArgumentError("level must be >= 1")
    return 2.0 * lam ** (level - 1) * (1.0 - 2.0 * lam) / (1.0 - lam)


def level_intervals(lam: float, level: int, prefix: SignWord | Sequence[int] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints of all level-``level`` cylinders extending ``prefix``, in word-index order."""
    lam = check_lambda(lam)
    if not isinstance(prefix, SignWord):
        prefix = SignWord(tuple(prefix))
    p = len(prefix)
    if level < p:
        raise ArgumentError("level shorter than prefix")
    if level - p > 26:
        from .errors import ResourceError
        raise ResourceError("more than 2^26 cylinders requested")
    base = math.fsum(s * lam ** i for i, s in enumerate(prefix.signs))
    coef = lam ** np.arange(p, level, dtype=np.float64)
    centers = base + kernels.signed_sums(coef)
    half = lam ** level * support_radius(lam)
    return centers - half, centers + half


# --- exhaustive enumeration -------------------------------------------------

@dataclass(frozen=True)
class WordBlock:
    """Series values for the contiguous word indices [start, start + size)."""

    start: int
    values: np.ndarray  # shape (r, size), rows follow the requested coefficient rows

    @property
    def size(self) -> int:
        return self.values.shape[1]


def iter_word_blocks(coef: np.ndarray, chunk_words: int = 1 << 18) -> Iterator[WordBlock]:
    """Enumerate sum_i a_i coef[r, i] over all 2^D sign words, block by block.

    The low ``LOW_BLOCK_BITS`` letters are tabulated once and combined with the
    prefix sums, so each block costs a single broadcast addition.
    """
    coef = np.atleast_2d(np.asarray(coef, dtype=np.float64))
    depth = coef.shape[1]
    low = min(depth, LOW_BLOCK_BITS)
    p = depth - low
    pre = np.vstack([kernels.signed_sums(row[:p]) for row in coef])
    tab = np.vstack([kernels.signed_sums(row[p:]) for row in coef])
    per = max(1, chunk_words >> low)
    n_pre = pre.shape[1]
    for q0 in range(0, n_pre, per):
        q1 = min(n_pre, q0 + per)
        vals = (pre[:, q0:q1, None] + tab[:, None, :]).reshape(coef.shape[0], -1)
        yield WordBlock(q0 << low, vals)


# --- lower bounds on X1 from a forced sign prefix ---------------------------

def x1_threshold_classic(delta: float) -> tuple[int, float]:
    """(m, delta') with m >= 10, sum_{n>=m} n(1-delta)^(n-1) < 1/2 and delta' = delta^(m-1)/2.

    For lam in (delta, 1-delta), x > 1/(1-lam) - delta' forces x1 > 1/2.
    """
    if not 0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    r = 1.0 - delta
    m = 10
    while True:
        # closed form of sum_{n>=m} n r^(n-1)
        tail = r ** (m - 1) * (m - (m - 1) * r) / (1.0 - r) ** 2
        if tail < 0.5:
            return m, delta ** (m - 1) / 2.0
        m += 1


def _head_sum(lam: float, m: int) -> float:
    return math.fsum(n * lam ** (n - 1) for n in range(1, m))


def forced_prefix_length(lam_lo: float, lam_hi: float) -> int:
    """Smallest m such that a_1 = ... = a_m = +1 forces X1 > 1/2 on [lam_lo, lam_hi].

    With the first m letters equal to +1, X1 >= sum_{n<m} n lam^(n-1) - sum_{n>=m} n lam^(n-1);
    the head increases and the tail increases in lam, so evaluating the head at
    lam_lo and the tail at lam_hi gives a bound valid on the whole window.
    """
    check_lambda(lam_lo)
    check_lambda(lam_hi)
    for m in range(1, 200):
        head = _head_sum(lam_lo, m)
        tail = 1.0 / (1.0 - lam_hi) ** 2 - _head_sum(lam_hi, m)
        if head - tail > 0.5:
            return m
    raise DomainError("no finite forced prefix; window too close to 1")


def forced_prefix_margin(lam_lo: float, lam_hi: float, m: int, lam_ref: float) -> float:
    """Distance D below 1/(1-lam_ref) such that x > 1/(1-lam_ref) - D forces the first m letters to be +1.

    A -1 among the first m letters gives x <= 1/(1-lam) - 2 lam^(m-1); over the
    window this is at most 1/(1-lam_hi) - 2 lam_lo^(m-1).
    """
    return 2.0 * lam_lo ** (m - 1) - (1.0 / (1.0 - lam_hi) - 1.0 / (1.0 - lam_ref))


def words(length: int) -> Iterable[SignWord]:
    for idx in range(1 << length):
        yield SignWord.from_index(idx, length)
