"""Eventually-constant points of the one-sided full shift and the vertex sets V_m.

A point ``(p_1 ... p_m, tail)`` stands for the infinite sequence
``p_1 p_2 ... p_m tail tail tail ...``.  Symbols are 1-based.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import SizeCapError

DEFAULT_SIZE_CAP = 200_000
SIZE_CAP_ENV = "SHIFTLAP_SIZE_CAP"


def default_size_cap() -> int:
    """Size cap for V_m enumeration, honouring the environment override."""
    raw = os.environ.get(SIZE_CAP_ENV)
    if raw is None:
        return DEFAULT_SIZE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{SIZE_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{SIZE_CAP_ENV} must be positive, got {cap}")
    return cap


def _check_symbol(s: int, N: int | None) -> None:
    if not isinstance(s, int) or isinstance(s, bool):
        raise TypeError(f"symbols must be integers, got {s!r}")
    if s < 1 or (N is not None and s > N):
        bound = "N" if N is None else str(N)
        raise ValueError(f"symbol {s} out of range 1..{bound}")


@dataclass(frozen=True, order=False)
class Point:
    """Canonical (prefix, tail) form of an eventually-constant sequence.

    Construct through :func:`canonicalize` or :meth:`parse`; the constructor
    rejects non-canonical input rather than silently fixing it.
    """

    prefix: tuple[int, ...]
    tail: int

    def __post_init__(self) -> None:
        if not isinstance(self.prefix, tuple):
            object.__setattr__(self, "prefix", tuple(self.prefix))
        for s in self.prefix:
            _check_symbol(s, None)
        _check_symbol(self.tail, None)
        if self.prefix and self.prefix[-1] == self.tail:
            raise ValueError(
                f"non-canonical point: last prefix symbol equals tail {self.tail}"
            )

    @property
    def level(self) -> int:
        return len(self.prefix)

    def symbol(self, i: int) -> int:
        """The i-th coordinate (1-based) of the full sequence."""
        if i < 1:
            raise IndexError("coordinates are 1-based")
        return self.prefix[i - 1] if i <= len(self.prefix) else self.tail

    def word(self, n: int) -> tuple[int, ...]:
        """The first ``n`` coordinates."""
        return tuple(self.symbol(i) for i in range(1, n + 1))

    def shift(self) -> "Point":
        """The left shift sigma(p)."""
        if not self.prefix:
            return self
        return Point(self.prefix[1:], self.tail)

    def label(self) -> str:
        return "-".join(map(str, self.prefix)) + "." + str(self.tail)

    __str__ = label

    @classmethod
    def parse(cls, text: str, N: int | None = None) -> "Point":
        """Parse the ``"1-2.1"`` / ``".3"`` text format."""
        text = text.strip()
        head, dot, tail = text.rpartition(".")
        if not dot or not tail:
            raise ValueError(f"malformed point {text!r}: expected 'a-b-c.t' or '.t'")
        try:
            prefix = [int(s) for s in head.split("-")] if head else []
            t = int(tail)
        except ValueError:
            raise ValueError(f"malformed point {text!r}: symbols must be integers") from None
        return canonicalize(prefix, t, N)


def canonicalize(prefix: Iterable[int], tail: int, N: int | None = None) -> Point:
    """Absorb trailing prefix symbols equal to ``tail`` into the tail."""
    p = list(prefix)
    for s in p:
        _check_symbol(s, N)
    _check_symbol(tail, N)
    while p and p[-1] == tail:
        p.pop()
    return Point(tuple(p), tail)


def boundary_point(s: int) -> Point:
    return Point((), s)


@dataclass(frozen=True)
class Cylinder:
    """Initial-coordinate cylinder ``[w_1 ... w_m]``."""

    word: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "word", tuple(self.word))
        if not self.word:
            raise ValueError("cylinder word must be nonempty")
        for s in self.word:
            _check_symbol(s, None)

    def __contains__(self, p: Point) -> bool:
        return p.word(len(self.word)) == self.word


def measure(c: Cylinder, N: int) -> Fraction:
    """Equidistributed Bernoulli measure of a cylinder: ``1/N^m``."""
    for s in c.word:
        _check_symbol(s, N)
    return Fraction(1, N ** len(c.word))


def distance(x: Point, y: Point) -> Fraction:
    """``2**-rho`` with rho the first (1-based) index where x and y differ."""
    if x == y:
        return Fraction(0)
    # Canonical forms differ, so the sequences differ within max level + 1.
    n = max(x.level, y.level) + 1
    for i in range(1, n + 1):
        if x.symbol(i) != y.symbol(i):
            return Fraction(1, 2**i)
    raise AssertionError("distinct canonical points must differ within max level + 1")


def related(p: Point, q: Point, i: int) -> bool:
    """Whether p and q, both in V_i, are i-related."""
    return p.level <= i and q.level <= i and p.word(i) == q.word(i)


def deleted_neighborhood(p: Point, i: int, N: int) -> frozenset[Point]:
    """The N-1 points of V_i that are i-related to ``p``, excluding ``p``."""
    if i < p.level:
        raise ValueError(f"i={i} is below level({p})={p.level}")
    w = p.word(i)
    out = frozenset(canonicalize(w, l, N) for l in range(1, N + 1)) - {p}
    assert len(out) == N - 1
    return out


def designated_neighbor(p: Point) -> Point:
    """For p of level m >= 1, the unique member of its deleted neighbourhood in V_{m-1}.

    This is ``(p_1 ... p_{m-1}, p_m repeated)``.
    """
    if p.level == 0:
        raise ValueError("boundary points have no lower-level neighbour")
    return canonicalize(p.prefix[:-1], p.prefix[-1])


def chain_to_boundary(p: Point) -> list[Point]:
    """Chain ``r^0, r^{n_1}, ..., p`` joining the boundary to ``p``.

    ``r^0`` is the constant sequence on ``p_1``; each ``r^{n_i}`` cuts ``p``
    at a position where consecutive symbols change.
    """
    chain = [boundary_point(p.symbol(1))]
    for n in change_positions(p, 0, p.level):
        chain.append(Point(p.word(n), p.symbol(n + 1)))
    return chain


def change_positions(p: Point, lo: int, hi: int) -> list[int]:
    """Positions n in (lo, hi] with ``p_n != p_{n+1}``."""
    return [n for n in range(max(lo, 0) + 1, hi + 1) if p.symbol(n) != p.symbol(n + 1)]


@dataclass(frozen=True)
class LevelSet:
    """The ordered vertex set V_m with position lookup."""

    N: int
    m: int
    points: tuple[Point, ...]
    index: dict[Point, int] = field(repr=False, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, k: int) -> Point:
        return self.points[k]

    def level_slice(self, n: int) -> slice:
        """Index range of the points of level exactly ``n``."""
        lo = 0 if n == 0 else self.N**n
        return slice(lo, self.N ** (n + 1))


def enumerate_level_set(N: int, m: int, size_cap: int | None = None) -> LevelSet:
    """V_m in canonical order.

    V_{m-1} comes first, unchanged; the new level-m points follow, sorted by
    the position of their left shift in V_{m-1}, then by first symbol.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    cap = default_size_cap() if size_cap is None else size_cap
    if N ** (m + 1) > cap:
        raise SizeCapError(f"|V_{m}| = {N}^{m + 1} = {N ** (m + 1)} exceeds size cap {cap}")
    return _enumerate(N, m)


@lru_cache(maxsize=64)
def _enumerate(N: int, m: int) -> LevelSet:
    if m == 0:
        pts = tuple(boundary_point(s) for s in range(1, N + 1))
    else:
        prev = _enumerate(N, m - 1)
        fresh = []
        # Level-m points are exactly sigma_l(q) for q of level m-1; at m = 1
        # the prepended symbol must differ from the tail.
        start = prev.level_slice(m - 1).start
        for k in range(start, len(prev)):
            q = prev.points[k]
            for l in range(1, N + 1):
                if m > 1 or l != q.tail:
                    fresh.append((k, l, Point((l,) + q.prefix, q.tail)))
        fresh.sort(key=lambda t: (t[0], t[1]))
        pts = prev.points + tuple(t[2] for t in fresh)
    return LevelSet(N, m, pts, {p: i for i, p in enumerate(pts)})


def restrict_word(seq: Sequence[int], depth: int, N: int | None = None) -> Point:
    """Truncate a finite symbol sequence to the V_depth point ``(s_1..s_depth, s_{depth+1} repeated)``."""
    if len(seq) < depth + 1:
        raise ValueError(f"need at least {depth + 1} symbols to truncate at depth {depth}")
    return canonicalize(seq[:depth], seq[depth], N)
