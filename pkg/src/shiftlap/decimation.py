"""Spectral decimation for the Dirichlet problem on V_m.

Eigenvalues of H_{m-1} and H_m are linked by ``t^2 - (N + x) t + x = 0``;
each level contributes the two localized eigenvalues 1 and N, and every
older eigenvalue splits into its two roots.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ForbiddenEigenvalueError, SizeCapError
from .operator import GridFunction
from .symbolic import Point, designated_neighbor, enumerate_level_set

FORBIDDEN_TOL = 1e-9
MAX_SPECTRUM_DEPTH = 20


def phi(x: float, beta: int, N: int) -> float:
    """Root of ``t^2 - (N + x) t + x`` on branch ``beta``.

    The small root is evaluated as ``2x / (s + sqrt(s^2 - 4x))`` with
    ``s = N + x`` so it keeps full relative precision as ``x -> 0``.
    """
    if beta not in (1, -1):
        raise ValueError(f"beta must be +1 or -1, got {beta}")
    s = N + x
    disc = s * s - 4.0 * x
    if disc < 0:
        raise ValueError(f"negative discriminant at x={x}, N={N}")
    r = math.sqrt(disc)
    if beta == 1:
        return 0.5 * (s + r)
    return 2.0 * x / (s + r) if s + r != 0 else 0.0


class Forbidden(enum.Enum):
    ZERO = "0"
    ONE = "1"
    N_VALUE = "N"
    REGULAR = "regular"


def classify_forbidden(lam: float, N: int, tol: float = FORBIDDEN_TOL) -> Forbidden:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if abs(lam) <= tol:
        return Forbidden.ZERO
    if abs(lam - 1) <= tol:
        return Forbidden.ONE
    if abs(lam - N) <= tol:
        return Forbidden.N_VALUE
    return Forbidden.REGULAR


def lambda_prev(lam: float, N: int, tol: float = FORBIDDEN_TOL) -> float:
    """The coarse-level eigenvalue ``lam (N - lam) / (1 - lam)``; inverse of both branches."""
    kind = classify_forbidden(lam, N, tol)
    if kind in (Forbidden.ZERO, Forbidden.ONE):
        raise ForbiddenEigenvalueError(f"lambda_prev undefined at forbidden value {lam} ({kind.name})")
    return lam * (N - lam) / (1.0 - lam)


class Base(enum.Enum):
    ONE = "1"
    N = "N"


@dataclass(frozen=True, order=True)
class DecimationAddress:
    """Where a Dirichlet eigenvalue comes from: base value, birth level, branch word.

    ``betas`` is a string over ``+``/``-`` applied oldest first.
    """

    base: Base
    born_at: int
    betas: str = ""

    def __post_init__(self) -> None:
        if self.born_at < 1:
            raise ValueError("born_at must be >= 1")
        if set(self.betas) - {"+", "-"}:
            raise ValueError(f"betas must be over '+'/'-', got {self.betas!r}")

    @property
    def level(self) -> int:
        return self.born_at + len(self.betas)

    def base_value(self, N: int) -> float:
        return 1.0 if self.base is Base.ONE else float(N)

    def value(self, N: int) -> float:
        x = self.base_value(N)
        for b in self.betas:
            x = phi(x, 1 if b == "+" else -1, N)
        return x

    def sort_key(self) -> tuple:
        return (0 if self.base is Base.ONE else 1, self.born_at, self.betas)

    def to_dict(self) -> dict:
        return {"base": self.base.value, "born_at": self.born_at, "betas": self.betas}

    @classmethod
    def from_dict(cls, d: dict) -> "DecimationAddress":
        return cls(Base(d["base"]), int(d["born_at"]), d["betas"])


@dataclass(frozen=True)
class SpectrumEntry:
    value: float
    multiplicity: int
    address: DecimationAddress

    def to_dict(self) -> dict:
        return {"value": self.value, "multiplicity": self.multiplicity, "address": self.address.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumEntry":
        return cls(float(d["value"]), int(d["multiplicity"]), DecimationAddress.from_dict(d["address"]))


def base_multiplicity(base: Base, N: int, born_at: int) -> int:
    return N if base is Base.ONE else N**born_at * (N - 2)


def _require_spectral_N(N: int) -> None:
    if N < 3:
        raise ValueError(
            f"spectral decimation requires N >= 3 (got N={N}): for N = 2 the "
            "lambda = N eigenspace is empty and the decimation identities degenerate"
        )


def dirichlet_spectrum(N: int, m: int, max_depth: int = MAX_SPECTRUM_DEPTH) -> list[SpectrumEntry]:
    """Complete Dirichlet spectrum of H_m with multiplicities, in address order."""
    _require_spectral_N(N)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m > max_depth:
        raise SizeCapError(f"spectrum depth m={m} exceeds cap {max_depth} ({2 ** (m + 1) - 2} entries)")
    return list(_spectrum(N, m))


@lru_cache(maxsize=32)
def _spectrum(N: int, m: int) -> tuple[SpectrumEntry, ...]:
    fresh = [
        SpectrumEntry(1.0, base_multiplicity(Base.ONE, N, m), DecimationAddress(Base.ONE, m)),
        SpectrumEntry(float(N), base_multiplicity(Base.N, N, m), DecimationAddress(Base.N, m)),
    ]
    if m == 1:
        return tuple(fresh)
    out = fresh
    for e in _spectrum(N, m - 1):
        for b, sign in ((1, "+"), (-1, "-")):
            a = e.address
            addr = DecimationAddress(a.base, a.born_at, a.betas + sign)
            out.append(SpectrumEntry(phi(e.value, b, N), e.multiplicity, addr))
    out.sort(key=lambda e: e.address.sort_key())
    return tuple(out)


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: float
    functions: list[GridFunction]
    address: DecimationAddress | None = None

    @property
    def multiplicity(self) -> int:
        return len(self.functions)

    def matrix(self) -> np.ndarray:
        """Functions stacked as rows."""
        return np.vstack([f.values for f in self.functions])


def eigenbasis_one(N: int, m: int) -> EigenPair:
    """Indicators of the level-m points with prefix ``(s, ..., s)`` for each symbol s.

    Each satisfies ``H_m u = -u`` exactly off V_0.
    """
    _require_spectral_N(N)
    ls = enumerate_level_set(N, m)
    funcs = []
    for s in range(1, N + 1):
        v = np.zeros(len(ls), dtype=np.int64)
        for l in range(1, N + 1):
            if l != s:
                v[ls.index[Point((s,) * m, l)]] = 1
        funcs.append(GridFunction(N, m, v))
    return EigenPair(1.0, funcs, DecimationAddress(Base.ONE, m))


def eigenbasis_N(N: int, m: int) -> EigenPair:
    """Differences ``delta_p - delta_q`` inside each m-relation class.

    ``p`` is the earliest level-m member of the class in V_m order and ``q``
    runs over the other level-m members, giving N - 2 functions per class.
    Each satisfies ``H_m u = -N u`` exactly off V_0.
    """
    _require_spectral_N(N)
    ls = enumerate_level_set(N, m)
    classes: dict[tuple[int, ...], list[int]] = {}
    for k in range(ls.level_slice(m).start, len(ls)):
        classes.setdefault(ls.points[k].prefix, []).append(k)
    funcs = []
    for members in classes.values():
        first, *rest = members
        for k in rest:
            v = np.zeros(len(ls), dtype=np.int64)
            v[first], v[k] = 1, -1
            funcs.append(GridFunction(N, m, v))
    return EigenPair(float(N), funcs, DecimationAddress(Base.N, m))


def extend_eigenfunction(u_prev: GridFunction, lam_m: float, N: int, tol: float = FORBIDDEN_TOL) -> GridFunction:
    """Extend a level-(m-1) function to V_m for eigenvalue ``lam_m``.

    A new point p takes ``u_prev(q) / (1 - lam_m)`` where q is p's
    neighbour in V_{m-1}.
    """
    if u_prev.N != N:
        raise ValueError(f"grid function has N={u_prev.N}, expected {N}")
    kind = classify_forbidden(lam_m, N, tol)
    if kind is not Forbidden.REGULAR:
        raise ForbiddenEigenvalueError(f"cannot extend at forbidden eigenvalue {lam_m} ({kind.name})")
    m = u_prev.level + 1
    ls = enumerate_level_set(N, m)
    parents = _parent_index(N, m)
    out = np.empty(len(ls), dtype=np.float64)
    n_prev = len(u_prev.values)
    out[:n_prev] = u_prev.values
    out[n_prev:] = u_prev.values[parents] / (1.0 - lam_m)
    return GridFunction(N, m, out)


@lru_cache(maxsize=64)
def _parent_index(N: int, m: int) -> np.ndarray:
    ls = enumerate_level_set(N, m)
    lo = ls.level_slice(m).start
    idx = np.array([ls.index[designated_neighbor(p)] for p in ls.points[lo:]], dtype=np.intp)
    idx.setflags(write=False)
    return idx


def eigenspace(N: int, address: DecimationAddress) -> EigenPair:
    """Eigenspace for one address, built at its birth level and extended along its branch word."""
    base = eigenbasis_one(N, address.born_at) if address.base is Base.ONE else eigenbasis_N(N, address.born_at)
    funcs = base.functions
    lam = base.value
    for b in address.betas:
        lam = phi(lam, 1 if b == "+" else -1, N)
        funcs = [extend_eigenfunction(f, lam, N) for f in funcs]
    return EigenPair(lam, funcs, address)


def dirichlet_eigenbasis(N: int, m: int) -> list[EigenPair]:
    """Explicit eigenbasis of every Dirichlet eigenvalue of H_m; N^{m+1} - N functions in all."""
    return [eigenspace(N, e.address) for e in dirichlet_spectrum(N, m)]
