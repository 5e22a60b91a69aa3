"""The integer difference operators H_m on functions over V_m."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import SizeCapError
from .symbolic import canonicalize, deleted_neighborhood, enumerate_level_set

# Dense int64 storage: side 8192 is ~512 MB.
DEFAULT_DENSE_CAP = 8192


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real (or integer) values on V_level, in canonical order."""

    N: int
    level: int
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.ndim != 1 or values.shape[0] != self.N ** (self.level + 1):
            raise ValueError(
                f"expected {self.N ** (self.level + 1)} values for level {self.level}, "
                f"got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, N: int, level: int, dtype=np.int64) -> "GridFunction":
        return cls(N, level, np.zeros(N ** (level + 1), dtype=dtype))

    def is_dirichlet(self) -> bool:
        return not np.any(self.values[: self.N])

    def restrict(self, level: int) -> "GridFunction":
        """Restriction to V_level (a prefix of the canonical order)."""
        if level > self.level:
            raise ValueError("cannot restrict to a finer level")
        return GridFunction(self.N, level, self.values[: self.N ** (level + 1)].copy())

    def __getitem__(self, k):
        return self.values[k]


@dataclass(frozen=True, eq=False)
class Operator:
    N: int
    m: int
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def dirichlet(self) -> np.ndarray:
        return dirichlet_restrict(self)

    def to_dict(self) -> dict:
        return {"N": self.N, "m": self.m, "size": self.size, "rows": self.entries.tolist()}

    def to_csv(self) -> str:
        ls = enumerate_level_set(self.N, self.m)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([p.label() for p in ls])
        w.writerows(self.entries.tolist())
        return buf.getvalue()


def diagonal_value(N: int, m: int, level: int) -> int:
    return -(m - level + 1) * (N - 1)


def assemble(N: int, m: int, size_cap: int | None = None, dense_cap: int = DEFAULT_DENSE_CAP) -> Operator:
    """Assemble H_m on the ordered V_m.

    Every i-relation class (i = 0..m) is a complete graph on its N members;
    the union of these graphs gives the off-diagonal ones.  Each row then
    carries the diagonal ``-(m - n + 1)(N - 1)`` for its point's level n.
    """
    ls = enumerate_level_set(N, m, size_cap)
    n = len(ls)
    if n > dense_cap:
        raise SizeCapError(f"dense H_{m} would have side {n} > dense cap {dense_cap}")
    H = np.zeros((n, n), dtype=np.int64)
    for i in range(m + 1):
        for w in product(range(1, N + 1), repeat=i):
            members = [ls.index[canonicalize(w, l)] for l in range(1, N + 1)]
            idx = np.array(members)
            block = H[np.ix_(idx, idx)]
            # Two distinct points are related at most at one level.
            if np.any(block):
                raise AssertionError(f"double adjacency in class {w} at level {i}")
            H[np.ix_(idx, idx)] = 1
            H[idx, idx] = 0
    levels = np.array([p.level for p in ls])
    H[np.arange(n), np.arange(n)] = -(m - levels + 1) * (N - 1)
    if np.any(H.sum(axis=1)):
        raise AssertionError("row sums of H_m must vanish")
    H.setflags(write=False)
    return Operator(N, m, H)


def dirichlet_restrict(H: Operator) -> np.ndarray:
    """Principal submatrix on V_m minus V_0 (drop the first N rows and columns)."""
    return H.entries[H.N :, H.N :]


def apply(H: Operator, u: GridFunction) -> GridFunction:
    """H_m u as a matrix-vector product."""
    if u.N != H.N or u.level != H.m:
        raise ValueError(
            f"grid function (N={u.N}, level={u.level}) does not match H (N={H.N}, m={H.m})"
        )
    return GridFunction(H.N, H.m, H.entries @ u.values)


def apply_recursive(N: int, m: int, u: GridFunction) -> GridFunction:
    """H_m u from the level-by-level two-case formula, without the matrix.

    On new level-m points only the level-m neighbourhood contributes; on
    V_{m-1} the value is H_{m-1} of the restriction plus the level-m term.
    """
    if u.level != m or u.N != N:
        raise ValueError("grid function level does not match m")
    ls = enumerate_level_set(N, m)
    vals = u.values
    out = np.zeros_like(vals)

    for k, p in enumerate(ls):
        out[k] = -(N - 1) * vals[k] + sum(vals[ls.index[q]] for q in deleted_neighborhood(p, m, N))
    if m > 0:
        inner = apply_recursive(N, m - 1, u.restrict(m - 1))
        out[: len(inner.values)] += inner.values
    return GridFunction(N, m, out)
