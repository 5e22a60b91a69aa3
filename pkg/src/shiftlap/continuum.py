"""Eigenfunctions on the whole shift space and the renormalized eigenvalue limit."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .decimation import (
    Base,
    SpectrumEntry,
    eigenbasis_one,
    eigenspace,
    extend_eigenfunction,
    phi,
)
from .errors import ConvergenceError, ForbiddenEigenvalueError
from .operator import GridFunction, assemble
from .symbolic import Point, canonicalize, change_positions, enumerate_level_set

DEFAULT_LIMIT_TOL = 1e-12


def phi_minus_tail(lam0: float, N: int, count: int) -> list[float]:
    """``[lam0, phi_-(lam0), phi_-^2(lam0), ...]`` of length ``count + 1``."""
    seq = [lam0]
    for _ in range(count):
        seq.append(phi(seq[-1], -1, N))
    return seq


@dataclass(eq=False)
class ExtendedEigenfunction:
    """A level-eta eigenfunction continued along the all-minus branch.

    ``lambda_at(m)`` is ``phi_-^(m - eta)`` of the base eigenvalue.
    """

    N: int
    eta: int
    base_values: GridFunction
    base_eigenvalue: float
    _lams: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if self.base_values.level != self.eta or self.base_values.N != self.N:
            raise ValueError("base values must live on V_eta")
        self._lams = [self.base_eigenvalue]

    @classmethod
    def from_one_basis(cls, N: int, eta: int, symbol: int) -> "ExtendedEigenfunction":
        """The lambda = 1 indicator function for ``symbol`` at level ``eta``."""
        if not 1 <= symbol <= N:
            raise ValueError(f"base symbol {symbol} out of range 1..{N}")
        pair = eigenbasis_one(N, eta)
        return cls(N, eta, pair.functions[symbol - 1], 1.0)

    def lambda_at(self, m: int) -> float:
        if m < self.eta:
            raise ValueError(f"lambda_m is only defined for m >= eta={self.eta}")
        while len(self._lams) <= m - self.eta:
            self._lams.append(phi(self._lams[-1], -1, self.N))
        return self._lams[m - self.eta]

    def lambda_seq(self, count: int) -> list[float]:
        """``lambda_{eta+1}, ..., lambda_{eta+count}``."""
        return [self.lambda_at(self.eta + k) for k in range(1, count + 1)]

    def partial_products(self, n: int) -> list[float]:
        """``a_k = prod_{j=eta+1}^{k} 1/(1 - lambda_j)`` for k = eta+1..n."""
        out, acc = [], 1.0
        for k in range(self.eta + 1, n + 1):
            acc /= 1.0 - self.lambda_at(k)
            out.append(acc)
        return out


def base_point(p: Point, eta: int) -> Point:
    """``(p_1 .. p_eta, p_{eta+1} repeated)``, the fibre base of p in V_eta."""
    return canonicalize(p.word(eta), p.symbol(eta + 1))


def evaluate_at(f: ExtendedEigenfunction, p: Point) -> float:
    """Value of the extended eigenfunction at ``p``.

    Beyond level eta this is the base value at p's fibre base divided by
    ``prod (1 - lambda_n)`` over the positions n in (eta, level(p)] where
    consecutive symbols of p change.
    """
    ls = enumerate_level_set(f.N, f.eta)
    if p.level <= f.eta:
        return float(f.base_values.values[ls.index[p]])
    q = base_point(p, f.eta)
    denom = 1.0
    for n in change_positions(p, f.eta, p.level):
        lam = f.lambda_at(n)
        if lam == 1.0:
            raise ForbiddenEigenvalueError(f"lambda_{n} = 1 makes the fibre product singular")
        denom *= 1.0 - lam
    return float(f.base_values.values[ls.index[q]]) / denom


def extend_to_level(f: ExtendedEigenfunction, m: int) -> GridFunction:
    """u_m on all of V_m, built by repeated single-level extension."""
    u = f.base_values
    for k in range(f.eta + 1, m + 1):
        u = extend_eigenfunction(u, f.lambda_at(k), f.N)
    return u


@dataclass
class LimitTrace:
    N: int
    m0: int
    lambda0: float
    terms: list[tuple[int, float, float]]
    converged_value: float
    iterations: int
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "m0": self.m0,
            "lambda0": self.lambda0,
            "terms": [[m, lam, scaled] for m, lam, scaled in self.terms],
            "converged_value": self.converged_value,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LimitTrace":
        return cls(
            N=int(d["N"]),
            m0=int(d["m0"]),
            lambda0=float(d["lambda0"]),
            terms=[(int(m), float(l), float(s)) for m, l, s in d["terms"]],
            converged_value=float(d["converged_value"]),
            iterations=int(d["iterations"]),
            converged=bool(d.get("converged", True)),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "lambda_m", "scaled"])
        for m, lam, scaled in self.terms:
            w.writerow([m, repr(lam), repr(scaled)])
        return buf.getvalue()


def renormalized_limit(
    N: int,
    lam0: float,
    m0: int = 1,
    tol: float = DEFAULT_LIMIT_TOL,
    max_m: int | None = None,
    strict: bool = False,
) -> LimitTrace:
    """Iterate ``lambda_{m+1} = phi_-(lambda_m)`` and track ``N^{m+1} lambda_m``.

    Stops once successive scaled terms differ by less than ``tol`` relative.
    With ``strict`` a non-converged trace raises instead of being returned
    with ``converged=False``.
    """
    if lam0 < 0:
        raise ValueError("lam0 must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_m is None:
        max_m = m0 + 200
    m, lam = m0, float(lam0)
    terms = [(m, lam, float(N) ** (m + 1) * lam)]
    converged = False
    while m < max_m:
        lam = phi(lam, -1, N)
        m += 1
        scaled = float(N) ** (m + 1) * lam
        prev = terms[-1][2]
        if scaled > prev:
            raise AssertionError(f"renormalized sequence not decreasing at m={m}")
        terms.append((m, lam, scaled))
        if prev == 0 or abs(prev - scaled) < tol * abs(prev):
            converged = True
            break
    trace = LimitTrace(N, m0, float(lam0), terms, terms[-1][2], len(terms) - 1, converged)
    if strict and not converged:
        raise ConvergenceError(f"renormalized limit not within tol={tol} by m={max_m}")
    return trace


def laplacian_residuals(
    N: int,
    entry: SpectrumEntry,
    m_max: int,
    lam: float | None = None,
) -> dict[int, float]:
    """``r_m = max |N^{m+1} (H_m u_m)(p) + lam u_m(p)|`` over level-exactly-m points.

    ``u_m`` continues the entry's eigenspace (first basis function) along the
    minus branch; ``lam`` defaults to the renormalized limit of the entry.
    """
    m0 = entry.address.level
    if m_max < m0:
        raise ValueError(f"m_max={m_max} is below the entry's level {m0}")
    if lam is None:
        lam = renormalized_limit(N, entry.value, m0).converged_value
    u = eigenspace(N, entry.address).functions[0]
    lam_m = entry.value
    out = {}
    for m in range(m0, m_max + 1):
        if m > m0:
            lam_m = phi(lam_m, -1, N)
            u = extend_eigenfunction(u, lam_m, N)
        H = assemble(N, m)
        vals = np.asarray(u.values, dtype=np.float64)
        r = float(N) ** (m + 1) * (H.entries @ vals) + lam * vals
        lo = enumerate_level_set(N, m).level_slice(m)
        out[m] = float(np.max(np.abs(r[lo])))
    return out


def laplacian_residual(N: int, entry: SpectrumEntry, m_max: int, lam: float | None = None) -> float:
    return laplacian_residuals(N, entry, m_max, lam)[m_max]


def truncate(p: Point, depth: int) -> Point:
    """The V_depth point agreeing with p on its first depth + 1 coordinates."""
    return canonicalize(p.word(depth), p.symbol(depth + 1))


def continuity_probe(f: ExtendedEigenfunction, x: Point, y: Point, depth: int) -> float:
    """``|u(x') - u(y')|`` for the depth-truncations of x and y."""
    return abs(evaluate_at(f, truncate(x, depth)) - evaluate_at(f, truncate(y, depth)))


def shared_prefix_length(x: Point, y: Point, depth: int) -> int:
    n = 0
    while n < depth + 1 and x.symbol(n + 1) == y.symbol(n + 1):
        n += 1
    return n


def majorant_limit(f: ExtendedEigenfunction, M0: int, terms: int = 200) -> float:
    """Limit b of the increasing majorant of the partial products a_n.

    Uses ``C = N^{M0} lambda_{M0}``, so that ``lambda_n <= C / N^n`` for
    n >= M0, and ``b = a_{M0} prod_{k > M0} N^k / (N^k - C)``.
    """
    if M0 <= f.eta:
        raise ValueError("M0 must exceed eta")
    N = f.N
    C = float(N) ** M0 * f.lambda_at(M0)
    b = f.partial_products(M0)[-1]
    for k in range(M0 + 1, M0 + 1 + terms):
        Nk = float(N) ** k
        factor = Nk / (Nk - C)
        if factor == 1.0:
            break
        b *= factor
    return b


def continuity_bound(f: ExtendedEigenfunction, x: Point, y: Point, depth: int) -> float:
    """Upper bound ``b * max|u_eta| * |tail_x - tail_y|`` for the probe difference.

    ``tail_x`` is the product of ``1/(1 - lambda_n)`` over change positions
    of the truncated x that are not fixed by the shared prefix.
    """
    M0 = shared_prefix_length(x, y, depth)
    if M0 <= f.eta:
        raise ValueError(f"points must share more than eta={f.eta} initial symbols")
    xs, ys = truncate(x, depth), truncate(y, depth)

    def tail(p: Point) -> float:
        acc = 1.0
        for n in change_positions(p, max(f.eta, M0 - 1), p.level):
            acc /= 1.0 - f.lambda_at(n)
        return acc

    b = majorant_limit(f, M0)
    return b * float(np.max(np.abs(f.base_values.values))) * abs(tail(xs) - tail(ys))


def lam0_for_base(base: str, N: int) -> float:
    """Resolve a CLI base token ('1', 'N', '0' or a number) to a starting eigenvalue."""
    if base == Base.N.value:
        return float(N)
    return float(base)
