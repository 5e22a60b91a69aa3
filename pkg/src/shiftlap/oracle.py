"""Brute-force verification of predicted Dirichlet spectra.

The eigensolver is a cyclic Jacobi method in round-robin (tournament)
ordering: each step rotates n/2 disjoint index pairs at once, and n - 1
steps visit every pair exactly once per sweep.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .decimation import SpectrumEntry
from .errors import ConvergenceError
from .operator import GridFunction, Operator

DEFAULT_JACOBI_TOL = 1e-13
DEFAULT_MAX_SWEEPS = 60
DEFAULT_CLUSTER_TOL = 1e-6


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """n - 1 rounds of disjoint pairs covering all pairs of range(n), n even."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        ps = np.array(players[:half])
        qs = np.array(players[half:][::-1])
        lo, hi = np.minimum(ps, qs), np.maximum(ps, qs)
        rounds.append((lo, hi))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(
    M: np.ndarray,
    tol: float = DEFAULT_JACOBI_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    vectors: bool = False,
) -> tuple[np.ndarray, np.ndarray | None, int]:
    """Eigenvalues (ascending) and optionally eigenvectors (columns) of symmetric M.

    Sweeps until the off-diagonal Frobenius norm drops below
    ``tol * ||M||_F``.  Returns ``(values, vectors, sweeps)``.
    """
    A = np.array(M, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValueError("matrix is not symmetric")
    n = A.shape[0]
    if n == 0:
        raise ValueError("matrix must have side >= 1")
    padded = n + (n % 2)
    if padded != n:
        # A decoupled zero row/column keeps the tournament schedule even.
        B = np.zeros((padded, padded))
        B[:n, :n] = A
        A = B
    V = np.eye(padded) if vectors else None
    fro = np.linalg.norm(A)
    target = tol * fro
    rounds = _round_robin(padded)

    def off_norm(X: np.ndarray) -> float:
        # Direct sum; ||X||^2 - ||diag X||^2 cancels catastrophically near convergence.
        off = X - np.diag(np.diag(X))
        return float(np.linalg.norm(off))

    sweeps = 0
    while off_norm(A) > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        # Skip rotations whose pivot is already negligible (threshold sweep).
        thresh = 0.0 if sweeps > 3 else 0.2 * off_norm(A) / padded**2
        for p, q in rounds:
            apq = A[p, q]
            active = np.abs(apq) > max(thresh, 1e-300)
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = A[p, p], A[q, q]
            theta = (aqq - app) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J on rows then columns; pairs are disjoint so this is exact.
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            if V is not None:
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = Vp * c - Vq * s
                V[:, q] = Vp * s + Vq * c
    # The pad index is never rotated (its pivots stay exactly zero), so drop it directly.
    vals = np.diag(A)[:n].copy()
    if V is not None:
        V = V[:n, :n]
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    if V is not None:
        V = V[:, order]
    return vals, V, sweeps


def cluster(values: np.ndarray, cluster_tol: float) -> list[tuple[float, int]]:
    """Group sorted values whose consecutive gaps are within ``cluster_tol``."""
    out: list[tuple[float, int]] = []
    group: list[float] = []
    for v in values:
        if group and v - group[-1] > cluster_tol:
            out.append((float(np.mean(group)), len(group)))
            group = []
        group.append(float(v))
    if group:
        out.append((float(np.mean(group)), len(group)))
    return out


@dataclass(frozen=True, eq=False)
class OracleSpectrum:
    eigenvalues: np.ndarray
    clusters: list[tuple[float, int]]
    vectors: np.ndarray | None = None
    sweeps: int = 0

    def cluster_count(self, value: float, tol: float = 1e-6) -> int:
        return sum(c for v, c in self.clusters if abs(v - value) <= tol)


def symmetric_eigen(
    M: np.ndarray,
    tol: float = DEFAULT_JACOBI_TOL,
    cluster_tol: float | None = None,
    vectors: bool = False,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> OracleSpectrum:
    vals, V, sweeps = jacobi_eigh(M, tol=tol, max_sweeps=max_sweeps, vectors=vectors)
    if cluster_tol is None:
        cluster_tol = DEFAULT_CLUSTER_TOL * max(1.0, float(np.max(np.abs(vals))))
    return OracleSpectrum(vals, cluster(vals, cluster_tol), V, sweeps)


def dirichlet_oracle(H: Operator, **kw) -> OracleSpectrum:
    """Oracle spectrum of the negated Dirichlet restriction of H."""
    return symmetric_eigen(-H.dirichlet.astype(np.float64), **kw)


@dataclass
class ComparisonReport:
    matched: list[tuple[float, int, float, int]] = field(default_factory=list)
    max_value_error: float = 0.0
    unmatched_predicted: list[tuple[float, int]] = field(default_factory=list)
    unmatched_oracle: list[tuple[float, int]] = field(default_factory=list)
    multiplicity_mismatches: list[tuple[float, int, int]] = field(default_factory=list)
    predicted_total: int = 0
    oracle_total: int = 0
    ambiguous: bool = False
    tol: float = 0.0
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "matched": [list(r) for r in self.matched],
            "max_value_error": self.max_value_error,
            "unmatched_predicted": [list(r) for r in self.unmatched_predicted],
            "unmatched_oracle": [list(r) for r in self.unmatched_oracle],
            "multiplicity_mismatches": [list(r) for r in self.multiplicity_mismatches],
            "predicted_total": self.predicted_total,
            "oracle_total": self.oracle_total,
            "ambiguous": self.ambiguous,
            "tol": self.tol,
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        return cls(
            matched=[(float(a), int(b), float(c), int(e)) for a, b, c, e in d["matched"]],
            max_value_error=float(d["max_value_error"]),
            unmatched_predicted=[(float(a), int(b)) for a, b in d["unmatched_predicted"]],
            unmatched_oracle=[(float(a), int(b)) for a, b in d["unmatched_oracle"]],
            multiplicity_mismatches=[(float(a), int(b), int(c)) for a, b, c in d["multiplicity_mismatches"]],
            predicted_total=int(d["predicted_total"]),
            oracle_total=int(d["oracle_total"]),
            ambiguous=bool(d["ambiguous"]),
            tol=float(d["tol"]),
            passed=bool(d["passed"]),
        )


def spectrum_compare(predicted: list[SpectrumEntry], oracle: OracleSpectrum, tol: float = 1e-8) -> ComparisonReport:
    """Greedy nearest matching of predicted entries onto oracle clusters.

    Failures are reported, never raised.
    """
    report = ComparisonReport(tol=tol)
    preds = sorted(((e.value, e.multiplicity) for e in predicted), key=lambda t: t[0])
    report.predicted_total = sum(mult for _, mult in preds)
    report.oracle_total = sum(c for _, c in oracle.clusters)
    report.ambiguous = any(b[0] - a[0] <= 10 * tol for a, b in zip(preds, preds[1:]))

    free = list(oracle.clusters)
    max_err = 0.0
    for value, mult in preds:
        if not free:
            report.unmatched_predicted.append((value, mult))
            continue
        k = min(range(len(free)), key=lambda j: abs(free[j][0] - value))
        cval, count = free[k]
        err = abs(cval - value)
        if err > tol:
            report.unmatched_predicted.append((value, mult))
            continue
        free.pop(k)
        max_err = max(max_err, err)
        report.matched.append((value, mult, cval, count))
        if count != mult:
            report.multiplicity_mismatches.append((value, mult, count))
    report.unmatched_oracle = free
    report.max_value_error = max_err
    report.passed = (
        not report.unmatched_predicted
        and not report.unmatched_oracle
        and not report.multiplicity_mismatches
        and not report.ambiguous
        and max_err <= tol
    )
    return report


def residual(H: Operator, u: GridFunction, lam: float):
    """``max |(H u)(p) + lam u(p)|`` over p off the boundary.

    Stays in exact integer arithmetic when ``u`` and ``lam`` are integral.
    """
    if u.N != H.N or u.level != H.m:
        raise ValueError("grid function does not match the operator")
    if not u.is_dirichlet():
        raise ValueError("residual requires a function vanishing on V_0")
    vals = u.values
    if np.issubdtype(vals.dtype, np.integer) and float(lam).is_integer():
        lam = int(lam)
    r = (H.entries @ vals + lam * vals)[H.N :]
    if r.size == 0:
        return 0
    out = np.max(np.abs(r))
    return int(out) if np.issubdtype(r.dtype, np.integer) else float(out)
