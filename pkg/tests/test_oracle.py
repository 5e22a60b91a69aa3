import numpy as np
import pytest

from shiftlap.decimation import (
    SpectrumEntry,
    dirichlet_spectrum,
    eigenbasis_one,
    extend_eigenfunction,
    lambda_prev,
    phi,
)
from shiftlap.errors import ConvergenceError
from shiftlap.operator import GridFunction, assemble
from shiftlap.oracle import (
    ComparisonReport,
    _round_robin,
    cluster,
    dirichlet_oracle,
    jacobi_eigh,
    residual,
    spectrum_compare,
    symmetric_eigen,
)


def _random_sym(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    return A + A.T


@pytest.mark.parametrize("n", [2, 4, 8])
def test_round_robin_covers_each_pair_once(n):
    seen = []
    for lo, hi in _round_robin(n):
        assert len(set(lo) | set(hi)) == n
        seen += list(zip(lo.tolist(), hi.tolist()))
    assert sorted(seen) == [(i, j) for i in range(n) for j in range(i + 1, n)]


@pytest.mark.parametrize("n, seed", [(1, 0), (2, 1), (5, 2), (16, 3), (33, 4)])
def test_jacobi_matches_lapack(n, seed):
    A = _random_sym(n, seed)
    vals, V, _ = jacobi_eigh(A, vectors=True)
    assert np.allclose(vals, np.linalg.eigvalsh(A), atol=1e-11)
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-11)
    assert np.allclose(A @ V, V * vals, atol=1e-10)


def test_jacobi_identity_and_diagonal():
    vals, _, sweeps = jacobi_eigh(np.eye(2))
    assert np.array_equal(vals, [1.0, 1.0]) and sweeps == 0
    vals, _, _ = jacobi_eigh(np.diag([3.0, -1.0, 2.0]))
    assert np.array_equal(vals, [-1.0, 2.0, 3.0])


def test_jacobi_two_by_two_closed_form():
    vals, _, _ = jacobi_eigh(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(vals, [1.0, 3.0], atol=1e-15)


def test_jacobi_invariants():
    A = _random_sym(21, 7)
    vals, _, _ = jacobi_eigh(A)
    assert np.sum(vals) == pytest.approx(np.trace(A), abs=1e-10)
    assert np.sum(vals**2) == pytest.approx(np.sum(A**2), rel=1e-12)


def test_jacobi_rejects_bad_input():
    with pytest.raises(ValueError, match="symmetric"):
        jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="square"):
        jacobi_eigh(np.ones((2, 3)))
    with pytest.raises(ConvergenceError):
        jacobi_eigh(_random_sym(20, 0), max_sweeps=1)


def test_cluster():
    assert cluster(np.array([1.0, 1.0 + 1e-9, 2.0]), 1e-6) == [(pytest.approx(1.0), 2), (2.0, 1)]
    assert cluster(np.array([]), 1e-6) == []


@pytest.mark.parametrize("ctol", [1e-9, 1e-6, 1e-3])
def test_cluster_tolerance_stable_on_operator_spectra(ctol):
    # The spectrum's gaps are far wider than any of these, so counts do not move.
    spec = dirichlet_oracle(assemble(3, 3), cluster_tol=ctol)
    assert [c for _, c in spec.clusters] == [c for _, c in dirichlet_oracle(assemble(3, 3)).clusters]
    assert len(spec.clusters) == 14


@pytest.mark.parametrize("N, m", [(3, 1), (3, 2), (4, 2)])
def test_compare_passes(N, m):
    spec = dirichlet_oracle(assemble(N, m))
    rep = spectrum_compare(dirichlet_spectrum(N, m), spec)
    assert rep.passed, rep
    assert rep.max_value_error < 1e-12
    assert rep.predicted_total == rep.oracle_total == N ** (m + 1) - N
    assert ComparisonReport.from_dict(rep.to_dict()) == rep


def test_compare_flags_wrong_multiplicity():
    pred = dirichlet_spectrum(3, 2)
    e = pred[0]
    pred[0] = SpectrumEntry(e.value, e.multiplicity + 1, e.address)
    rep = spectrum_compare(pred, dirichlet_oracle(assemble(3, 2)))
    assert not rep.passed
    assert rep.multiplicity_mismatches == [(e.value, e.multiplicity + 1, e.multiplicity)]


def test_compare_flags_missing_and_shifted_values():
    spec = dirichlet_oracle(assemble(3, 2))
    pred = dirichlet_spectrum(3, 2)
    rep = spectrum_compare(pred[1:], spec)
    assert not rep.passed and len(rep.unmatched_oracle) == 1
    e = pred[0]
    pred[0] = SpectrumEntry(e.value + 1e-6, e.multiplicity, e.address)
    rep = spectrum_compare(pred, spec)
    assert not rep.passed and rep.unmatched_predicted


def test_residual_exact_and_float():
    H = assemble(3, 2)
    chi = eigenbasis_one(3, 2).functions[0]
    assert residual(H, chi, 1.0) == 0 and isinstance(residual(H, chi, 1.0), int)
    assert residual(H, chi, 2.0) == 1
    with pytest.raises(ValueError):
        residual(H, GridFunction(3, 2, np.ones(27)), 1.0)


def test_residual_extended_level3():
    u = eigenbasis_one(3, 1).functions[0]
    lam = 1.0
    for _ in range(2):
        lam = phi(lam, -1, 3)
        u = extend_eigenfunction(u, lam, 3)
    assert u.level == 3
    assert residual(assemble(3, 3), u, lam) < 1e-10


@pytest.mark.parametrize("N, m", [(3, 2), (3, 3)])
def test_restriction_direction(N, m):
    # Oracle eigenvectors for non-forbidden eigenvalues restrict to eigenvectors one level down.
    H, Hc = assemble(N, m), assemble(N, m - 1)
    spec = symmetric_eigen(-H.dirichlet.astype(float), vectors=True)
    rng = np.random.default_rng(11)
    regular = [k for k, v in enumerate(spec.eigenvalues) if min(abs(v), abs(v - 1), abs(v - N)) > 1e-6]
    for k in rng.choice(regular, size=10, replace=False):
        lam = spec.eigenvalues[k]
        u = np.concatenate([np.zeros(N), spec.vectors[:, k]])
        coarse = GridFunction(N, m - 1, u[: N**m])
        assert np.linalg.norm(coarse.values) > 1e-6
        assert residual(Hc, coarse, lambda_prev(lam, N)) < 1e-8
