import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shiftlap.decimation import eigenbasis_one
from shiftlap.errors import SizeCapError
from shiftlap.operator import (
    GridFunction,
    apply,
    apply_recursive,
    assemble,
    diagonal_value,
    dirichlet_restrict,
)
from shiftlap.symbolic import Point, enumerate_level_set, related

CASES = [(2, 0), (2, 3), (3, 0), (3, 1), (3, 2), (3, 3), (4, 2), (5, 1)]


def brute_force_H(N, m):
    """Entrywise definition: 1 when p != q are i-related for some admissible i."""
    ls = enumerate_level_set(N, m)
    n = len(ls)
    H = np.zeros((n, n), dtype=np.int64)
    for a, p in enumerate(ls):
        for b, q in enumerate(ls):
            if a == b:
                H[a, b] = diagonal_value(N, m, p.level)
            elif any(related(p, q, i) for i in range(max(p.level, q.level), m + 1)):
                H[a, b] = 1
    return H


def test_H0_N3():
    assert assemble(3, 0).entries.tolist() == [[-2, 1, 1], [1, -2, 1], [1, 1, -2]]


@pytest.mark.parametrize("N, m", CASES)
def test_assemble_matches_entrywise_definition(N, m):
    assert np.array_equal(assemble(N, m).entries, brute_force_H(N, m))


@pytest.mark.parametrize("N, m", CASES)
def test_structural_invariants(N, m):
    H = assemble(N, m).entries
    ls = enumerate_level_set(N, m)
    assert H.dtype == np.int64
    assert np.array_equal(H, H.T)
    off = H - np.diag(np.diag(H))
    assert set(np.unique(off)) <= {0, 1}
    assert not H.sum(axis=1).any()
    for k, p in enumerate(ls):
        assert H[k, k] == -(m - p.level + 1) * (N - 1)
        assert off[k].sum() == (m - p.level + 1) * (N - 1)


def test_H1_N3_rows():
    H = assemble(3, 1)
    ls = enumerate_level_set(3, 1)
    P = Point.parse
    diag = np.diag(H.entries)
    assert diag[:3].tolist() == [-4, -4, -4]
    assert diag[3:].tolist() == [-2] * 6
    ones = {ls[k] for k in np.flatnonzero(H.entries[ls.index[P(".1")]] == 1)}
    assert ones == {P(".2"), P(".3"), P("1.2"), P("1.3")}


def test_dirichlet_restrict_shapes():
    assert dirichlet_restrict(assemble(3, 1)).shape == (6, 6)
    assert dirichlet_restrict(assemble(3, 2)).shape == (24, 24)
    D = dirichlet_restrict(assemble(3, 1))
    ls = enumerate_level_set(3, 1)
    P = Point.parse
    assert np.all(np.diag(D) == -2)
    a, b = ls.index[P("1.2")] - 3, ls.index[P("1.3")] - 3
    assert D[a, b] == 1
    assert D[ls.index[P("2.1")] - 3, ls.index[P("3.1")] - 3] == 0


def test_apply_examples():
    H = assemble(3, 1)
    ls = enumerate_level_set(3, 1)
    assert not apply(H, GridFunction(3, 1, np.full(9, 7))).values.any()
    v = np.zeros(9, dtype=np.int64)
    k = ls.index[Point.parse("1.2")]
    v[k] = 1
    out = apply(H, GridFunction(3, 1, v)).values
    assert out[k] == -2
    assert out[ls.index[Point.parse(".1")]] == 1
    assert out[ls.index[Point.parse("1.3")]] == 1
    assert set(np.flatnonzero(out)) == {k, ls.index[Point.parse(".1")], ls.index[Point.parse("1.3")]}


def test_apply_chi_is_eigenfunction():
    H = assemble(3, 2)
    for f in eigenbasis_one(3, 2).functions:
        out = apply(H, f).values
        assert np.array_equal(out[3:], -f.values[3:])


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        apply(assemble(3, 1), GridFunction.zeros(3, 2))
    with pytest.raises(ValueError):
        GridFunction(3, 1, np.zeros(8))


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from([(2, 2), (3, 1), (3, 2), (4, 1), (4, 2)]),
    st.data(),
)
def test_apply_matches_recursive_formula(Nm, data):
    N, m = Nm
    n = N ** (m + 1)
    vals = np.array(data.draw(st.lists(st.integers(-50, 50), min_size=n, max_size=n)), dtype=np.int64)
    u = GridFunction(N, m, vals)
    assert np.array_equal(apply(assemble(N, m), u).values, apply_recursive(N, m, u).values)


@pytest.mark.parametrize("N, m", [(2, 2), (3, 2), (4, 2)])
def test_negated_dirichlet_positive_definite(N, m):
    D = -dirichlet_restrict(assemble(N, m)).astype(float)
    np.linalg.cholesky(D)


def test_dense_cap():
    with pytest.raises(SizeCapError):
        assemble(3, 4, dense_cap=100)


def test_dumps():
    H = assemble(3, 0)
    assert H.to_dict() == {"N": 3, "m": 0, "size": 3, "rows": [[-2, 1, 1], [1, -2, 1], [1, 1, -2]]}
    assert H.to_csv() == ".1,.2,.3\n-2,1,1\n1,-2,1\n1,1,-2\n"


def test_operator_immutable():
    H = assemble(3, 1)
    with pytest.raises(ValueError):
        H.entries[0, 0] = 5
