import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nearex.algebra import seeded_rng
from nearex.numlin import (
    SingularMatrixError,
    lstsq,
    null_space,
    nullity,
    numerical_rank,
    singular_values,
    solve_square,
)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_solve_square_matches_direct_inverse():
    rng = seeded_rng(0)
    for _ in range(10):
        A = random_complex(rng, 5, 5)
        b = random_complex(rng, 5)
        x = solve_square(A, b)
        assert np.linalg.norm(A @ x - b) < 1e-10 * np.linalg.norm(A)


def test_solve_square_raises_on_singular_matrix():
    A = np.array([[1.0, 2.0], [2.0, 4.0]], dtype=complex)
    with pytest.raises(SingularMatrixError):
        solve_square(A, np.ones(2))
    with pytest.raises(SingularMatrixError):
        solve_square(np.zeros((2, 2)), np.ones(2))


def test_solve_square_rejects_bad_shapes():
    with pytest.raises(ValueError):
        solve_square(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        solve_square(np.eye(2), np.ones(3))


def test_numerical_rank_on_constructed_matrix():
    rng = seeded_rng(1)
    U, _ = np.linalg.qr(random_complex(rng, 6, 6))
    V, _ = np.linalg.qr(random_complex(rng, 6, 6))
    s = np.array([1.0, 0.5, 1e-3, 1e-14, 0.0, 0.0])
    A = U @ np.diag(s) @ V.conj().T
    assert numerical_rank(A, tol=1e-8) == 3
    assert nullity(A, tol=1e-8) == 3
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_null_space_is_orthonormal_and_annihilated():
    rng = seeded_rng(2)
    A = random_complex(rng, 3, 6)  # rank 3, nullity 3
    N = null_space(A)
    assert N.shape == (6, 3)
    assert np.allclose(N.conj().T @ N, np.eye(3), atol=1e-12)
    assert np.linalg.norm(A @ N) < 1e-12 * np.linalg.norm(A)


def test_singular_values_sorted_and_consistent():
    rng = seeded_rng(3)
    A = random_complex(rng, 4, 7)
    s = singular_values(A)
    assert np.all(np.diff(s) <= 0)
    assert np.allclose(s, np.linalg.svd(A, compute_uv=False))
    assert singular_values(np.zeros((0, 3))).size == 0


def test_lstsq_minimum_norm_solution():
    rng = seeded_rng(4)
    A = random_complex(rng, 3, 5)
    b = random_complex(rng, 3)
    x = lstsq(A, b)
    assert np.linalg.norm(A @ x - b) < 1e-10
    # minimum-norm: x lies in the row space of A
    N = null_space(A)
    assert np.linalg.norm(N.conj().T @ x) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6))
def test_rank_plus_nullity_is_column_count(seed, n):
    rng = seeded_rng(seed)
    m = int(rng.integers(1, 7))
    A = random_complex(rng, m, n)
    assert numerical_rank(A) + nullity(A) == n
    assert null_space(A).shape[1] == nullity(A)
