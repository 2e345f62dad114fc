import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stgst.graph import ShiftKind, ShiftMatrix, build_line_graph, eigendecompose, make_shift, random_graph
from stgst.product import (
    MAX_JOINT_NODES,
    ProductKind,
    joint_eigenvalues,
    joint_fourier_basis,
    product,
    product_shift,
)

P2 = build_line_graph(2)


def loop_product(As, At, kind):
    """Entry-by-entry definition of the three products."""
    N, T = len(As), len(At)
    out = np.zeros((N * T, N * T))
    for s1, t1, s2, t2 in itertools.product(range(N), range(T), range(N), range(T)):
        kron = As[s1][s2] * At[t1][t2]
        cart = As[s1][s2] * (t1 == t2) + (s1 == s2) * At[t1][t2]
        val = {"kronecker": kron, "cartesian": cart, "strong": kron + cart}[kind]
        out[s1 * T + t1, s2 * T + t2] = val
    return out


def test_p2_kronecker():
    np.testing.assert_array_equal(
        product(P2, P2, "kronecker").adjacency, [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]
    )


def test_p2_cartesian_is_c4():
    np.testing.assert_array_equal(
        product(P2, P2, "cartesian").adjacency, [[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]]
    )


def test_p2_strong_is_k4():
    np.testing.assert_array_equal(product(P2, P2, "strong").adjacency, np.ones((4, 4)) - np.eye(4))


@settings(max_examples=25, deadline=None)
@given(N=st.integers(1, 5), T=st.integers(1, 5), seed=st.integers(0, 10**6), kind=st.sampled_from(list(ProductKind)))
def test_product_matches_loop_definition(N, T, seed, kind):
    rng = np.random.default_rng(seed)
    As = random_graph(N, 0.5, rng, weighted=True)
    At = random_graph(T, 0.5, rng, weighted=True)
    np.testing.assert_allclose(product(As, At, kind).adjacency, loop_product(As.adjacency, At.adjacency, kind.value))


def test_strong_is_kronecker_plus_cartesian(rng):
    As, At = random_graph(4, 0.5, rng), build_line_graph(5)
    strong = product(As, At, "strong").adjacency
    np.testing.assert_array_equal(
        strong, product(As, At, "kronecker").adjacency + product(As, At, "cartesian").adjacency
    )


def test_product_degrees(rng):
    As, At = random_graph(5, 0.5, rng), build_line_graph(4)
    ds, dt = As.degrees, At.degrees
    expect = {
        "kronecker": np.outer(ds, dt),
        "cartesian": ds[:, None] + dt[None, :],
        "strong": np.outer(ds, dt) + ds[:, None] + dt[None, :],
    }
    for kind, d in expect.items():
        np.testing.assert_allclose(product(As, At, kind).as_graph().degrees, d.reshape(-1))


def test_size_guard():
    big = build_line_graph(MAX_JOINT_NODES // 10 + 1)
    with pytest.raises(ValueError, match="exceeds"):
        product(big, build_line_graph(10), "kronecker")


def test_identity_bases_give_identity():
    I2 = eigendecompose(ShiftMatrix(ShiftKind.ADJACENCY, np.eye(2), True))
    V, pairs = joint_fourier_basis(I2, I2)
    np.testing.assert_array_equal(V, np.eye(4))
    assert pairs.shape == (4, 2)


def test_joint_basis_requires_eig():
    S = make_shift(P2, "adjacency")
    with pytest.raises(ValueError):
        joint_fourier_basis(S, S)


@pytest.mark.parametrize("kind", list(ProductKind))
def test_joint_spectrum_multiset(kind, rng):
    Ss = eigendecompose(make_shift(random_graph(4, 0.6, rng, True), "adjacency"))
    St = eigendecompose(make_shift(build_line_graph(5), "adjacency"))
    S = product_shift(Ss, St, kind)
    direct = np.linalg.eigvalsh(S.matrix)
    np.testing.assert_allclose(np.sort(joint_eigenvalues(Ss.eigvals, St.eigvals, kind)), direct, atol=1e-10)
    np.testing.assert_allclose(S.eigvecs @ np.diag(S.eigvals) @ S.eigvecs.T, S.matrix, atol=1e-10)


def test_joint_pairs_flatten_order():
    Ss = eigendecompose(make_shift(build_line_graph(3), "adjacency"))
    St = eigendecompose(make_shift(build_line_graph(2), "adjacency"))
    _, pairs = joint_fourier_basis(Ss, St)
    assert tuple(pairs[1 * 2 + 1]) == (Ss.eigvals[1], St.eigvals[1])


def test_product_shift_without_eig():
    W = make_shift(build_line_graph(3), ShiftKind.LAZY_RANDOM_WALK)
    S = product_shift(W, W, "cartesian")
    assert not S.has_eig and not S.symmetric
    np.testing.assert_allclose(S.matrix, np.kron(W.matrix, np.eye(3)) + np.kron(np.eye(3), W.matrix))
